#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "factorlab/allocate.hpp"
#include "factorlab/blacklitterman.hpp"

namespace factorlab {

enum class ChartKind { Line, StackedArea, Heatmap, GroupedBar };

struct ChartSeries {
    std::string name;
    std::vector<double> values;
};

/// Line / StackedArea: each series is a curve over `labels` (x positions).
/// Heatmap: each series is a row, `labels` name the columns.
/// GroupedBar: `labels` are the groups, each series contributes one bar per group.
struct ChartSpec {
    ChartKind kind = ChartKind::Line;
    std::string title;
    std::vector<ChartSeries> series;
    std::vector<std::string> labels;
    std::string x_label;
    std::string y_label;
    std::filesystem::path path;
};

/// Deterministic SVG text. EmptyChart without series or points, BadInput for
/// ragged series.
std::string render_svg(const ChartSpec& spec);
/// Writes render_svg(spec) to spec.path; IoError if it cannot be written.
void render_chart(const ChartSpec& spec);

/// Plot-area geometry shared by the renderers; stacked layers map value v to
/// y = top + (y_max - v) / (y_max - y_min) * height.
struct PlotArea {
    double left = 70.0;
    double top = 40.0;
    double width = 680.0;
    double height = 360.0;
};

/// "1,234.57%" style: value * 100, two decimals, thousands separators,
/// negative zero printed as 0.00%.
std::string format_percent(double value, int decimals = 2);
/// Inverse of format_percent, returning the fraction (e.g. 0.0123).
double parse_percent(std::string_view text);

/// Quotes a CSV field when it holds a comma, quote or newline.
std::string csv_field(std::string_view text);

/// BL return, pi, return difference, BL weights, prior weights, weights
/// difference; one row per factor, values in percent.
std::string emit_bl_table(const BLResult& result, const WeightVector& prior, const std::vector<std::string>& factors);

struct PercentTable {
    std::vector<std::string> rows;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> values;  // values[column][row], fractions
};

/// Generic factor x column table in percent.
std::string percent_table_csv(const std::vector<std::string>& rows,
                              const std::vector<std::pair<std::string, Eigen::VectorXd>>& columns, int decimals = 2);
PercentTable parse_percent_table(const std::string& csv);

/// reports/{run_id} with tables/ and charts/ subdirectories.
class ReportLayout {
public:
    ReportLayout(std::filesystem::path out_dir, std::string run_id);

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path tables() const { return root_ / "tables"; }
    std::filesystem::path charts() const { return root_ / "charts"; }
    std::filesystem::path table(const std::string& name) const { return tables() / name; }
    std::filesystem::path chart(const std::string& name) const { return charts() / name; }
    std::filesystem::path meta() const { return root_ / "run_meta.json"; }

    /// Creates the directories; IoError on failure.
    void create() const;

private:
    std::filesystem::path root_;
};

/// Sorted-key JSON object of the given string pairs.
std::string run_meta_json(const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace factorlab
