#include <gtest/gtest.h>

#include <cmath>
#include <regex>

#include "factorlab/report.hpp"
#include "test_support.hpp"

using namespace factorlab;
using namespace factorlab::testing;

namespace {

std::string attribute(const std::string& svg, const std::string& name) {
    const std::regex re(name + "=\"([^\"]*)\"");
    std::smatch m;
    if (!std::regex_search(svg, m, re)) return {};
    return m[1];
}

std::vector<std::pair<double, double>> path_points(const std::string& d) {
    std::vector<std::pair<double, double>> pts;
    const std::regex re("(-?[0-9.]+),(-?[0-9.]+)");
    for (auto it = std::sregex_iterator(d.begin(), d.end(), re); it != std::sregex_iterator(); ++it) {
        pts.emplace_back(std::stod((*it)[1]), std::stod((*it)[2]));
    }
    return pts;
}

ChartSpec line_spec() {
    ChartSpec s;
    s.kind = ChartKind::Line;
    s.title = "Wealth <A&B>";
    s.series = {{"a", {1.0, 1.1, 1.2}}, {"b", {1.0, 0.9, 1.3}}};
    s.labels = {"d0", "d1", "d2"};
    return s;
}

}  // namespace

TEST(Percent, FormatsLikeTables) {
    EXPECT_EQ(format_percent(0.7637), "76.37%");
    EXPECT_EQ(format_percent(171.0741), "17,107.41%");
    EXPECT_EQ(format_percent(-0.2851), "-28.51%");
    EXPECT_EQ(format_percent(-0.0), "0.00%");
    EXPECT_EQ(format_percent(-0.00001), "0.00%");
    EXPECT_EQ(format_percent(12345.678, 1), "1,234,567.8%");
    EXPECT_EQ(format_percent(0.5, 0), "50%");
}

TEST(Percent, ParseInvertsFormat) {
    EXPECT_NEAR(parse_percent("17,107.41%"), 171.0741, 1e-12);
    EXPECT_NEAR(parse_percent(" -28.51% "), -0.2851, 1e-15);
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        const double v = rng.normal() * std::pow(10.0, static_cast<double>(rng.below(6)) - 2.0);
        EXPECT_NEAR(parse_percent(format_percent(v, 6)), v, 1e-8 + 1e-12 * std::abs(v));
    }
    EXPECT_EQ(error_kind_of([] { parse_percent("abc"); }), ErrorKind::BadInput);
}

TEST(CsvField, QuotesOnlyWhenNeeded) {
    EXPECT_EQ(csv_field("plain"), "plain");
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(PercentTable, RoundTrip) {
    const std::vector<std::string> rows{"us_growth", "us_value"};
    const auto csv = percent_table_csv(rows, {{"Weights, sample", Eigen::Vector2d(171.0741, -0.0001)},
                                              {"pi", Eigen::Vector2d(0.01, 0.02)}});
    EXPECT_EQ(csv, "factor,\"Weights, sample\",pi\nus_growth,\"17,107.41%\",1.00%\nus_value,-0.01%,2.00%\n");
    const auto t = parse_percent_table(csv);
    EXPECT_EQ(t.rows, rows);
    EXPECT_EQ(t.columns, (std::vector<std::string>{"Weights, sample", "pi"}));
    EXPECT_NEAR(t.values[0][0], 171.0741, 1e-12);
    EXPECT_NEAR(t.values[1][1], 0.02, 1e-15);
    EXPECT_EQ(error_kind_of([&] { percent_table_csv(rows, {{"x", Eigen::Vector3d::Zero()}}); }), ErrorKind::BadInput);
}

TEST(BlTable, ColumnsAndDifferences) {
    BLResult r;
    r.prior_pi = Eigen::Vector2d(0.01, 0.02);
    r.posterior_mu = Eigen::Vector2d(0.015, 0.02);
    r.posterior_weights.weights = Eigen::Vector2d(0.7, 0.3);
    const WeightVector prior{Eigen::Vector2d(0.5, 0.5), {SchemeKind::Markowitz, 2.0}, true};
    const auto t = parse_percent_table(emit_bl_table(r, prior, {"x", "y"}));
    EXPECT_EQ(t.columns, (std::vector<std::string>{"Black-Litterman Return", "pi", "Return Difference",
                                                   "Black-Litterman Weights", "Markowitz Weights with lambda=2",
                                                   "Weights Difference"}));
    EXPECT_NEAR(t.values[2][0], 0.005, 1e-12);
    EXPECT_NEAR(t.values[5][0], 0.2, 1e-12);
    EXPECT_NEAR(t.values[5][1], -0.2, 1e-12);
}

TEST(Svg, LineChartIsDeterministicAndEscaped) {
    const auto spec = line_spec();
    const auto a = render_svg(spec);
    EXPECT_EQ(a, render_svg(spec));
    EXPECT_NE(a.find("Wealth &lt;A&amp;B&gt;"), std::string::npos);
    EXPECT_EQ(attribute(a, "data-kind"), "line");
    EXPECT_EQ(std::stod(attribute(a, "data-ymin")), 0.9);
    EXPECT_EQ(std::stod(attribute(a, "data-ymax")), 1.3);
    EXPECT_NE(a.find("data-series=\"b\""), std::string::npos);
    EXPECT_EQ(a.rfind("</svg>\n"), a.size() - 7);
}

TEST(Svg, StackedLayersReproduceCumulativeSums) {
    ChartSpec spec;
    spec.kind = ChartKind::StackedArea;
    spec.series = {{"a", {0.2, 0.5, 0.1, 0.0}}, {"b", {0.3, 0.5, 0.6, 1.0}}, {"c", {0.5, 0.0, 0.3, 0.0}}};
    const auto svg = render_svg(spec);
    const double ymin = std::stod(attribute(svg, "data-ymin"));
    const double ymax = std::stod(attribute(svg, "data-ymax"));
    std::istringstream plot(attribute(svg, "data-plot"));
    double left = 0, top = 0, width = 0, height = 0;
    plot >> left >> top >> width >> height;
    auto value_of = [&](double y) { return ymax - (y - top) / height * (ymax - ymin); };

    const std::regex layer_re("<path class=\"layer\" data-series=\"([a-z])\"[^>]* d=\"([^\"]*)\"");
    std::vector<std::vector<std::pair<double, double>>> layers;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), layer_re); it != std::sregex_iterator(); ++it) {
        layers.push_back(path_points((*it)[2]));
    }
    ASSERT_EQ(layers.size(), 3u);
    std::vector<double> running(4, 0.0);
    for (std::size_t s = 0; s < 3; ++s) {
        ASSERT_EQ(layers[s].size(), 8u);
        for (std::size_t i = 0; i < 4; ++i) {
            const double lower = running[i];
            running[i] += spec.series[s].values[i];
            EXPECT_NEAR(value_of(layers[s][i].second), running[i], 1e-5);
            EXPECT_NEAR(value_of(layers[s][7 - i].second), lower, 1e-5);
            EXPECT_NEAR(layers[s][i].first, left + width * static_cast<double>(i) / 3.0, 1e-3);
        }
    }
    // fully invested at every date: top edge at 1
    for (double v : running) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(Svg, HeatmapAndBars) {
    ChartSpec heat;
    heat.kind = ChartKind::Heatmap;
    heat.series = {{"r0", {1.0, -0.5}}, {"r1", {-0.5, 1.0}}};
    heat.labels = {"r0", "r1"};
    const auto h = render_svg(heat);
    EXPECT_NE(h.find("data-value=\"-0.5\""), std::string::npos);
    EXPECT_NE(h.find("fill=\"#ff0000\""), std::string::npos);

    ChartSpec bars;
    bars.kind = ChartKind::GroupedBar;
    bars.series = {{"x", {0.1, -0.2}}, {"y", {0.3, 0.0}}};
    bars.labels = {"g0", "g1"};
    const auto b = render_svg(bars);
    std::size_t count = 0;
    for (std::size_t at = b.find("class=\"bar\""); at != std::string::npos; at = b.find("class=\"bar\"", at + 1)) ++count;
    EXPECT_EQ(count, 4u);
}

TEST(Svg, Errors) {
    ChartSpec empty;
    EXPECT_EQ(error_kind_of([&] { render_svg(empty); }), ErrorKind::EmptyChart);
    empty.series = {{"a", {}}};
    EXPECT_EQ(error_kind_of([&] { render_svg(empty); }), ErrorKind::EmptyChart);
    auto ragged = line_spec();
    ragged.series[1].values.pop_back();
    EXPECT_EQ(error_kind_of([&] { render_svg(ragged); }), ErrorKind::BadInput);
    auto nan = line_spec();
    nan.series[0].values[1] = std::nan("");
    EXPECT_EQ(error_kind_of([&] { render_svg(nan); }), ErrorKind::BadInput);
    auto labels = line_spec();
    labels.labels.pop_back();
    EXPECT_EQ(error_kind_of([&] { render_svg(labels); }), ErrorKind::BadInput);
}

TEST(Svg, RenderChartWritesFile) {
    const auto dir = scratch_dir("chart");
    auto spec = line_spec();
    spec.path = dir / "c.svg";
    render_chart(spec);
    EXPECT_EQ(read_file(spec.path), render_svg(spec));
    spec.path = dir / "missing" / "c.svg";
    EXPECT_EQ(error_kind_of([&] { render_chart(spec); }), ErrorKind::IoError);
}

TEST(Layout, PathsAndValidation) {
    const auto dir = scratch_dir("layout");
    const ReportLayout layout(dir, "run1");
    EXPECT_EQ(layout.table("w.csv"), dir / "run1" / "tables" / "w.csv");
    EXPECT_EQ(layout.chart("w.svg"), dir / "run1" / "charts" / "w.svg");
    EXPECT_EQ(layout.meta(), dir / "run1" / "run_meta.json");
    layout.create();
    EXPECT_TRUE(std::filesystem::is_directory(layout.tables()));
    EXPECT_TRUE(std::filesystem::is_directory(layout.charts()));
    EXPECT_EQ(error_kind_of([&] { ReportLayout(dir, "../x"); }), ErrorKind::BadInput);
    EXPECT_EQ(error_kind_of([&] { ReportLayout(dir, ""); }), ErrorKind::BadInput);
}

TEST(Layout, RunMetaSortsKeys) {
    EXPECT_EQ(run_meta_json({{"seed", "42"}, {"command", "bl"}}), "{\n  \"command\": \"bl\",\n  \"seed\": \"42\"\n}\n");
}
