#include "factorlab/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "factorlab/error.hpp"

namespace factorlab {

namespace {

constexpr double kCanvasWidth = 960.0;
constexpr double kCanvasHeight = 460.0;

constexpr std::array<const char*, 20> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5", "#c49c94", "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5",
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s = buf;
    return s == "-0.000" ? "0.000" : s;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-15 ? 0.0 : v);
    return buf;
}

std::string escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

const char* color(std::size_t i) { return kPalette[i % kPalette.size()]; }

std::string kind_name(ChartKind k) {
    switch (k) {
        case ChartKind::Line: return "line";
        case ChartKind::StackedArea: return "stacked_area";
        case ChartKind::Heatmap: return "heatmap";
        case ChartKind::GroupedBar: return "grouped_bar";
    }
    return "line";
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

Range padded(double lo, double hi) {
    if (!(hi > lo)) {
        const double pad = std::abs(lo) > 0.0 ? 0.5 * std::abs(lo) : 1.0;
        return {lo - pad, hi + pad};
    }
    return {lo, hi};
}

class Canvas {
public:
    Canvas(const ChartSpec& spec, Range y) : spec_(spec), y_(y) {
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kCanvasWidth) << "\" height=\""
             << num(kCanvasHeight) << "\" viewBox=\"0 0 " << num(kCanvasWidth) << ' ' << num(kCanvasHeight)
             << "\" data-kind=\"" << kind_name(spec.kind) << "\" data-ymin=\"" << format_double(y.lo)
             << "\" data-ymax=\"" << format_double(y.hi) << "\" data-plot=\"" << num(area_.left) << ' '
             << num(area_.top) << ' ' << num(area_.width) << ' ' << num(area_.height) << "\">\n";
        out_ << "<rect x=\"0\" y=\"0\" width=\"" << num(kCanvasWidth) << "\" height=\"" << num(kCanvasHeight)
             << "\" fill=\"#ffffff\"/>\n";
        out_ << "<text x=\"" << num(kCanvasWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
             << escape(spec.title) << "</text>\n";
    }

    const PlotArea& area() const { return area_; }
    double y(double v) const { return area_.top + (y_.hi - v) / (y_.hi - y_.lo) * area_.height; }
    double x(std::size_t i, std::size_t n) const {
        return n <= 1 ? area_.left + area_.width / 2
                      : area_.left + static_cast<double>(i) / static_cast<double>(n - 1) * area_.width;
    }
    std::ostringstream& out() { return out_; }

    void axes(bool y_ticks) {
        out_ << "<rect class=\"frame\" x=\"" << num(area_.left) << "\" y=\"" << num(area_.top) << "\" width=\""
             << num(area_.width) << "\" height=\"" << num(area_.height) << "\" fill=\"none\" stroke=\"#333333\"/>\n";
        if (y_ticks) {
            for (int k = 0; k <= 4; ++k) {
                const double v = y_.lo + (y_.hi - y_.lo) * k / 4.0;
                out_ << "<text x=\"" << num(area_.left - 6) << "\" y=\"" << num(y(v) + 4)
                     << "\" text-anchor=\"end\" font-size=\"10\">" << tick(v) << "</text>\n";
                out_ << "<line x1=\"" << num(area_.left) << "\" y1=\"" << num(y(v)) << "\" x2=\""
                     << num(area_.left + area_.width) << "\" y2=\"" << num(y(v))
                     << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
            }
        }
        if (!spec_.x_label.empty()) {
            out_ << "<text x=\"" << num(area_.left + area_.width / 2) << "\" y=\"" << num(kCanvasHeight - 8)
                 << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(spec_.x_label) << "</text>\n";
        }
        if (!spec_.y_label.empty()) {
            out_ << "<text x=\"14\" y=\"" << num(area_.top + area_.height / 2) << "\" transform=\"rotate(-90 14 "
                 << num(area_.top + area_.height / 2) << ")\" text-anchor=\"middle\" font-size=\"12\">"
                 << escape(spec_.y_label) << "</text>\n";
        }
    }

    void x_labels(std::size_t n) {
        if (spec_.labels.empty()) return;
        const std::size_t shown = std::min<std::size_t>(6, n);
        for (std::size_t k = 0; k < shown; ++k) {
            const std::size_t i = shown <= 1 ? 0 : k * (n - 1) / (shown - 1);
            if (i >= spec_.labels.size()) continue;
            out_ << "<text x=\"" << num(x(i, n)) << "\" y=\"" << num(area_.top + area_.height + 16)
                 << "\" text-anchor=\"middle\" font-size=\"10\">" << escape(spec_.labels[i]) << "</text>\n";
        }
    }

    void legend() {
        const double lx = area_.left + area_.width + 12;
        for (std::size_t s = 0; s < spec_.series.size(); ++s) {
            const double ly = area_.top + 4 + 14.0 * static_cast<double>(s);
            out_ << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly) << "\" width=\"10\" height=\"10\" fill=\""
                 << color(s) << "\"/>\n";
            out_ << "<text x=\"" << num(lx + 14) << "\" y=\"" << num(ly + 9) << "\" font-size=\"10\">"
                 << escape(spec_.series[s].name) << "</text>\n";
        }
    }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    const ChartSpec& spec_;
    Range y_;
    PlotArea area_;
    std::ostringstream out_;
};

std::string render_line(const ChartSpec& spec, std::size_t n) {
    double lo = spec.series.front().values.front();
    double hi = lo;
    for (const auto& s : spec.series) {
        for (double v : s.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    Canvas c(spec, padded(lo, hi));
    c.axes(true);
    for (std::size_t s = 0; s < spec.series.size(); ++s) {
        c.out() << "<polyline class=\"series\" data-series=\"" << escape(spec.series[s].name)
                << "\" fill=\"none\" stroke=\"" << color(s) << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < n; ++i) {
            c.out() << (i ? " " : "") << num(c.x(i, n)) << ',' << num(c.y(spec.series[s].values[i]));
        }
        c.out() << "\"/>\n";
    }
    c.x_labels(n);
    c.legend();
    return c.finish();
}

std::string render_stacked(const ChartSpec& spec, std::size_t n) {
    std::vector<std::vector<double>> lower(spec.series.size(), std::vector<double>(n));
    std::vector<std::vector<double>> upper = lower;
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double pos = 0.0;
        for (std::size_t s = 0; s < spec.series.size(); ++s) {
            lower[s][i] = pos;
            pos += spec.series[s].values[i];
            upper[s][i] = pos;
            lo = std::min({lo, lower[s][i], upper[s][i]});
            hi = std::max({hi, lower[s][i], upper[s][i]});
        }
    }
    Canvas c(spec, padded(lo, hi));
    c.axes(true);
    for (std::size_t s = 0; s < spec.series.size(); ++s) {
        c.out() << "<path class=\"layer\" data-series=\"" << escape(spec.series[s].name) << "\" fill=\""
                << color(s) << "\" stroke=\"none\" d=\"";
        for (std::size_t i = 0; i < n; ++i) {
            c.out() << (i ? " L " : "M ") << num(c.x(i, n)) << ',' << num(c.y(upper[s][i]));
        }
        for (std::size_t i = n; i-- > 0;) c.out() << " L " << num(c.x(i, n)) << ',' << num(c.y(lower[s][i]));
        c.out() << " Z\"/>\n";
    }
    c.x_labels(n);
    c.legend();
    return c.finish();
}

std::string heat_color(double v, double scale) {
    const double t = std::clamp(v / scale, -1.0, 1.0);
    const auto channel = [](double x) { return static_cast<int>(std::lround(255.0 * x)); };
    int r = 255, g = 255, b = 255;
    if (t >= 0) {
        g = b = channel(1.0 - t);
    } else {
        r = g = channel(1.0 + t);
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

std::string render_heatmap(const ChartSpec& spec, std::size_t n) {
    double scale = 1.0;
    for (const auto& s : spec.series)
        for (double v : s.values) scale = std::max(scale, std::abs(v));
    Canvas c(spec, {-scale, scale});
    const auto& a = c.area();
    const double side = std::min(a.width, a.height);
    const double cw = side / static_cast<double>(n);
    const double ch = side / static_cast<double>(spec.series.size());
    const double left = a.left + 90;
    for (std::size_t r = 0; r < spec.series.size(); ++r) {
        const double y = a.top + ch * static_cast<double>(r);
        c.out() << "<text x=\"" << num(left - 4) << "\" y=\"" << num(y + ch * 0.65)
                << "\" text-anchor=\"end\" font-size=\"8\">" << escape(spec.series[r].name) << "</text>\n";
        for (std::size_t k = 0; k < n; ++k) {
            const double v = spec.series[r].values[k];
            c.out() << "<rect class=\"cell\" x=\"" << num(left + cw * static_cast<double>(k)) << "\" y=\"" << num(y)
                    << "\" width=\"" << num(cw) << "\" height=\"" << num(ch) << "\" fill=\"" << heat_color(v, scale)
                    << "\" data-value=\"" << format_double(v) << "\"/>\n";
        }
    }
    for (std::size_t k = 0; k < n && k < spec.labels.size(); ++k) {
        const double x = left + cw * (static_cast<double>(k) + 0.5);
        const double y = a.top + side + 6;
        c.out() << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" transform=\"rotate(60 " << num(x) << ' '
                << num(y) << ")\" font-size=\"8\">" << escape(spec.labels[k]) << "</text>\n";
    }
    return c.finish();
}

std::string render_bars(const ChartSpec& spec, std::size_t n) {
    double lo = 0.0;
    double hi = 0.0;
    for (const auto& s : spec.series) {
        for (double v : s.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    Canvas c(spec, padded(lo, hi));
    c.axes(true);
    const auto& a = c.area();
    const double group = a.width / static_cast<double>(n);
    const double bar = group * 0.8 / static_cast<double>(spec.series.size());
    for (std::size_t s = 0; s < spec.series.size(); ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            const double v = spec.series[s].values[i];
            const double x = a.left + group * static_cast<double>(i) + group * 0.1 + bar * static_cast<double>(s);
            const double y0 = c.y(std::max(v, 0.0));
            const double y1 = c.y(std::min(v, 0.0));
            c.out() << "<rect class=\"bar\" data-series=\"" << escape(spec.series[s].name) << "\" x=\"" << num(x)
                    << "\" y=\"" << num(y0) << "\" width=\"" << num(bar) << "\" height=\"" << num(y1 - y0)
                    << "\" fill=\"" << color(s) << "\"/>\n";
        }
    }
    for (std::size_t i = 0; i < n && i < spec.labels.size(); ++i) {
        const double x = a.left + group * (static_cast<double>(i) + 0.5);
        const double y = a.top + a.height + 8;
        c.out() << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" transform=\"rotate(45 " << num(x) << ' '
                << num(y) << ")\" font-size=\"8\">" << escape(spec.labels[i]) << "</text>\n";
    }
    c.legend();
    return c.finish();
}

}  // namespace

std::string render_svg(const ChartSpec& spec) {
    if (spec.series.empty()) fail(ErrorKind::EmptyChart, "chart '" + spec.title + "' has no series");
    const std::size_t n = spec.series.front().values.size();
    if (n == 0) fail(ErrorKind::EmptyChart, "chart '" + spec.title + "' has no points");
    for (const auto& s : spec.series) {
        if (s.values.size() != n) fail(ErrorKind::BadInput, "chart series '" + s.name + "' has a different length");
        for (double v : s.values) {
            if (!std::isfinite(v)) fail(ErrorKind::BadInput, "chart series '" + s.name + "' holds a non-finite value");
        }
    }
    if (!spec.labels.empty() && spec.labels.size() != n) {
        fail(ErrorKind::BadInput, "chart labels do not match the series length");
    }
    switch (spec.kind) {
        case ChartKind::Line: return render_line(spec, n);
        case ChartKind::StackedArea: return render_stacked(spec, n);
        case ChartKind::Heatmap: return render_heatmap(spec, n);
        case ChartKind::GroupedBar: return render_bars(spec, n);
    }
    return {};
}

void render_chart(const ChartSpec& spec) {
    const std::string svg = render_svg(spec);
    write_text_file(spec.path, svg);
}

std::string format_percent(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, std::abs(value * 100.0));
    std::string digits = buf;
    const auto dot = digits.find('.');
    std::string whole = digits.substr(0, dot);
    const std::string frac = dot == std::string::npos ? "" : digits.substr(dot);
    std::string grouped;
    for (std::size_t i = 0; i < whole.size(); ++i) {
        if (i > 0 && (whole.size() - i) % 3 == 0) grouped += ',';
        grouped += whole[i];
    }
    const bool zero = std::all_of(digits.begin(), digits.end(), [](char c) { return c == '0' || c == '.'; });
    return (value < 0.0 && !zero ? "-" : "") + grouped + frac + "%";
}

double parse_percent(std::string_view text) {
    std::string cleaned;
    for (char c : trim(text)) {
        if (c != ',' && c != '%') cleaned += c;
    }
    const auto v = parse_double(cleaned);
    if (!v) fail(ErrorKind::BadInput, "not a percentage: '" + std::string(text) + "'");
    return *v / 100.0;
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string percent_table_csv(const std::vector<std::string>& rows,
                              const std::vector<std::pair<std::string, Eigen::VectorXd>>& columns, int decimals) {
    for (const auto& [title, v] : columns) {
        if (static_cast<std::size_t>(v.size()) != rows.size()) {
            fail(ErrorKind::BadInput, "table column '" + title + "' does not match the row count");
        }
    }
    std::ostringstream out;
    out << "factor";
    for (const auto& [title, v] : columns) out << ',' << csv_field(title);
    out << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << csv_field(rows[i]);
        for (const auto& [title, v] : columns) out << ',' << csv_field(format_percent(v(static_cast<Eigen::Index>(i)), decimals));
        out << '\n';
    }
    return out.str();
}

PercentTable parse_percent_table(const std::string& csv) {
    PercentTable t;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (header) {
            t.columns.assign(cells.begin() + 1, cells.end());
            t.values.resize(t.columns.size());
            header = false;
            continue;
        }
        if (cells.size() != t.columns.size() + 1) fail(ErrorKind::BadInput, "table row has the wrong width");
        t.rows.push_back(cells.front());
        for (std::size_t j = 0; j < t.columns.size(); ++j) t.values[j].push_back(parse_percent(cells[j + 1]));
    }
    return t;
}

std::string emit_bl_table(const BLResult& result, const WeightVector& prior, const std::vector<std::string>& factors) {
    return percent_table_csv(factors, {
                                          {"Black-Litterman Return", result.posterior_mu},
                                          {"pi", result.prior_pi},
                                          {"Return Difference", result.posterior_mu - result.prior_pi},
                                          {"Black-Litterman Weights", result.posterior_weights.weights},
                                          {prior.scheme.title(), prior.weights},
                                          {"Weights Difference", result.posterior_weights.weights - prior.weights},
                                      });
}

ReportLayout::ReportLayout(std::filesystem::path out_dir, std::string run_id) : root_(std::move(out_dir)) {
    if (run_id.empty() || run_id.find_first_of("/\\") != std::string::npos || run_id == "." || run_id == "..") {
        fail(ErrorKind::BadInput, "run id must be a plain directory name");
    }
    root_ /= run_id;
}

void ReportLayout::create() const {
    std::error_code ec;
    for (const auto& dir : {tables(), charts()}) {
        std::filesystem::create_directories(dir, ec);
        if (ec) fail(ErrorKind::IoError, "cannot create '" + dir.string() + "': " + ec.message());
    }
}

std::string run_meta_json(const std::vector<std::pair<std::string, std::string>>& entries) {
    std::map<std::string, std::string> sorted(entries.begin(), entries.end());
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto& [k, v] : sorted) doc[k] = v;
    return doc.dump(2) + "\n";
}

}  // namespace factorlab
