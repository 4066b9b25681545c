#include "carisk/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "carisk/error.hpp"

namespace carisk {

const std::vector<std::string> kResultColumns = {
    "experiment",        "dataset",         "delta",
    "sigma11",           "var_unconstrained", "var_constrained",
    "pi0_unconstrained", "pi0_constrained", "car_unconstrained",
    "car_constrained",   "reduction_percent", "status"};

std::string format_number(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (value == 0.0) {
        return "0";  // folds -0
    }
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.12g", value);
    return buf.data();
}

std::string to_csv(const ExperimentTable& table) {
    std::ostringstream out;
    for (std::size_t i = 0; i < kResultColumns.size(); ++i) {
        out << (i ? "," : "") << kResultColumns[i];
    }
    out << '\n';
    for (const auto& r : table.rows) {
        out << r.experiment << ',' << r.dataset << ',' << format_number(r.delta) << ','
            << format_number(r.sigma11) << ',' << format_number(r.var_unconstrained) << ','
            << format_number(r.var_constrained) << ',' << format_number(r.pi0_unconstrained)
            << ',' << format_number(r.pi0_constrained) << ','
            << format_number(r.car_unconstrained) << ',' << format_number(r.car_constrained)
            << ',' << format_number(r.reduction_percent) << ',' << r.status << '\n';
    }
    return out.str();
}

std::string crossings_to_csv(const std::vector<ReductionCrossing>& crossings) {
    std::ostringstream out;
    out << "dataset,sigma11,delta_at_50pct\n";
    for (const auto& c : crossings) {
        out << c.dataset << ',' << format_number(c.sigma11) << ','
            << format_number(c.delta.value_or(std::numeric_limits<double>::quiet_NaN())) << '\n';
    }
    return out.str();
}

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw Error(ErrorKind::InvalidInput, "CSV has no column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        const std::string& cell = c < row.size() ? row[c] : std::string();
        if (cell.empty() || cell == "nan") {
            out.push_back(std::numeric_limits<double>::quiet_NaN());
        } else {
            out.push_back(std::stod(cell));
        }
    }
    return out;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream fields(line);
        while (std::getline(fields, cell, ',')) {
            cells.push_back(cell);
        }
        if (line.back() == ',') {
            cells.emplace_back();
        }
        if (first) {
            table.header = std::move(cells);
            first = false;
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    return table;
}

PlotSpec plot_spec_for(const std::string& experiment, const std::string& dataset) {
    PlotSpec spec;
    spec.series_column = "delta";
    spec.series_prefix = "delta = ";
    spec.x_column = "sigma11";
    spec.x_label = "sigma11";
    if (experiment == experiment_id::kVariance) {
        spec.title = "Log return variance, dataset " + dataset;
        spec.y_column = "var_constrained";
        spec.y_label = "Var(log X(T))";
        spec.reference_column = "var_unconstrained";
        spec.reference_label = "unconstrained";
    } else if (experiment == experiment_id::kRiskless) {
        spec.title = "Riskless fraction, dataset " + dataset;
        spec.y_column = "pi0_constrained";
        spec.y_label = "pi0 (constrained)";
        spec.reference_column = "pi0_unconstrained";
        spec.reference_label = "unconstrained";
    } else if (experiment == experiment_id::kReduction) {
        spec.title = "Variance reduction, dataset " + dataset;
        spec.x_column = "delta";
        spec.x_label = "delta";
        spec.y_column = "reduction_percent";
        spec.y_label = "reduction (%)";
        spec.series_column = "sigma11";
        spec.series_prefix = "sigma11 = ";
        spec.guide = 50.0;
    } else {
        throw Error(ErrorKind::InvalidInput, "unknown experiment '" + experiment + "'");
    }
    return spec;
}

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                 "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fixed(double v) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.2f", v);
    return buf.data();
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
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

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
    bool dashed = false;
};

}  // namespace

std::string render_line_plot(const CsvTable& table, const PlotSpec& spec) {
    const auto xs = table.numbers(spec.x_column);
    const auto ys = table.numbers(spec.y_column);
    const std::size_t key_col = table.column(spec.series_column);

    // Series keyed by their CSV text so grouping is exact.
    std::vector<std::string> keys;
    std::map<std::string, Series> groups;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const std::string& key = table.rows[i][key_col];
        if (!groups.count(key)) {
            keys.push_back(key);
            groups[key].label = spec.series_prefix + key;
        }
        groups[key].points.emplace_back(xs[i], ys[i]);
    }

    std::vector<Series> series;
    if (spec.reference_column && !keys.empty()) {
        const auto refs = table.numbers(*spec.reference_column);
        Series ref;
        ref.label = spec.reference_label;
        ref.dashed = true;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            if (table.rows[i][key_col] == keys.front()) {
                ref.points.emplace_back(xs[i], refs[i]);
            }
        }
        series.push_back(std::move(ref));
    }
    for (const auto& key : keys) {
        series.push_back(groups[key]);
    }
    for (auto& s : series) {
        std::stable_sort(s.points.begin(), s.points.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
    }

    double x_lo = std::numeric_limits<double>::infinity();
    double x_hi = -x_lo;
    double y_lo = x_lo;
    double y_hi = -x_lo;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (std::isfinite(x)) {
                x_lo = std::min(x_lo, x);
                x_hi = std::max(x_hi, x);
            }
            if (std::isfinite(y)) {
                y_lo = std::min(y_lo, y);
                y_hi = std::max(y_hi, y);
            }
        }
    }
    if (spec.guide) {
        y_lo = std::min(y_lo, *spec.guide);
        y_hi = std::max(y_hi, *spec.guide);
    }
    if (!std::isfinite(x_lo)) {
        x_lo = 0.0;
        x_hi = 1.0;
    }
    if (!std::isfinite(y_lo)) {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if (x_hi == x_lo) {
        x_hi = x_lo + 1.0;
    }
    if (y_hi == y_lo) {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
    auto py = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << fixed(kLeft + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << escape(spec.title) << "</text>\n";
    svg << "<rect x=\"" << fixed(kLeft) << "\" y=\"" << fixed(kTop) << "\" width=\""
        << fixed(plot_w) << "\" height=\"" << fixed(plot_h)
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    constexpr int kTicks = 5;
    for (int i = 0; i <= kTicks; ++i) {
        const double fx = x_lo + (x_hi - x_lo) * i / kTicks;
        const double fy = y_lo + (y_hi - y_lo) * i / kTicks;
        svg << "<line x1=\"" << fixed(px(fx)) << "\" y1=\"" << fixed(kTop + plot_h) << "\" x2=\""
            << fixed(px(fx)) << "\" y2=\"" << fixed(kTop + plot_h + 5) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << fixed(px(fx)) << "\" y=\"" << fixed(kTop + plot_h + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << format_number(std::round(fx * 1e4) / 1e4) << "</text>\n";
        svg << "<line x1=\"" << fixed(kLeft - 5) << "\" y1=\"" << fixed(py(fy)) << "\" x2=\""
            << fixed(kLeft) << "\" y2=\"" << fixed(py(fy)) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << fixed(kLeft - 8) << "\" y=\"" << fixed(py(fy) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << format_number(std::round(fy * 1e4) / 1e4) << "</text>\n";
    }
    svg << "<text x=\"" << fixed(kLeft + plot_w / 2) << "\" y=\"" << fixed(kHeight - 15)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape(spec.x_label) << "</text>\n";
    svg << "<text x=\"18\" y=\"" << fixed(kTop + plot_h / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << fixed(kTop + plot_h / 2) << ")\">"
        << escape(spec.y_label) << "</text>\n";

    if (spec.guide) {
        svg << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(py(*spec.guide)) << "\" x2=\""
            << fixed(kLeft + plot_w) << "\" y2=\"" << fixed(py(*spec.guide))
            << "\" stroke=\"gray\" stroke-dasharray=\"2,4\"/>\n";
    }

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* colour = series[s].dashed ? "black" : kPalette[s % kPalette.size()];
        // NaN breaks a line into separate segments.
        std::vector<std::string> segments;
        std::string current;
        for (const auto& [x, y] : series[s].points) {
            if (!std::isfinite(x) || !std::isfinite(y)) {
                if (!current.empty()) {
                    segments.push_back(current);
                    current.clear();
                }
                continue;
            }
            current += (current.empty() ? "" : " ") + fixed(px(x)) + "," + fixed(py(y));
        }
        if (!current.empty()) {
            segments.push_back(current);
        }
        for (const auto& seg : segments) {
            svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\""
                << (series[s].dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << seg
                << "\"/>\n";
        }
        const double ly = kTop + 16.0 + 20.0 * static_cast<double>(s);
        const double lx = kWidth - kRight + 15.0;
        svg << "<line x1=\"" << fixed(lx) << "\" y1=\"" << fixed(ly) << "\" x2=\"" << fixed(lx + 25)
            << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << colour << "\" stroke-width=\"2\""
            << (series[s].dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
        svg << "<text x=\"" << fixed(lx + 32) << "\" y=\"" << fixed(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(series[s].label)
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace carisk
