#pragma once

#include <optional>
#include <string>
#include <vector>

#include "carisk/experiments.hpp"

namespace carisk {

/// Header row for experiment CSV files.
extern const std::vector<std::string> kResultColumns;

/// Comma-separated, '.' decimal point, 12 significant digits, NaN as "nan".
std::string format_number(double value);

/// One header row plus one line per ResultRow, in table order.
std::string to_csv(const ExperimentTable& table);

std::string crossings_to_csv(const std::vector<ReductionCrossing>& crossings);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a named column; throws InvalidInput if absent.
    std::size_t column(const std::string& name) const;
    /// Column parsed as doubles ("nan" and empty cells become NaN).
    std::vector<double> numbers(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);

struct PlotSpec {
    std::string title;
    std::string x_column;
    std::string y_column;
    std::string x_label;
    std::string y_label;
    /// Rows are grouped into one line per distinct value of this column.
    std::string series_column;
    std::string series_prefix;
    /// Optional extra line drawn from another column of the first group
    /// (e.g. the unconstrained curve, which does not depend on delta).
    std::optional<std::string> reference_column;
    std::string reference_label;
    /// Optional dotted horizontal guide, e.g. the 50% reduction line.
    std::optional<double> guide;
};

/// Plot specifications matching each experiment's CSV.
PlotSpec plot_spec_for(const std::string& experiment, const std::string& dataset);

/// Static SVG line chart rendered purely from CSV content; identical input
/// gives byte-identical output.
std::string render_line_plot(const CsvTable& table, const PlotSpec& spec);

}  // namespace carisk
