#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "figa/eval.hpp"

namespace figa {

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Best grid cell per model: the record with the highest success rate among
// cells with epsilon <= max_epsilon (first one wins on ties).
struct SummaryRow {
    ModelKind model;
    double baseline_recall;
    double attack_recall;
    double success_rate;
    std::size_t n;
    double epsilon;
    RankingMethod method;
};

std::vector<SummaryRow> summarize(const GridResult& grid, std::optional<double> max_epsilon = std::nullopt);

// Columns: model,baseline_recall,attack_recall,success_rate,n,epsilon,method
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

// Columns: <axis>,success_rate,method,n,epsilon,attack_recall
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve, CurveAxis axis);

// One line per model on a shared axis.
std::string render_curve_svg(const GridResult& grid, CurveAxis axis);

// Per-model curve CSVs for the n, epsilon and method axes, one SVG chart per
// axis and summary.csv. Returns the written paths. Throws MetricError on an
// empty grid.
std::vector<std::filesystem::path> emit_report(const GridResult& grid, const std::filesystem::path& out_dir);

}  // namespace figa
