#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "figa/attack.hpp"
#include "figa/data.hpp"
#include "figa/models.hpp"

namespace figa {

// True positives over actual positives.
double recall(std::span<const int> predicted, std::span<const int> y);
double recall(const Model& model, const Matrix& X, std::span<const int> y);

// (baseline - attack) / baseline. Negative when the attack helps the detector.
double success_rate(double baseline_recall, double attack_recall);

// Area under the precision-recall step curve (average precision): a
// descending-score sweep where tied scores form a single threshold.
double auprc(std::span<const double> scores, std::span<const int> y);

struct EvaluationReport {
    ModelKind model = ModelKind::logistic_regression;
    AttackConfig config;
    std::vector<std::size_t> selected;
    double baseline_recall = 0.0;
    double attack_recall = 0.0;
    double success_rate = 0.0;
    double auprc_baseline = 0.0;
    double auprc_attack = 0.0;
};

// Perturbs every input-class test row (false negatives included); target-class
// rows are left as they are.
EvaluationReport evaluate_attack(const Model& model, const Dataset& test, const AttackPlan& plan);

// `steps` evenly spaced values including both endpoints.
std::vector<double> linspace(double lo, double hi, std::size_t steps);

struct GridSpec {
    std::vector<std::size_t> n_values;
    std::vector<double> epsilon_values;  // ascending
    std::vector<RankingMethod> methods;
    std::vector<ModelKind> models;

    void validate() const;
};

struct GridRecord {
    ModelKind model;
    RankingMethod method;
    std::size_t n;
    double epsilon;
    double baseline_recall;
    double attack_recall;
    double success_rate;

    friend bool operator==(const GridRecord&, const GridRecord&) = default;
};

struct GridResult {
    // Sorted by (model, method, n, epsilon) in GridSpec order.
    std::vector<GridRecord> records;

    std::vector<GridRecord> for_model(ModelKind model) const;
};

struct GridOptions {
    std::uint64_t seed = 0;
    RankingOptions ranking;  // its seed is overridden by `seed`
    std::map<ModelKind, Hyperparameters> hyperparameters;
    std::size_t workers = 1;
    // Restricts perturbation to these features (e.g. problem-space addable ones).
    std::optional<std::vector<std::size_t>> feature_mask;
    // Records are appended here as they complete; existing rows are reused so
    // an interrupted search resumes.
    std::optional<std::filesystem::path> checkpoint;
};

GridResult grid_search(const Dataset& train, const Dataset& test, const GridSpec& spec,
                       const GridOptions& options = {});

// Columns: model,method,n,epsilon,baseline_recall,attack_recall,success_rate
void write_grid_csv(std::ostream& out, const GridResult& grid);
GridResult read_grid_csv(std::istream& in);

enum class CurveAxis { n, epsilon, method };
CurveAxis parse_curve_axis(std::string_view name);
std::string to_string(CurveAxis axis);

struct CurvePoint {
    std::string label;  // axis value as text
    double x = 0.0;     // numeric axis value; method index for the method axis
    double success_rate = 0.0;
    GridRecord best;    // arg-max record for this axis value
};

// Maximum success rate per distinct axis value, over all other grid
// parameters, for one model.
std::vector<CurvePoint> max_success_curve(const GridResult& grid, CurveAxis axis, ModelKind model);

}  // namespace figa
