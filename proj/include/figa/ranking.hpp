#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "figa/data.hpp"
#include "figa/models.hpp"

namespace figa {

enum class RankingMethod { info_gain_ratio, gini_impurity, permutation, rfe, ffs };

inline constexpr RankingMethod kAllRankingMethods[] = {
    RankingMethod::info_gain_ratio, RankingMethod::gini_impurity, RankingMethod::permutation,
    RankingMethod::rfe, RankingMethod::ffs};

std::string to_string(RankingMethod method);
// Canonical names plus aliases: igr, info_gain, gini, perm.
RankingMethod parse_ranking_method(std::string_view name);

struct FeatureRanking {
    std::vector<std::size_t> order;  // best first
    std::vector<double> scores;      // indexed by feature
    RankingMethod method = RankingMethod::gini_impurity;
};

// Sorts by score descending; equal scores keep the lower index first.
std::vector<std::size_t> order_by_score(std::span<const double> scores);

// Impurity reduction of the best binary split of one feature. Candidate
// thresholds are the midpoints between consecutive distinct values; one-hot
// columns split by membership.
double gini_gain(const Dataset& train, std::size_t feature);
// Entropy reduction (bits) of the split that maximizes it.
double info_gain(const Dataset& train, std::size_t feature);
// info_gain of the best split divided by that split's entropy; 0 when the
// split entropy is 0.
double info_gain_ratio(const Dataset& train, std::size_t feature);

// Mean drop in holdout recall over `repeats` shuffles of each column.
std::vector<double> permutation_importance(const Dataset& holdout, const Model& probe_model,
                                           int repeats, std::uint64_t seed);

// Recursive elimination: repeatedly fits `estimator` and drops the feature
// with the least importance. The last survivor ranks first.
FeatureRanking rfe_rank(const Dataset& train, ModelKind estimator, std::uint64_t seed,
                        const Hyperparameters& hyperparameters = {});

// Greedy forward selection by holdout recall.
FeatureRanking ffs_rank(const Dataset& train, const Dataset& holdout, ModelKind estimator,
                        std::uint64_t seed, const Hyperparameters& hyperparameters = {});

struct RankingOptions {
    std::uint64_t seed = 0;
    int permutation_repeats = 5;
    ModelKind permutation_probe = ModelKind::random_forest;
    ModelKind rfe_estimator = ModelKind::decision_tree;
    ModelKind ffs_estimator = ModelKind::logistic_regression;
    Hyperparameters permutation_probe_hyperparameters;
    Hyperparameters rfe_hyperparameters;
    Hyperparameters ffs_hyperparameters;
    // Methods that need a holdout carve it out of `train` with this fraction.
    double holdout_fraction = 0.2;
};

FeatureRanking rank_features(const Dataset& train, RankingMethod method, const RankingOptions& options = {});

}  // namespace figa
