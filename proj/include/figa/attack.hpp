#pragma once

#include <optional>
#include <span>
#include <vector>

#include "figa/data.hpp"
#include "figa/ranking.hpp"

namespace figa {

// Per-feature sign in {-1, 0, +1}: the way an input-class sample must move
// to approach the target-class mean.
struct DirectionVector {
    std::vector<int> signs;

    std::size_t size() const noexcept { return signs.size(); }
    int operator[](std::size_t i) const { return signs.at(i); }
    friend bool operator==(const DirectionVector&, const DirectionVector&) = default;
};

struct AttackConfig {
    std::size_t n = 1;       // features to perturb
    double epsilon = 0.0;    // budget as a fraction of the sample's scaled feature mass
    RankingMethod method = RankingMethod::gini_impurity;
    std::optional<std::vector<std::size_t>> feature_mask;  // allowed feature indices
    // Keep one-hot groups at exactly one hot after perturbation. Off by default:
    // members are perturbed as independent binary columns.
    bool strict_onehot = false;
};

// sign(mean over target-class rows - mean over input-class rows); 0 on ties.
DirectionVector compute_direction(const Dataset& train);

// Everything the perturbation needs. Immutable; construction validates sizes
// and resolves the selected features (throws SelectionError on a shortfall).
class AttackPlan {
public:
    AttackPlan(FeatureRanking ranking, DirectionVector direction, AttackConfig config, ScalerState scaler,
               FeatureSchema schema);

    const FeatureRanking& ranking() const noexcept { return ranking_; }
    const DirectionVector& direction() const noexcept { return direction_; }
    const AttackConfig& config() const noexcept { return config_; }
    const ScalerState& scaler() const noexcept { return scaler_; }
    const FeatureSchema& schema() const noexcept { return schema_; }
    // Top-n eligible features, best first.
    const std::vector<std::size_t>& selected() const noexcept { return selected_; }

    // Same ranking/direction/scaler with a different (n, epsilon).
    AttackPlan with(std::size_t n, double epsilon) const;

private:
    FeatureRanking ranking_;
    DirectionVector direction_;
    AttackConfig config_;
    ScalerState scaler_;
    FeatureSchema schema_;
    std::vector<std::size_t> selected_;
};

// Ranks `train`, computes the direction and the scaler, and resolves selection.
AttackPlan make_plan(const Dataset& train, const AttackConfig& config, const RankingOptions& options = {});

// Top-n of the ranking after dropping zero-direction, immutable, constant and
// masked-out features.
std::vector<std::size_t> select_features(const FeatureRanking& ranking, const DirectionVector& direction,
                                         const ScalerState& scaler, const FeatureSchema& schema,
                                         const AttackConfig& config);
inline const std::vector<std::size_t>& select_features(const AttackPlan& plan) { return plan.selected(); }

// One-shot perturbation of a raw sample. Unselected features are copied
// unchanged (unless strict_onehot rebalances a touched group).
std::vector<double> perturb(std::span<const double> x, const AttackPlan& plan);

Matrix perturb_batch(const Matrix& samples, const AttackPlan& plan);

}  // namespace figa
