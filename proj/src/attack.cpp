#include "figa/attack.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "figa/error.hpp"

namespace figa {

DirectionVector compute_direction(const Dataset& train) {
    const std::size_t p = train.features();
    std::vector<double> sum_input(p, 0.0), sum_target(p, 0.0);
    double n_input = 0, n_target = 0;
    for (std::size_t r = 0; r < train.rows(); ++r) {
        auto& sums = train.y[r] == 1 ? sum_input : sum_target;
        (train.y[r] == 1 ? n_input : n_target) += 1;
        auto row = train.X.row(r);
        for (std::size_t j = 0; j < p; ++j) sums[j] += row[j];
    }
    if (n_input == 0 || n_target == 0) throw RankingError("direction needs both classes present");
    DirectionVector d{std::vector<int>(p, 0)};
    for (std::size_t j = 0; j < p; ++j) {
        double diff = sum_target[j] / n_target - sum_input[j] / n_input;
        d.signs[j] = diff > 0 ? 1 : (diff < 0 ? -1 : 0);
    }
    return d;
}

std::vector<std::size_t> select_features(const FeatureRanking& ranking, const DirectionVector& direction,
                                         const ScalerState& scaler, const FeatureSchema& schema,
                                         const AttackConfig& config) {
    std::set<std::size_t> mask;
    if (config.feature_mask) mask.insert(config.feature_mask->begin(), config.feature_mask->end());
    std::vector<std::size_t> out;
    for (auto f : ranking.order) {
        if (out.size() == config.n) break;
        if (direction[f] == 0) continue;
        if (!schema.feature(f).mutable_) continue;
        if (scaler.range(f).constant()) continue;
        if (config.feature_mask && !mask.contains(f)) continue;
        out.push_back(f);
    }
    if (out.size() < config.n)
        throw SelectionError("requested n=" + std::to_string(config.n) + " features but only " +
                             std::to_string(out.size()) + " are eligible (shortfall " +
                             std::to_string(config.n - out.size()) + ")");
    return out;
}

AttackPlan::AttackPlan(FeatureRanking ranking, DirectionVector direction, AttackConfig config, ScalerState scaler,
                       FeatureSchema schema)
    : ranking_(std::move(ranking)),
      direction_(std::move(direction)),
      config_(std::move(config)),
      scaler_(std::move(scaler)),
      schema_(std::move(schema)) {
    const std::size_t p = schema_.size();
    if (ranking_.order.size() != p || direction_.size() != p || scaler_.size() != p)
        throw ShapeError("ranking, direction, scaler and schema disagree on feature count");
    std::vector<std::size_t> check = ranking_.order;
    std::sort(check.begin(), check.end());
    for (std::size_t i = 0; i < p; ++i)
        if (check[i] != i) throw ShapeError("ranking order is not a permutation of the features");
    for (int s : direction_.signs)
        if (s < -1 || s > 1) throw ShapeError("direction signs must be -1, 0 or +1");
    if (config_.n == 0) throw SelectionError("n must be positive");
    if (!(config_.epsilon >= 0.0) || !std::isfinite(config_.epsilon)) throw SelectionError("epsilon must be >= 0");
    if (config_.feature_mask)
        for (auto f : *config_.feature_mask)
            if (f >= p) throw SelectionError("feature mask index out of range");
    selected_ = select_features(ranking_, direction_, scaler_, schema_, config_);
}

AttackPlan AttackPlan::with(std::size_t n, double epsilon) const {
    AttackConfig c = config_;
    c.n = n;
    c.epsilon = epsilon;
    return AttackPlan(ranking_, direction_, std::move(c), scaler_, schema_);
}

AttackPlan make_plan(const Dataset& train, const AttackConfig& config, const RankingOptions& options) {
    auto ranking = rank_features(train, config.method, options);
    return AttackPlan(std::move(ranking), compute_direction(train), config, fit_scaler(train), train.schema);
}

namespace {

// Restores "exactly one hot" in every one-hot group a selected feature
// touched: the best-ranked member raised to 1 wins; a group left with no hot
// member reverts to the original values.
void rebalance_onehot(std::vector<double>& out, std::span<const double> x, const AttackPlan& plan) {
    const auto& schema = plan.schema();
    std::map<std::string, std::vector<std::size_t>> touched;  // group -> selected members, rank order
    for (auto f : plan.selected())
        if (schema.feature(f).kind == FeatureKind::onehot) touched[schema.feature(f).group].push_back(f);
    for (const auto& [group, selected] : touched) {
        auto members = schema.group_members(group);
        std::optional<std::size_t> winner;
        for (auto f : selected)
            if (out[f] == 1.0 && x[f] != 1.0) {
                winner = f;
                break;
            }
        if (winner) {
            for (auto m : members) out[m] = m == *winner ? 1.0 : 0.0;
            continue;
        }
        int hot = 0;
        for (auto m : members) hot += out[m] == 1.0;
        if (hot != 1)
            for (auto m : members) out[m] = x[m];
    }
}

}  // namespace

std::vector<double> perturb(std::span<const double> x, const AttackPlan& plan) {
    const auto& scaler = plan.scaler();
    if (x.size() != scaler.size()) throw ShapeError("sample length does not match plan");
    std::vector<double> out(x.begin(), x.end());
    if (plan.config().epsilon == 0.0) return out;

    auto scaled = transform(x, scaler);
    const double mass = std::accumulate(scaled.begin(), scaled.end(), 0.0);
    // A negative mass (test values below the training minima) would flip
    // every direction; treat it as an empty budget.
    const double step = std::max(0.0, plan.config().epsilon / static_cast<double>(plan.config().n) * mass);

    for (auto f : plan.selected()) {
        const int d = plan.direction()[f];
        const double u = std::clamp(scaled[f] + step * d, 0.0, 1.0);
        const auto& range = scaler.range(f);
        double v;
        if (u == 1.0) {
            v = range.max;
        } else if (u == 0.0) {
            v = range.min;
        } else {
            v = std::clamp(u * (range.max - range.min) + range.min, range.min, range.max);
        }
        // Discrete values round back toward the original value.
        if (plan.schema().feature(f).is_discrete()) v = d > 0 ? std::floor(v) : std::ceil(v);
        out[f] = v;
    }
    if (plan.config().strict_onehot) rebalance_onehot(out, x, plan);
    return out;
}

Matrix perturb_batch(const Matrix& samples, const AttackPlan& plan) {
    Matrix out(samples.rows(), samples.cols());
    for (std::size_t r = 0; r < samples.rows(); ++r) {
        auto row = perturb(samples.row(r), plan);
        std::copy(row.begin(), row.end(), out.row(r).begin());
    }
    return out;
}

}  // namespace figa
