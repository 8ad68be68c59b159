#include "figa/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "estimators.hpp"
#include "figa/error.hpp"

namespace figa {

std::string to_string(RankingMethod method) {
    switch (method) {
    case RankingMethod::info_gain_ratio: return "info_gain_ratio";
    case RankingMethod::gini_impurity: return "gini_impurity";
    case RankingMethod::permutation: return "permutation";
    case RankingMethod::rfe: return "rfe";
    case RankingMethod::ffs: return "ffs";
    }
    return "?";
}

RankingMethod parse_ranking_method(std::string_view name) {
    if (name == "info_gain_ratio" || name == "igr" || name == "info_gain") return RankingMethod::info_gain_ratio;
    if (name == "gini_impurity" || name == "gini") return RankingMethod::gini_impurity;
    if (name == "permutation" || name == "perm") return RankingMethod::permutation;
    if (name == "rfe") return RankingMethod::rfe;
    if (name == "ffs") return RankingMethod::ffs;
    throw Error("unknown ranking method: " + std::string(name));
}

std::vector<std::size_t> order_by_score(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

namespace {

double gini_impurity(double pos, double n) {
    if (n <= 0) return 0.0;
    double p = pos / n;
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

double entropy_bits(double a, double n) {
    double h = 0.0;
    for (double c : {a, n - a}) {
        if (c > 0) {
            double p = c / n;
            h -= p * std::log2(p);
        }
    }
    return h;
}

// Candidate binary splits of one column: for each boundary between distinct
// sorted values, the left size and left positive count.
struct SplitScan {
    double n = 0;
    double pos = 0;
    std::vector<std::pair<double, double>> candidates;  // (left_n, left_pos)
};

SplitScan scan_splits(const Dataset& train, std::size_t feature) {
    if (feature >= train.features()) throw RankingError("feature index out of range");
    std::vector<std::size_t> idx(train.rows());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return train.X(a, feature) < train.X(b, feature); });
    SplitScan scan;
    scan.n = static_cast<double>(idx.size());
    for (auto i : idx) scan.pos += train.y[i];
    double ln = 0, lp = 0;
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        ln += 1;
        lp += train.y[idx[k]];
        if (train.X(idx[k], feature) != train.X(idx[k + 1], feature)) scan.candidates.emplace_back(ln, lp);
    }
    return scan;
}

struct BestInfoSplit {
    double gain = 0.0;
    double split_entropy = 0.0;
};

BestInfoSplit best_info_split(const Dataset& train, std::size_t feature) {
    auto scan = scan_splits(train, feature);
    double parent = entropy_bits(scan.pos, scan.n);
    BestInfoSplit best;
    bool found = false;
    for (auto [ln, lp] : scan.candidates) {
        double rn = scan.n - ln;
        double child = (ln / scan.n) * entropy_bits(lp, ln) + (rn / scan.n) * entropy_bits(scan.pos - lp, rn);
        double gain = parent - child;
        if (!found || gain > best.gain + 1e-12) {
            found = true;
            best.gain = gain;
            best.split_entropy = entropy_bits(ln, scan.n);
        }
    }
    best.gain = std::max(best.gain, 0.0);
    return best;
}

void require_both_classes(const Dataset& d, const char* who) {
    auto pos = d.count(1);
    if (pos == 0 || pos == d.rows()) throw RankingError(std::string(who) + " needs both classes present");
}

double holdout_recall(const Model& model, const Matrix& X, const std::vector<int>& y) {
    auto pred = model.predict(X);
    double tp = 0, p = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 1) {
            p += 1;
            tp += pred[i];
        }
    }
    if (p == 0) throw RankingError("holdout has no input-class rows");
    return tp / p;
}

std::vector<std::string> names_of(const Dataset& d, std::span<const std::size_t> cols) {
    std::vector<std::string> out;
    for (auto c : cols) out.push_back(d.schema.feature(c).name);
    return out;
}

}  // namespace

double gini_gain(const Dataset& train, std::size_t feature) {
    auto scan = scan_splits(train, feature);
    double parent = gini_impurity(scan.pos, scan.n);
    double best = 0.0;
    for (auto [ln, lp] : scan.candidates) {
        double rn = scan.n - ln;
        double child = (ln / scan.n) * gini_impurity(lp, ln) + (rn / scan.n) * gini_impurity(scan.pos - lp, rn);
        best = std::max(best, parent - child);
    }
    return best;
}

double info_gain(const Dataset& train, std::size_t feature) { return best_info_split(train, feature).gain; }

double info_gain_ratio(const Dataset& train, std::size_t feature) {
    auto best = best_info_split(train, feature);
    if (best.split_entropy <= 0.0) return 0.0;
    return best.gain / best.split_entropy;
}

std::vector<double> permutation_importance(const Dataset& holdout, const Model& probe_model, int repeats,
                                           std::uint64_t seed) {
    if (!probe_model.fitted()) throw FitError("permutation importance needs a fitted probe model");
    if (repeats < 1) throw RankingError("repeats must be positive");
    const double baseline = holdout_recall(probe_model, holdout.X, holdout.y);
    std::vector<double> scores(holdout.features(), 0.0);
    Matrix shuffled = holdout.X;
    std::vector<double> column;
    for (std::size_t f = 0; f < holdout.features(); ++f) {
        column = holdout.X.column(f);
        double total = 0.0;
        for (int rep = 0; rep < repeats; ++rep) {
            std::mt19937_64 rng(detail::derive_seed(seed, f * static_cast<std::uint64_t>(repeats) + rep));
            auto perm = column;
            std::shuffle(perm.begin(), perm.end(), rng);
            for (std::size_t r = 0; r < shuffled.rows(); ++r) shuffled(r, f) = perm[r];
            total += baseline - holdout_recall(probe_model, shuffled, holdout.y);
        }
        for (std::size_t r = 0; r < shuffled.rows(); ++r) shuffled(r, f) = column[r];
        scores[f] = total / repeats;
    }
    return scores;
}

FeatureRanking rfe_rank(const Dataset& train, ModelKind estimator, std::uint64_t seed,
                        const Hyperparameters& hyperparameters) {
    const std::size_t p = train.features();
    if (p == 0) throw RankingError("ranking needs at least one feature");
    require_both_classes(train, "recursive feature elimination");

    std::vector<std::size_t> active(p);
    std::iota(active.begin(), active.end(), 0);
    std::vector<std::size_t> eliminated;
    while (active.size() > 1) {
        auto model = fit(estimator, train.X.select_cols(active), train.y, hyperparameters, seed,
                         names_of(train, active));
        auto importance = model.feature_importances();
        // Least important goes; among ties the higher index goes first.
        std::size_t worst = 0;
        for (std::size_t k = 1; k < active.size(); ++k)
            if (importance[k] <= importance[worst]) worst = k;
        eliminated.push_back(active[worst]);
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    eliminated.push_back(active.front());

    FeatureRanking ranking{{eliminated.rbegin(), eliminated.rend()}, std::vector<double>(p), RankingMethod::rfe};
    // Score = number of features that were eliminated before this one.
    for (std::size_t step = 0; step < eliminated.size(); ++step)
        ranking.scores[eliminated[step]] = static_cast<double>(step);
    return ranking;
}

FeatureRanking ffs_rank(const Dataset& train, const Dataset& holdout, ModelKind estimator, std::uint64_t seed,
                        const Hyperparameters& hyperparameters) {
    const std::size_t p = train.features();
    if (p == 0) throw RankingError("ranking needs at least one feature");
    if (holdout.features() != p) throw ShapeError("holdout width does not match train");
    require_both_classes(train, "forward feature selection");

    std::vector<std::size_t> selected;
    std::vector<std::size_t> remaining(p);
    std::iota(remaining.begin(), remaining.end(), 0);
    std::vector<double> last_score(p, 0.0);
    double current = 0.0;  // null model detects nothing

    while (!remaining.empty()) {
        std::size_t best_k = 0;
        double best = -1.0;
        for (std::size_t k = 0; k < remaining.size(); ++k) {
            auto cols = selected;
            cols.push_back(remaining[k]);
            auto model = fit(estimator, train.X.select_cols(cols), train.y, hyperparameters, seed, names_of(train, cols));
            double r = holdout_recall(model, holdout.X.select_cols(cols), holdout.y);
            last_score[remaining[k]] = r;
            if (r > best) {
                best = r;
                best_k = k;
            }
        }
        if (best - current <= 0.0) break;
        current = best;
        selected.push_back(remaining[best_k]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_k));
    }

    FeatureRanking ranking{selected, {}, RankingMethod::ffs};
    std::stable_sort(remaining.begin(), remaining.end(),
                     [&](std::size_t a, std::size_t b) { return last_score[a] > last_score[b]; });
    ranking.order.insert(ranking.order.end(), remaining.begin(), remaining.end());
    // Scores encode the final order: p for the first feature down to 1.
    ranking.scores.assign(p, 0.0);
    for (std::size_t pos = 0; pos < ranking.order.size(); ++pos)
        ranking.scores[ranking.order[pos]] = static_cast<double>(p - pos);
    return ranking;
}

FeatureRanking rank_features(const Dataset& train, RankingMethod method, const RankingOptions& options) {
    if (train.features() == 0) throw RankingError("ranking needs at least one feature");
    require_both_classes(train, "ranking");

    FeatureRanking ranking;
    ranking.method = method;
    switch (method) {
    case RankingMethod::gini_impurity:
    case RankingMethod::info_gain_ratio:
        ranking.scores.resize(train.features());
        for (std::size_t f = 0; f < train.features(); ++f)
            ranking.scores[f] = method == RankingMethod::gini_impurity ? gini_gain(train, f) : info_gain_ratio(train, f);
        ranking.order = order_by_score(ranking.scores);
        return ranking;
    case RankingMethod::permutation: {
        auto [fit_part, holdout] = split(train, 1.0 - options.holdout_fraction, options.seed);
        auto probe = fit(options.permutation_probe, fit_part, options.permutation_probe_hyperparameters, options.seed);
        ranking.scores = permutation_importance(holdout, probe, options.permutation_repeats, options.seed);
        ranking.order = order_by_score(ranking.scores);
        return ranking;
    }
    case RankingMethod::rfe:
        return rfe_rank(train, options.rfe_estimator, options.seed, options.rfe_hyperparameters);
    case RankingMethod::ffs: {
        auto [fit_part, holdout] = split(train, 1.0 - options.holdout_fraction, options.seed);
        return ffs_rank(fit_part, holdout, options.ffs_estimator, options.seed, options.ffs_hyperparameters);
    }
    }
    return ranking;
}

}  // namespace figa
