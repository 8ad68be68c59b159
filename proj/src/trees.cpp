#include <algorithm>
#include <cmath>
#include <numeric>

#include "estimators.hpp"
#include "figa/error.hpp"

namespace figa::detail {

using nlohmann::json;

BinnedColumns BinnedColumns::build(const Matrix& X, int max_bins) {
    if (max_bins < 2 || max_bins > 65535) throw FitError("max_bins must lie in [2, 65535]");
    BinnedColumns out;
    out.rows = X.rows();
    out.cuts.resize(X.cols());
    out.codes.resize(X.cols());
    std::vector<double> sorted;
    for (std::size_t f = 0; f < X.cols(); ++f) {
        sorted = X.column(f);
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> uniq;
        std::vector<std::size_t> counts;
        for (double v : sorted) {
            if (uniq.empty() || v != uniq.back()) {
                uniq.push_back(v);
                counts.push_back(0);
            }
            ++counts.back();
        }
        auto& cuts = out.cuts[f];
        if (uniq.size() <= static_cast<std::size_t>(max_bins)) {
            for (std::size_t i = 0; i + 1 < uniq.size(); ++i) cuts.push_back(0.5 * (uniq[i] + uniq[i + 1]));
        } else {
            // Equal-frequency cuts placed between distinct values.
            double per_bin = static_cast<double>(sorted.size()) / max_bins;
            std::size_t cumulative = 0;
            for (std::size_t i = 0; i + 1 < uniq.size(); ++i) {
                cumulative += counts[i];
                if (static_cast<double>(cumulative) >= per_bin * static_cast<double>(cuts.size() + 1) &&
                    static_cast<int>(cuts.size()) < max_bins - 1)
                    cuts.push_back(0.5 * (uniq[i] + uniq[i + 1]));
            }
        }
        auto& codes = out.codes[f];
        codes.resize(X.rows());
        for (std::size_t r = 0; r < X.rows(); ++r) {
            auto it = std::lower_bound(cuts.begin(), cuts.end(), X(r, f));
            codes[r] = static_cast<std::uint16_t>(it - cuts.begin());
        }
    }
    return out;
}

json Tree::to_json() const {
    std::vector<int> feature, left, right;
    std::vector<double> threshold, value;
    for (const auto& n : nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        value.push_back(n.value);
    }
    return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}};
}

Tree Tree::from_json(const json& j, std::size_t n_features) {
    auto feature = j.at("feature").get<std::vector<int>>();
    auto threshold = j.at("threshold").get<std::vector<double>>();
    auto left = j.at("left").get<std::vector<int>>();
    auto right = j.at("right").get<std::vector<int>>();
    auto value = j.at("value").get<std::vector<double>>();
    std::size_t n = feature.size();
    if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || value.size() != n)
        throw FitError("malformed tree");
    Tree t;
    t.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i]};
        if (feature[i] >= static_cast<int>(n_features)) throw FitError("tree feature index out of range");
        if (feature[i] >= 0) {
            auto ok = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(n); };
            if (!ok(left[i]) || !ok(right[i])) throw FitError("malformed tree links");
        }
    }
    return t;
}

namespace {

double gini(double pos, double n) {
    if (n <= 0) return 0.0;
    double p = pos / n;
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct ClassGrower {
    const BinnedColumns& data;
    const std::vector<int>& y;
    const TreeParams& params;
    std::mt19937_64& rng;
    std::vector<double>& importance;
    Tree tree;
    std::vector<double> hist_n, hist_pos;
    std::vector<std::size_t> features;

    int grow(std::vector<std::uint32_t>& rows, int depth) {
        double n = static_cast<double>(rows.size());
        double pos = 0;
        for (auto r : rows) pos += y[r];
        int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({-1, 0.0, -1, -1, n > 0 ? pos / n : 0.0});

        bool depth_ok = params.max_depth <= 0 || depth < params.max_depth;
        if (!depth_ok || pos == 0 || pos == n || rows.size() < 2 * static_cast<std::size_t>(params.min_leaf))
            return id;

        std::size_t p = data.cuts.size();
        std::vector<std::size_t> candidates;
        if (params.max_features > 0 && static_cast<std::size_t>(params.max_features) < p) {
            std::iota(features.begin(), features.end(), 0);
            for (int k = 0; k < params.max_features; ++k) {
                std::uniform_int_distribution<std::size_t> pick(k, p - 1);
                std::swap(features[k], features[pick(rng)]);
            }
            candidates.assign(features.begin(), features.begin() + params.max_features);
            std::sort(candidates.begin(), candidates.end());
        } else {
            candidates.resize(p);
            std::iota(candidates.begin(), candidates.end(), 0);
        }

        double parent = gini(pos, n);
        double best = -1.0;
        int best_f = -1;
        std::size_t best_bin = 0;
        for (auto f : candidates) {
            std::size_t nb = data.bins(f);
            if (nb < 2) continue;
            hist_n.assign(nb, 0.0);
            hist_pos.assign(nb, 0.0);
            const auto& codes = data.codes[f];
            for (auto r : rows) {
                hist_n[codes[r]] += 1.0;
                hist_pos[codes[r]] += y[r];
            }
            double ln = 0, lp = 0;
            for (std::size_t b = 0; b + 1 < nb; ++b) {
                ln += hist_n[b];
                lp += hist_pos[b];
                double rn = n - ln;
                if (ln < params.min_leaf) continue;
                if (rn < params.min_leaf) break;
                if (hist_n[b] == 0 && b > 0) continue;  // same partition as previous bin
                double decrease = parent - (ln / n) * gini(lp, ln) - (rn / n) * gini(pos - lp, rn);
                if (decrease > best + 1e-15) {
                    best = decrease;
                    best_f = static_cast<int>(f);
                    best_bin = b;
                }
            }
        }
        if (best_f < 0) return id;

        const auto& codes = data.codes[best_f];
        std::vector<std::uint32_t> left, right;
        for (auto r : rows) (codes[r] <= best_bin ? left : right).push_back(r);
        if (left.empty() || right.empty()) return id;
        rows.clear();
        rows.shrink_to_fit();

        importance[best_f] += n * std::max(best, 0.0);
        tree.nodes[id].feature = best_f;
        tree.nodes[id].threshold = data.cuts[best_f][best_bin];
        int l = grow(left, depth + 1);
        int r = grow(right, depth + 1);
        tree.nodes[id].left = l;
        tree.nodes[id].right = r;
        return id;
    }
};

struct GradGrower {
    const BinnedColumns& data;
    const std::vector<double>& grad;
    const std::vector<double>& hess;
    int max_depth;
    double lambda;
    double shrinkage;
    std::vector<double>& importance;
    Tree tree;
    std::vector<double> hg, hh, hn;

    int grow(std::vector<std::uint32_t>& rows, int depth) {
        double G = 0, H = 0;
        for (auto r : rows) {
            G += grad[r];
            H += hess[r];
        }
        int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({-1, 0.0, -1, -1, -G / (H + lambda) * shrinkage});
        if (depth >= max_depth || rows.size() < 2) return id;

        double parent = G * G / (H + lambda);
        double best = 1e-12;
        int best_f = -1;
        std::size_t best_bin = 0;
        for (std::size_t f = 0; f < data.cuts.size(); ++f) {
            std::size_t nb = data.bins(f);
            if (nb < 2) continue;
            hg.assign(nb, 0.0);
            hh.assign(nb, 0.0);
            hn.assign(nb, 0.0);
            const auto& codes = data.codes[f];
            for (auto r : rows) {
                hg[codes[r]] += grad[r];
                hh[codes[r]] += hess[r];
                hn[codes[r]] += 1.0;
            }
            double lg = 0, lh = 0, ln = 0;
            double n = static_cast<double>(rows.size());
            for (std::size_t b = 0; b + 1 < nb; ++b) {
                lg += hg[b];
                lh += hh[b];
                ln += hn[b];
                if (ln == 0) continue;
                if (ln == n) break;
                if (hn[b] == 0) continue;
                double gain = lg * lg / (lh + lambda) + (G - lg) * (G - lg) / (H - lh + lambda) - parent;
                if (gain > best) {
                    best = gain;
                    best_f = static_cast<int>(f);
                    best_bin = b;
                }
            }
        }
        if (best_f < 0) return id;
        const auto& codes = data.codes[best_f];
        std::vector<std::uint32_t> left, right;
        for (auto r : rows) (codes[r] <= best_bin ? left : right).push_back(r);
        importance[best_f] += best;
        tree.nodes[id].feature = best_f;
        tree.nodes[id].threshold = data.cuts[best_f][best_bin];
        int l = grow(left, depth + 1);
        int r = grow(right, depth + 1);
        tree.nodes[id].left = l;
        tree.nodes[id].right = r;
        return id;
    }
};

std::vector<double> normalized(std::vector<double> v) {
    double total = std::accumulate(v.begin(), v.end(), 0.0);
    if (total > 0)
        for (auto& x : v) x /= total;
    return v;
}

json importances_json(const std::vector<double>& v) { return v; }

int hp_int(const Hyperparameters& hp, const char* key) { return static_cast<int>(std::lround(hp.at(key))); }

class DecisionTreeEstimator final : public Estimator {
public:
    DecisionTreeEstimator(Tree tree, std::vector<double> importance)
        : tree_(std::move(tree)), importance_(std::move(importance)) {}

    double score(std::span<const double> x) const override { return tree_.predict(x); }
    std::vector<double> feature_importances() const override { return importance_; }
    std::string params_json() const override {
        return json{{"tree", tree_.to_json()}, {"importance", importances_json(importance_)}}.dump();
    }

private:
    Tree tree_;
    std::vector<double> importance_;
};

class RandomForestEstimator final : public Estimator {
public:
    RandomForestEstimator(std::vector<Tree> trees, std::vector<double> importance)
        : trees_(std::move(trees)), importance_(std::move(importance)) {}

    // Fraction of trees voting positive.
    double score(std::span<const double> x) const override {
        std::size_t votes = 0;
        for (const auto& t : trees_) votes += t.predict(x) >= 0.5;
        return static_cast<double>(votes) / static_cast<double>(trees_.size());
    }
    std::vector<double> feature_importances() const override { return importance_; }
    std::string params_json() const override {
        json trees = json::array();
        for (const auto& t : trees_) trees.push_back(t.to_json());
        return json{{"trees", trees}, {"importance", importances_json(importance_)}}.dump();
    }

private:
    std::vector<Tree> trees_;
    std::vector<double> importance_;
};

class BoostedTreesEstimator final : public Estimator {
public:
    BoostedTreesEstimator(double base, std::vector<Tree> trees, std::vector<double> importance)
        : base_(base), trees_(std::move(trees)), importance_(std::move(importance)) {}

    double score(std::span<const double> x) const override {
        double margin = base_;
        for (const auto& t : trees_) margin += t.predict(x);
        return 1.0 / (1.0 + std::exp(-margin));
    }
    std::vector<double> feature_importances() const override { return importance_; }
    std::string params_json() const override {
        json trees = json::array();
        for (const auto& t : trees_) trees.push_back(t.to_json());
        return json{{"base_margin", base_}, {"trees", trees}, {"importance", importances_json(importance_)}}.dump();
    }

private:
    double base_;
    std::vector<Tree> trees_;
    std::vector<double> importance_;
};

std::vector<std::uint32_t> all_rows(std::size_t n) {
    std::vector<std::uint32_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0u);
    return rows;
}

}  // namespace

Tree grow_classification_tree(const BinnedColumns& data, const std::vector<int>& y,
                              std::vector<std::uint32_t> rows, const TreeParams& params,
                              std::mt19937_64& rng, std::vector<double>& importance) {
    ClassGrower g{data, y, params, rng, importance, {}, {}, {}, std::vector<std::size_t>(data.cuts.size())};
    g.grow(rows, 0);
    return std::move(g.tree);
}

Tree grow_gradient_tree(const BinnedColumns& data, const std::vector<double>& grad,
                        const std::vector<double>& hess, int max_depth, double lambda,
                        double shrinkage, std::vector<double>& importance) {
    GradGrower g{data, grad, hess, max_depth, lambda, shrinkage, importance, {}, {}, {}, {}};
    auto rows = all_rows(data.rows);
    g.grow(rows, 0);
    return std::move(g.tree);
}

std::unique_ptr<Estimator> fit_decision_tree(const Matrix& Xs, const std::vector<int>& y,
                                             const Hyperparameters& hp, std::uint64_t seed) {
    auto data = BinnedColumns::build(Xs, hp_int(hp, "max_bins"));
    TreeParams params{hp_int(hp, "max_depth"), std::max(1, hp_int(hp, "min_leaf")), 0};
    std::mt19937_64 rng(seed);
    std::vector<double> importance(Xs.cols(), 0.0);
    auto tree = grow_classification_tree(data, y, all_rows(Xs.rows()), params, rng, importance);
    return std::make_unique<DecisionTreeEstimator>(std::move(tree), normalized(std::move(importance)));
}

std::unique_ptr<Estimator> fit_random_forest(const Matrix& Xs, const std::vector<int>& y,
                                             const Hyperparameters& hp, std::uint64_t seed) {
    auto data = BinnedColumns::build(Xs, hp_int(hp, "max_bins"));
    int n_trees = hp_int(hp, "trees");
    if (n_trees < 1) throw FitError("random forest needs at least one tree");
    int max_features = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(Xs.cols())))));
    TreeParams params{hp_int(hp, "max_depth"), std::max(1, hp_int(hp, "min_leaf")), max_features};
    std::vector<double> importance(Xs.cols(), 0.0);
    std::vector<Tree> trees;
    trees.reserve(n_trees);
    const auto n = static_cast<std::uint32_t>(Xs.rows());
    for (int t = 0; t < n_trees; ++t) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::uniform_int_distribution<std::uint32_t> pick(0, n - 1);
        std::vector<std::uint32_t> rows(n);
        for (auto& r : rows) r = pick(rng);
        trees.push_back(grow_classification_tree(data, y, std::move(rows), params, rng, importance));
    }
    return std::make_unique<RandomForestEstimator>(std::move(trees), normalized(std::move(importance)));
}

std::unique_ptr<Estimator> fit_boosted_trees(const Matrix& Xs, const std::vector<int>& y,
                                             const Hyperparameters& hp) {
    auto data = BinnedColumns::build(Xs, hp_int(hp, "max_bins"));
    int n_trees = hp_int(hp, "trees");
    int depth = hp_int(hp, "max_depth");
    double lr = hp.at("learning_rate");
    double lambda = hp.at("lambda");
    std::size_t n = Xs.rows();
    double pos = std::accumulate(y.begin(), y.end(), 0.0);
    double prior = pos / static_cast<double>(n);
    double base = std::log(prior / (1.0 - prior));

    std::vector<double> margin(n, base), grad(n), hess(n);
    std::vector<double> importance(Xs.cols(), 0.0);
    std::vector<Tree> trees;
    for (int t = 0; t < n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            double p = 1.0 / (1.0 + std::exp(-margin[i]));
            grad[i] = p - y[i];
            hess[i] = std::max(p * (1.0 - p), 1e-12);
        }
        auto tree = grow_gradient_tree(data, grad, hess, depth, lambda, lr, importance);
        for (std::size_t i = 0; i < n; ++i) margin[i] += tree.predict(Xs.row(i));
        trees.push_back(std::move(tree));
    }
    return std::make_unique<BoostedTreesEstimator>(base, std::move(trees), normalized(std::move(importance)));
}

std::unique_ptr<Estimator> load_tree_estimator(ModelKind kind, const json& params) {
    auto importance = params.at("importance").get<std::vector<double>>();
    switch (kind) {
    case ModelKind::decision_tree:
        return std::make_unique<DecisionTreeEstimator>(Tree::from_json(params.at("tree"), importance.size()), std::move(importance));
    case ModelKind::random_forest: {
        std::vector<Tree> trees;
        for (const auto& t : params.at("trees")) trees.push_back(Tree::from_json(t, importance.size()));
        if (trees.empty()) throw FitError("forest without trees");
        return std::make_unique<RandomForestEstimator>(std::move(trees), std::move(importance));
    }
    case ModelKind::gradient_boosted_trees: {
        std::vector<Tree> trees;
        for (const auto& t : params.at("trees")) trees.push_back(Tree::from_json(t, importance.size()));
        return std::make_unique<BoostedTreesEstimator>(params.at("base_margin").get<double>(), std::move(trees),
                                                       std::move(importance));
    }
    default:
        throw FitError("not a tree model");
    }
}

}  // namespace figa::detail
