#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "figa/matrix.hpp"
#include "figa/models.hpp"

namespace figa::detail {

// Stateless seed derivation so per-tree / per-repeat streams do not depend on
// evaluation order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Column-wise quantized copy of a (scaled) matrix. Bin b of feature f holds
// values v with cuts[f][b-1] < v <= cuts[f][b].
struct BinnedColumns {
    std::vector<std::vector<double>> cuts;
    std::vector<std::vector<std::uint16_t>> codes;
    std::size_t rows = 0;

    static BinnedColumns build(const Matrix& X, int max_bins);
    std::size_t bins(std::size_t f) const { return cuts[f].size() + 1; }
};

struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> x) const {
        int i = 0;
        while (nodes[i].feature >= 0)
            i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
        return nodes[i].value;
    }

    nlohmann::json to_json() const;
    static Tree from_json(const nlohmann::json& j, std::size_t n_features);
};

struct TreeParams {
    int max_depth = 12;     // 0: unlimited
    int min_leaf = 2;
    int max_features = 0;   // features tried per node; 0: all
};

// Gini classification tree on the given rows (duplicates allowed, as in a
// bootstrap sample). Leaf value is the positive fraction. Adds weighted
// impurity decrease per feature into `importance`.
Tree grow_classification_tree(const BinnedColumns& data, const std::vector<int>& y,
                              std::vector<std::uint32_t> rows, const TreeParams& params,
                              std::mt19937_64& rng, std::vector<double>& importance);

// Second-order regression tree for boosting. Leaf value is
// -G/(H+lambda) scaled by `shrinkage`.
Tree grow_gradient_tree(const BinnedColumns& data, const std::vector<double>& grad,
                        const std::vector<double>& hess, int max_depth, double lambda,
                        double shrinkage, std::vector<double>& importance);

std::unique_ptr<Estimator> fit_logistic_regression(const Matrix& Xs, const std::vector<int>& y,
                                                   const Hyperparameters& hp);
std::unique_ptr<Estimator> fit_decision_tree(const Matrix& Xs, const std::vector<int>& y,
                                             const Hyperparameters& hp, std::uint64_t seed);
std::unique_ptr<Estimator> fit_random_forest(const Matrix& Xs, const std::vector<int>& y,
                                             const Hyperparameters& hp, std::uint64_t seed);
std::unique_ptr<Estimator> fit_boosted_trees(const Matrix& Xs, const std::vector<int>& y,
                                             const Hyperparameters& hp);
std::unique_ptr<Estimator> fit_mlp(const Matrix& Xs, const std::vector<int>& y,
                                   const Hyperparameters& hp, std::uint64_t seed);

std::unique_ptr<Estimator> load_tree_estimator(ModelKind kind, const nlohmann::json& params);
std::unique_ptr<Estimator> load_linear_estimator(ModelKind kind, const nlohmann::json& params);
}  // namespace figa::detail
