#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "figa/data.hpp"
#include "figa/matrix.hpp"

namespace figa {

enum class ModelKind { logistic_regression, decision_tree, random_forest, gradient_boosted_trees, mlp };

inline constexpr ModelKind kAllModelKinds[] = {
    ModelKind::logistic_regression, ModelKind::decision_tree, ModelKind::random_forest,
    ModelKind::gradient_boosted_trees, ModelKind::mlp};

std::string to_string(ModelKind kind);
// Accepts the canonical names plus the short forms lr, dt, rf, gbt.
ModelKind parse_model_kind(std::string_view name);

using Hyperparameters = std::map<std::string, double>;

// Defaults per kind. Keys not listed here are rejected by fit().
//   logistic_regression: epochs 500, learning_rate 0.5, l2 1e-4
//   decision_tree:       max_depth 12, min_leaf 2, max_bins 255
//   random_forest:       trees 100, max_depth 0 (unlimited), min_leaf 1, max_bins 255
//   gradient_boosted_trees: trees 100, max_depth 3, learning_rate 0.1, lambda 1, max_bins 255
//   mlp:                 hidden 64, epochs 200, learning_rate 1e-3, batch_size 64
Hyperparameters default_hyperparameters(ModelKind kind);

// Fitted estimator on min-max scaled inputs. Implementations live in src/.
class Estimator {
public:
    virtual ~Estimator() = default;
    // Positive-class score in [0,1] for one scaled sample.
    virtual double score(std::span<const double> scaled) const = 0;
    // Non-negative per-feature importance; used by recursive elimination.
    virtual std::vector<double> feature_importances() const = 0;
    virtual std::string params_json() const = 0;
};

// A defending classifier. Immutable after fit; copies share the fitted state.
// Inputs to predict/predict_score are raw feature rows: the model applies its
// own training-set min-max scaler.
class Model {
public:
    Model() = default;

    bool fitted() const noexcept { return estimator_ != nullptr; }
    ModelKind kind() const noexcept { return kind_; }
    const Hyperparameters& hyperparameters() const noexcept { return hyperparameters_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const ScalerState& scaler() const noexcept { return scaler_; }
    const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }

    double predict_score(std::span<const double> x) const;
    std::vector<double> predict_score(const Matrix& X) const;
    // Threshold at 0.5; a score of exactly 0.5 is positive.
    std::vector<int> predict(const Matrix& X) const;
    int predict(std::span<const double> x) const { return predict_score(x) >= 0.5 ? 1 : 0; }

    std::vector<double> feature_importances() const;

    std::string to_json_text() const;
    static Model from_json_text(std::string_view text);
    void save(const std::filesystem::path& path) const;
    static Model load(const std::filesystem::path& path);

private:
    friend Model fit(ModelKind, const Matrix&, const std::vector<int>&, const Hyperparameters&,
                     std::uint64_t, std::vector<std::string>);

    void require_fitted() const;
    void check_width(std::size_t cols) const;

    ModelKind kind_ = ModelKind::logistic_regression;
    Hyperparameters hyperparameters_;
    std::uint64_t seed_ = 0;
    ScalerState scaler_;
    std::vector<std::string> feature_names_;
    std::shared_ptr<const Estimator> estimator_;
};

// `hyperparameters` overrides the defaults key by key.
Model fit(ModelKind kind, const Matrix& X, const std::vector<int>& y,
          const Hyperparameters& hyperparameters, std::uint64_t seed,
          std::vector<std::string> feature_names = {});
Model fit(ModelKind kind, const Dataset& train, const Hyperparameters& hyperparameters = {},
          std::uint64_t seed = 0);

}  // namespace figa
