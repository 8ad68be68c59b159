#include "figa/models.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "estimators.hpp"
#include "figa/error.hpp"

namespace figa {

using nlohmann::json;

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::logistic_regression: return "logistic_regression";
    case ModelKind::decision_tree: return "decision_tree";
    case ModelKind::random_forest: return "random_forest";
    case ModelKind::gradient_boosted_trees: return "gradient_boosted_trees";
    case ModelKind::mlp: return "mlp";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "logistic_regression" || name == "lr") return ModelKind::logistic_regression;
    if (name == "decision_tree" || name == "dt") return ModelKind::decision_tree;
    if (name == "random_forest" || name == "rf") return ModelKind::random_forest;
    if (name == "gradient_boosted_trees" || name == "gbt") return ModelKind::gradient_boosted_trees;
    if (name == "mlp") return ModelKind::mlp;
    throw Error("unknown model kind: " + std::string(name));
}

Hyperparameters default_hyperparameters(ModelKind kind) {
    switch (kind) {
    case ModelKind::logistic_regression:
        return {{"epochs", 500}, {"learning_rate", 0.5}, {"l2", 1e-4}};
    case ModelKind::decision_tree:
        return {{"max_depth", 12}, {"min_leaf", 2}, {"max_bins", 255}};
    case ModelKind::random_forest:
        return {{"trees", 100}, {"max_depth", 0}, {"min_leaf", 1}, {"max_bins", 255}};
    case ModelKind::gradient_boosted_trees:
        return {{"trees", 100}, {"max_depth", 3}, {"learning_rate", 0.1}, {"lambda", 1.0}, {"max_bins", 255}};
    case ModelKind::mlp:
        return {{"hidden", 64}, {"epochs", 200}, {"learning_rate", 1e-3}, {"batch_size", 64}};
    }
    return {};
}

Model fit(ModelKind kind, const Matrix& X, const std::vector<int>& y,
          const Hyperparameters& hyperparameters, std::uint64_t seed,
          std::vector<std::string> feature_names) {
    if (X.rows() != y.size()) throw ShapeError("row count does not match label count");
    if (X.rows() == 0 || X.cols() == 0) throw FitError("cannot fit on empty data");
    std::size_t pos = 0;
    for (int label : y) {
        if (label != 0 && label != 1) throw FitError("labels must be 0 or 1");
        pos += static_cast<std::size_t>(label);
    }
    if (pos == 0 || pos == y.size()) throw FitError("training labels are constant");
    if (!feature_names.empty() && feature_names.size() != X.cols())
        throw ShapeError("feature name count does not match columns");

    auto hp = default_hyperparameters(kind);
    for (const auto& [key, value] : hyperparameters) {
        if (!hp.contains(key)) throw FitError("unknown hyperparameter '" + key + "' for " + to_string(kind));
        hp[key] = value;
    }

    Model model;
    model.kind_ = kind;
    model.hyperparameters_ = hp;
    model.seed_ = seed;
    model.scaler_ = fit_scaler(X);
    model.feature_names_ = std::move(feature_names);
    Matrix Xs = transform(X, model.scaler_);
    switch (kind) {
    case ModelKind::logistic_regression: model.estimator_ = detail::fit_logistic_regression(Xs, y, hp); break;
    case ModelKind::decision_tree: model.estimator_ = detail::fit_decision_tree(Xs, y, hp, seed); break;
    case ModelKind::random_forest: model.estimator_ = detail::fit_random_forest(Xs, y, hp, seed); break;
    case ModelKind::gradient_boosted_trees: model.estimator_ = detail::fit_boosted_trees(Xs, y, hp); break;
    case ModelKind::mlp: model.estimator_ = detail::fit_mlp(Xs, y, hp, seed); break;
    }
    return model;
}

Model fit(ModelKind kind, const Dataset& train, const Hyperparameters& hyperparameters, std::uint64_t seed) {
    return fit(kind, train.X, train.y, hyperparameters, seed, train.schema.names());
}

void Model::require_fitted() const {
    if (!estimator_) throw FitError("model is not fitted");
}

void Model::check_width(std::size_t cols) const {
    if (cols != scaler_.size())
        throw ShapeError("expected " + std::to_string(scaler_.size()) + " features, got " + std::to_string(cols));
}

double Model::predict_score(std::span<const double> x) const {
    require_fitted();
    check_width(x.size());
    return estimator_->score(transform(x, scaler_));
}

std::vector<double> Model::predict_score(const Matrix& X) const {
    require_fitted();
    std::vector<double> out;
    if (X.rows() == 0) return out;
    check_width(X.cols());
    out.reserve(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) out.push_back(estimator_->score(transform(X.row(r), scaler_)));
    return out;
}

std::vector<int> Model::predict(const Matrix& X) const {
    auto scores = predict_score(X);
    std::vector<int> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= 0.5 ? 1 : 0;
    return out;
}

std::vector<double> Model::feature_importances() const {
    require_fitted();
    return estimator_->feature_importances();
}

std::string Model::to_json_text() const {
    require_fitted();
    json ranges = json::array();
    for (const auto& r : scaler_.ranges()) ranges.push_back({r.min, r.max});
    json doc{{"format", "figa-model/1"},
             {"kind", to_string(kind_)},
             {"hyperparameters", hyperparameters_},
             {"seed", seed_},
             {"feature_names", feature_names_},
             {"scaler", ranges},
             {"params", json::parse(estimator_->params_json())}};
    return doc.dump() + "\n";
}

Model Model::from_json_text(std::string_view text) {
    try {
        auto doc = json::parse(text);
        if (doc.at("format") != "figa-model/1") throw FitError("unsupported model format");
        Model m;
        m.kind_ = parse_model_kind(doc.at("kind").get<std::string>());
        m.hyperparameters_ = doc.at("hyperparameters").get<Hyperparameters>();
        m.seed_ = doc.at("seed").get<std::uint64_t>();
        m.feature_names_ = doc.at("feature_names").get<std::vector<std::string>>();
        std::vector<FeatureRange> ranges;
        for (const auto& r : doc.at("scaler")) ranges.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
        m.scaler_ = ScalerState(std::move(ranges));
        const auto& params = doc.at("params");
        if (m.kind_ == ModelKind::logistic_regression || m.kind_ == ModelKind::mlp) {
            m.estimator_ = detail::load_linear_estimator(m.kind_, params);
        } else {
            m.estimator_ = detail::load_tree_estimator(m.kind_, params);
        }
        if (m.estimator_->feature_importances().size() != m.scaler_.size())
            throw FitError("model parameters do not match feature count");
        return m;
    } catch (const json::exception& e) {
        throw FitError(std::string("malformed model file: ") + e.what());
    }
}

void Model::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write model: " + path.string());
    out << to_json_text();
    if (!out) throw IoError("failed writing model: " + path.string());
}

Model Model::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

}  // namespace figa
