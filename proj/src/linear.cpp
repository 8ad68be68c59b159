#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "estimators.hpp"
#include "figa/error.hpp"

namespace figa::detail {

using nlohmann::json;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace {

Eigen::Map<const RowMatrix> as_eigen(const Matrix& X) {
    return {X.data().data(), static_cast<Eigen::Index>(X.rows()), static_cast<Eigen::Index>(X.cols())};
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

class LogisticRegressionEstimator final : public Estimator {
public:
    LogisticRegressionEstimator(Eigen::VectorXd w, double b) : w_(std::move(w)), b_(b) {}

    double score(std::span<const double> x) const override {
        double z = b_;
        for (Eigen::Index i = 0; i < w_.size(); ++i) z += w_[i] * x[i];
        return sigmoid(z);
    }
    std::vector<double> feature_importances() const override { return to_vector(w_.cwiseAbs()); }
    std::string params_json() const override { return json{{"weights", to_vector(w_)}, {"bias", b_}}.dump(); }

private:
    Eigen::VectorXd w_;
    double b_;
};

// One hidden ReLU layer, sigmoid output.
class MlpEstimator final : public Estimator {
public:
    MlpEstimator(RowMatrix w1, Eigen::VectorXd b1, Eigen::VectorXd w2, double b2)
        : w1_(std::move(w1)), b1_(std::move(b1)), w2_(std::move(w2)), b2_(b2) {}

    double score(std::span<const double> x) const override {
        Eigen::Map<const Eigen::RowVectorXd> row(x.data(), static_cast<Eigen::Index>(x.size()));
        Eigen::RowVectorXd h = (row * w1_ + b1_.transpose()).cwiseMax(0.0);
        return sigmoid(h.dot(w2_) + b2_);
    }

    // Input weight magnitude routed through the output layer.
    std::vector<double> feature_importances() const override {
        return to_vector(w1_.cwiseAbs() * w2_.cwiseAbs());
    }

    std::string params_json() const override {
        std::vector<double> w1(w1_.data(), w1_.data() + w1_.size());
        return json{{"inputs", w1_.rows()}, {"hidden", w1_.cols()}, {"w1", w1},
                    {"b1", to_vector(b1_)}, {"w2", to_vector(w2_)}, {"b2", b2_}}
            .dump();
    }

private:
    RowMatrix w1_;  // inputs x hidden
    Eigen::VectorXd b1_;
    Eigen::VectorXd w2_;
    double b2_;
};

}  // namespace

std::unique_ptr<Estimator> fit_logistic_regression(const Matrix& Xs, const std::vector<int>& y,
                                                   const Hyperparameters& hp) {
    auto X = as_eigen(Xs);
    const auto n = static_cast<double>(Xs.rows());
    Eigen::VectorXd target(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) target[i] = y[i];

    int epochs = static_cast<int>(std::lround(hp.at("epochs")));
    double lr = hp.at("learning_rate");
    double l2 = hp.at("l2");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(X.cols());
    double b = 0.0;
    for (int e = 0; e < epochs; ++e) {
        Eigen::VectorXd p = ((X * w).array() + b).unaryExpr([](double z) { return sigmoid(z); }).matrix();
        Eigen::VectorXd err = p - target;
        Eigen::VectorXd grad_w = X.transpose() * err / n + l2 * w;
        double grad_b = err.sum() / n;
        w -= lr * grad_w;
        b -= lr * grad_b;
    }
    return std::make_unique<LogisticRegressionEstimator>(std::move(w), b);
}

std::unique_ptr<Estimator> fit_mlp(const Matrix& Xs, const std::vector<int>& y,
                                   const Hyperparameters& hp, std::uint64_t seed) {
    auto X = as_eigen(Xs);
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    const auto hidden = static_cast<Eigen::Index>(std::lround(hp.at("hidden")));
    const int epochs = static_cast<int>(std::lround(hp.at("epochs")));
    const double lr = hp.at("learning_rate");
    const auto batch = std::max<Eigen::Index>(1, std::lround(hp.at("batch_size")));
    if (hidden < 1) throw FitError("mlp needs at least one hidden unit");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    RowMatrix w1(p, hidden);
    const double s1 = std::sqrt(2.0 / static_cast<double>(p));
    for (Eigen::Index i = 0; i < w1.size(); ++i) w1.data()[i] = normal(rng) * s1;
    Eigen::VectorXd b1 = Eigen::VectorXd::Zero(hidden);
    Eigen::VectorXd w2(hidden);
    const double s2 = std::sqrt(1.0 / static_cast<double>(hidden));
    for (Eigen::Index i = 0; i < hidden; ++i) w2[i] = normal(rng) * s2;
    double b2 = 0.0;

    // Adam state.
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    RowMatrix m_w1 = RowMatrix::Zero(p, hidden), v_w1 = RowMatrix::Zero(p, hidden);
    Eigen::VectorXd m_b1 = Eigen::VectorXd::Zero(hidden), v_b1 = Eigen::VectorXd::Zero(hidden);
    Eigen::VectorXd m_w2 = Eigen::VectorXd::Zero(hidden), v_w2 = Eigen::VectorXd::Zero(hidden);
    double m_b2 = 0, v_b2 = 0;
    long step = 0;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    RowMatrix xb;
    Eigen::VectorXd yb;
    for (int e = 0; e < epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index start = 0; start < n; start += batch) {
            const Eigen::Index m = std::min(batch, n - start);
            xb.resize(m, p);
            yb.resize(m);
            for (Eigen::Index i = 0; i < m; ++i) {
                auto r = order[static_cast<std::size_t>(start + i)];
                xb.row(i) = X.row(r);
                yb[i] = y[static_cast<std::size_t>(r)];
            }
            RowMatrix pre = (xb * w1).rowwise() + b1.transpose();
            RowMatrix h = pre.cwiseMax(0.0);
            Eigen::VectorXd out = ((h * w2).array() + b2).unaryExpr([](double z) { return sigmoid(z); }).matrix();
            Eigen::VectorXd d_out = (out - yb) / static_cast<double>(m);  // BCE through sigmoid

            Eigen::VectorXd g_w2 = h.transpose() * d_out;
            double g_b2 = d_out.sum();
            RowMatrix d_h = d_out * w2.transpose();
            d_h = d_h.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
            RowMatrix g_w1 = xb.transpose() * d_h;
            Eigen::VectorXd g_b1 = d_h.colwise().sum().transpose();

            ++step;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            auto adam = [&](auto& param, auto& mom, auto& vel, const auto& g) {
                mom = beta1 * mom + (1.0 - beta1) * g;
                vel = beta2 * vel + (1.0 - beta2) * g.cwiseProduct(g);
                param.array() -= lr * (mom.array() / c1) / ((vel.array() / c2).sqrt() + eps);
            };
            adam(w1, m_w1, v_w1, g_w1);
            adam(b1, m_b1, v_b1, g_b1);
            adam(w2, m_w2, v_w2, g_w2);
            m_b2 = beta1 * m_b2 + (1.0 - beta1) * g_b2;
            v_b2 = beta2 * v_b2 + (1.0 - beta2) * g_b2 * g_b2;
            b2 -= lr * (m_b2 / c1) / (std::sqrt(v_b2 / c2) + eps);
        }
    }
    return std::make_unique<MlpEstimator>(std::move(w1), std::move(b1), std::move(w2), b2);
}

std::unique_ptr<Estimator> load_linear_estimator(ModelKind kind, const json& params) {
    if (kind == ModelKind::logistic_regression) {
        return std::make_unique<LogisticRegressionEstimator>(
            from_vector(params.at("weights").get<std::vector<double>>()), params.at("bias").get<double>());
    }
    if (kind == ModelKind::mlp) {
        auto inputs = params.at("inputs").get<Eigen::Index>();
        auto hidden = params.at("hidden").get<Eigen::Index>();
        auto w1v = params.at("w1").get<std::vector<double>>();
        auto b1 = params.at("b1").get<std::vector<double>>();
        auto w2 = params.at("w2").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(w1v.size()) != inputs * hidden ||
            static_cast<Eigen::Index>(b1.size()) != hidden || static_cast<Eigen::Index>(w2.size()) != hidden)
            throw FitError("malformed mlp parameters");
        RowMatrix w1 = Eigen::Map<const RowMatrix>(w1v.data(), inputs, hidden);
        return std::make_unique<MlpEstimator>(std::move(w1), from_vector(b1), from_vector(w2),
                                              params.at("b2").get<double>());
    }
    throw FitError("not a linear/neural model");
}

}  // namespace figa::detail
