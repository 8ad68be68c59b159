#pragma once

// Helpers and independent reference computations shared by the unit and
// acceptance suites. Oracles here deliberately avoid the library's code paths.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "figa/data.hpp"

namespace figa::testing {

inline FeatureSchema numeric_schema(const std::vector<std::string>& names,
                                    FeatureKind kind = FeatureKind::continuous) {
    std::vector<FeatureSpec> specs;
    for (const auto& n : names) specs.push_back({n, kind, "", true, false});
    return FeatureSchema(std::move(specs), "label", "1", "0");
}

inline std::vector<std::string> feature_names(std::size_t p, const std::string& prefix = "f") {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < p; ++i) names.push_back(prefix + std::to_string(i));
    return names;
}

inline Dataset make_dataset(const std::vector<std::vector<double>>& rows, std::vector<int> y, FeatureSchema schema) {
    Dataset d;
    d.X = Matrix::from_rows(rows);
    d.y = std::move(y);
    d.schema = std::move(schema);
    return d;
}

inline Dataset make_dataset(const std::vector<std::vector<double>>& rows, std::vector<int> y) {
    auto p = rows.empty() ? 0 : rows.front().size();
    return make_dataset(rows, std::move(y), numeric_schema(feature_names(p)));
}

// Two Gaussian classes; class 1 mean is shifted by `shift` on every feature.
inline Dataset gaussian_dataset(std::size_t rows, std::size_t p, double shift, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (std::size_t i = 0; i < rows; ++i) {
        int label = static_cast<int>(i % 2);
        std::vector<double> r(p);
        for (auto& v : r) v = noise(rng) + label * shift;
        X.push_back(r);
        y.push_back(label);
    }
    return make_dataset(X, y);
}

// Scoped temporary directory.
class TempDir {
public:
    TempDir() {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("figa-test-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

namespace oracle {

inline double gini(double pos, double n) {
    if (n == 0) return 0;
    double q = pos / n;
    return 2 * q * (1 - q);
}

inline double entropy(double pos, double n) {
    double h = 0;
    for (double c : {pos, n - pos})
        if (c > 0 && n > 0) h -= (c / n) * std::log2(c / n);
    return h;
}

// Every split "x <= v" for v a distinct value except the largest, each
// evaluated by rescanning the whole column.
struct Split {
    double left_n, left_pos, n, pos;
};

inline std::vector<Split> all_splits(const std::vector<double>& x, const std::vector<int>& y) {
    std::set<double> values(x.begin(), x.end());
    std::vector<Split> out;
    double n = static_cast<double>(x.size());
    double pos = 0;
    for (int v : y) pos += v;
    for (auto it = values.begin(); it != values.end() && std::next(it) != values.end(); ++it) {
        Split s{0, 0, n, pos};
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] <= *it) {
                s.left_n += 1;
                s.left_pos += y[i];
            }
        out.push_back(s);
    }
    return out;
}

inline double gini_gain(const std::vector<double>& x, const std::vector<int>& y) {
    double best = 0;
    for (const auto& s : all_splits(x, y)) {
        double rn = s.n - s.left_n;
        double child = s.left_n / s.n * gini(s.left_pos, s.left_n) + rn / s.n * gini(s.pos - s.left_pos, rn);
        best = std::max(best, gini(s.pos, s.n) - child);
    }
    return best;
}

// Gain ratio of the lowest-threshold split among those maximizing information gain.
inline std::pair<double, double> info_gain_and_ratio(const std::vector<double>& x, const std::vector<int>& y) {
    double best_gain = -1, best_ratio = 0;
    for (const auto& s : all_splits(x, y)) {
        double rn = s.n - s.left_n;
        double child = s.left_n / s.n * entropy(s.left_pos, s.left_n) + rn / s.n * entropy(s.pos - s.left_pos, rn);
        double gain = entropy(s.pos, s.n) - child;
        if (gain > best_gain + 1e-12) {
            best_gain = gain;
            double split_info = entropy(s.left_n, s.n);
            best_ratio = split_info > 0 ? gain / split_info : 0.0;
        }
    }
    if (best_gain < 0) return {0.0, 0.0};
    return {std::max(best_gain, 0.0), best_gain > 0 ? best_ratio : 0.0};
}

// Average precision by enumerating every distinct score as a threshold
// "predict positive iff score >= t", from the highest down.
inline double auprc(const std::vector<double>& scores, const std::vector<int>& y) {
    std::set<double, std::greater<>> thresholds(scores.begin(), scores.end());
    double positives = 0;
    for (int v : y) positives += v;
    double area = 0, prev_recall = 0;
    for (double t : thresholds) {
        double tp = 0, fp = 0;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (scores[i] >= t) (y[i] ? tp : fp) += 1;
        double r = tp / positives;
        double p = tp / (tp + fp);
        area += (r - prev_recall) * p;
        prev_recall = r;
    }
    return area;
}

inline double recall(const std::vector<int>& pred, const std::vector<int>& y) {
    std::map<std::pair<int, int>, int> confusion;
    for (std::size_t i = 0; i < y.size(); ++i) ++confusion[{y[i], pred[i]}];
    return static_cast<double>(confusion[{1, 1}]) / (confusion[{1, 1}] + confusion[{1, 0}]);
}

}  // namespace oracle

}  // namespace figa::testing
