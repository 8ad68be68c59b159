#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "figa/error.hpp"
#include "figa/ranking.hpp"
#include "support.hpp"

using namespace figa;
using figa::testing::make_dataset;
namespace oracle = figa::testing::oracle;

namespace {

// Feature A separates the classes, feature B is constant.
Dataset separating_four_rows() { return make_dataset({{0, 3}, {0, 3}, {1, 3}, {1, 3}}, {0, 0, 1, 1}); }

bool is_permutation_of_range(const std::vector<std::size_t>& order, std::size_t n) {
    std::vector<std::size_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> expected(n);
    std::iota(expected.begin(), expected.end(), 0);
    return sorted == expected;
}

Dataset noisy_with_label_copy(std::size_t rows, unsigned seed, std::size_t label_col = 0) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> noise;
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (std::size_t i = 0; i < rows; ++i) {
        int label = static_cast<int>(i % 2);
        std::vector<double> r{noise(rng), noise(rng), noise(rng)};
        r[label_col] = label;
        X.push_back(r);
        y.push_back(label);
    }
    return make_dataset(X, y);
}

}  // namespace

TEST(Ranking, ParseNames) {
    EXPECT_EQ(parse_ranking_method("gini"), RankingMethod::gini_impurity);
    EXPECT_EQ(parse_ranking_method("igr"), RankingMethod::info_gain_ratio);
    for (auto m : kAllRankingMethods) EXPECT_EQ(parse_ranking_method(to_string(m)), m);
    EXPECT_THROW(parse_ranking_method("shap"), Error);
}

TEST(Ranking, SeparatingFeatureRanksFirst) {
    auto ds = separating_four_rows();
    for (auto m : {RankingMethod::gini_impurity, RankingMethod::info_gain_ratio}) {
        auto r = rank_features(ds, m);
        EXPECT_EQ(r.order, (std::vector<std::size_t>{0, 1})) << to_string(m);
    }
}

TEST(Ranking, IdenticalCopiesTieByIndex) {
    auto base = noisy_with_label_copy(40, 3);
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < base.rows(); ++r) rows.push_back({base.X(r, 1), base.X(r, 1), base.X(r, 1)});
    auto ds = make_dataset(rows, base.y);
    for (auto m : {RankingMethod::gini_impurity, RankingMethod::info_gain_ratio}) {
        auto r = rank_features(ds, m);
        EXPECT_EQ(r.order, (std::vector<std::size_t>{0, 1, 2}));
        EXPECT_EQ(r.scores[0], r.scores[1]);
        EXPECT_EQ(r.scores[1], r.scores[2]);
    }
}

TEST(Ranking, OrderByScoreStable) {
    std::vector<double> s{0.2, 0.5, 0.2, 0.9};
    EXPECT_EQ(order_by_score(s), (std::vector<std::size_t>{3, 1, 0, 2}));
}

TEST(GiniGain, HandExamples) {
    auto ds = make_dataset({{1}, {1}, {9}, {9}}, {0, 0, 1, 1});
    EXPECT_DOUBLE_EQ(gini_gain(ds, 0), 0.5);
    auto constant = make_dataset({{4}, {4}, {4}, {4}}, {0, 0, 1, 1});
    EXPECT_EQ(gini_gain(constant, 0), 0.0);
    auto tiny = make_dataset({{3}, {3}}, {0, 1});
    EXPECT_EQ(gini_gain(tiny, 0), 0.0);
}

TEST(InfoGainRatio, HandExamples) {
    auto ds = make_dataset({{0}, {0}, {1}, {1}}, {0, 0, 1, 1});
    EXPECT_DOUBLE_EQ(info_gain(ds, 0), 1.0);
    EXPECT_DOUBLE_EQ(info_gain_ratio(ds, 0), 1.0);
    auto constant = make_dataset({{4}, {4}, {4}, {4}}, {0, 0, 1, 1});
    EXPECT_EQ(info_gain_ratio(constant, 0), 0.0);
}

TEST(InfoGainRatio, IndependentFeatureIsSmall) {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_real_distribution<double> u;
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (int i = 0; i < 1000; ++i) {
        X.push_back({u(rng)});
        y.push_back(coin(rng));
    }
    EXPECT_LT(info_gain_ratio(make_dataset(X, y), 0), 0.05);
}

TEST(SplitCriteria, MatchBruteForceOnSmallDatasets) {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t rows = 2 + rng() % 15;
        std::uniform_int_distribution<int> value(0, 1 + static_cast<int>(rng() % 6));
        std::vector<std::vector<double>> X;
        std::vector<int> y;
        for (std::size_t i = 0; i < rows; ++i) {
            X.push_back({static_cast<double>(value(rng)), static_cast<double>(value(rng)) * 0.5});
            y.push_back(static_cast<int>(rng() % 2));
        }
        auto ds = make_dataset(X, y);
        for (std::size_t f = 0; f < 2; ++f) {
            std::vector<double> col;
            for (const auto& r : X) col.push_back(r[f]);
            EXPECT_NEAR(gini_gain(ds, f), oracle::gini_gain(col, y), 1e-9);
            auto [ig, igr] = oracle::info_gain_and_ratio(col, y);
            EXPECT_NEAR(info_gain(ds, f), ig, 1e-9);
            EXPECT_NEAR(info_gain_ratio(ds, f), igr, 1e-9);
        }
    }
}

TEST(SplitCriteria, InvariantUnderRowDuplication) {
    auto ds = noisy_with_label_copy(12, 9, 1);
    auto doubled = ds;
    for (std::size_t r = 0; r < ds.rows(); ++r) doubled.X.append_row(ds.X.row(r));
    doubled.y.insert(doubled.y.end(), ds.y.begin(), ds.y.end());
    for (std::size_t f = 0; f < 3; ++f) {
        EXPECT_NEAR(gini_gain(ds, f), gini_gain(doubled, f), 1e-12);
        EXPECT_NEAR(info_gain_ratio(ds, f), info_gain_ratio(doubled, f), 1e-12);
    }
}

TEST(Ranking, SingleClassFails) {
    auto ds = make_dataset({{1, 2}, {3, 4}}, {1, 1});
    EXPECT_THROW(rank_features(ds, RankingMethod::gini_impurity), RankingError);
}

TEST(Permutation, LabelCopyRanksFirstAndIsDeterministic) {
    auto ds = noisy_with_label_copy(200, 21, 2);
    RankingOptions opt;
    opt.seed = 4;
    opt.permutation_probe = ModelKind::decision_tree;
    auto r1 = rank_features(ds, RankingMethod::permutation, opt);
    auto r2 = rank_features(ds, RankingMethod::permutation, opt);
    EXPECT_EQ(r1.order.front(), 2u);
    EXPECT_EQ(r1.scores, r2.scores);
    EXPECT_TRUE(is_permutation_of_range(r1.order, 3));
}

TEST(Permutation, IgnoredColumnScoresZero) {
    auto ds = noisy_with_label_copy(100, 8, 0);
    // Logistic regression trained on column 0 only would still see the other columns,
    // so use a stump: depth-1 tree splits on the label copy and ignores the rest.
    auto model = fit(ModelKind::decision_tree, ds, {{"max_depth", 1}}, 0);
    auto scores = permutation_importance(ds, model, 5, 3);
    EXPECT_GT(scores[0], 0.0);
    EXPECT_EQ(scores[1], 0.0);
    EXPECT_EQ(scores[2], 0.0);
}

TEST(Rfe, PredictiveFeatureSurvivesLast) {
    auto ds = noisy_with_label_copy(100, 2, 1);
    auto r = rfe_rank(ds, ModelKind::decision_tree, 0);
    EXPECT_EQ(r.order.front(), 1u);
    EXPECT_TRUE(is_permutation_of_range(r.order, 3));

    auto two = make_dataset({{0, 5}, {1, 5}, {0, 6}, {1, 6}, {0, 5}, {1, 6}}, {0, 1, 0, 1, 0, 1});
    EXPECT_EQ(rfe_rank(two, ModelKind::decision_tree, 0).order, (std::vector<std::size_t>{0, 1}));
}

TEST(Rfe, IdenticalCopiesFollowTieBreak) {
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (int i = 0; i < 20; ++i) {
        double v = i % 5;
        rows.push_back({v, v, v});
        y.push_back(v >= 2 ? 1 : 0);
    }
    auto ds = make_dataset(rows, y);
    auto a = rfe_rank(ds, ModelKind::logistic_regression, 0);
    auto b = rfe_rank(ds, ModelKind::logistic_regression, 0);
    EXPECT_EQ(a.order, b.order);
    EXPECT_EQ(a.order, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Ffs, PredictiveSelectedFirst) {
    auto train = noisy_with_label_copy(200, 31, 2);
    auto holdout = noisy_with_label_copy(100, 32, 2);
    auto r1 = ffs_rank(train, holdout, ModelKind::logistic_regression, 5);
    auto r2 = ffs_rank(train, holdout, ModelKind::logistic_regression, 5);
    EXPECT_EQ(r1.order.front(), 2u);
    EXPECT_EQ(r1.order, r2.order);
    EXPECT_TRUE(is_permutation_of_range(r1.order, 3));
}

TEST(Ffs, AllNoiseStillFullPermutation) {
    std::mt19937 rng(77);
    std::normal_distribution<double> noise;
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (int i = 0; i < 120; ++i) {
        X.push_back({noise(rng), noise(rng), noise(rng), noise(rng)});
        y.push_back(static_cast<int>(rng() % 2));
    }
    auto ds = make_dataset(X, y);
    RankingOptions opt;
    opt.seed = 1;
    auto r = rank_features(ds, RankingMethod::ffs, opt);
    EXPECT_TRUE(is_permutation_of_range(r.order, 4));
    for (std::size_t k = 1; k < r.order.size(); ++k) EXPECT_GE(r.scores[r.order[k - 1]], r.scores[r.order[k]]);
}

TEST(Ranking, AllMethodsProducePermutations) {
    auto ds = noisy_with_label_copy(120, 41, 0);
    RankingOptions opt;
    opt.permutation_probe_hyperparameters = {{"trees", 10}};
    for (auto m : kAllRankingMethods) {
        auto r = rank_features(ds, m, opt);
        EXPECT_EQ(r.method, m);
        EXPECT_TRUE(is_permutation_of_range(r.order, 3)) << to_string(m);
        ASSERT_EQ(r.scores.size(), 3u);
        for (std::size_t k = 1; k < r.order.size(); ++k)
            EXPECT_GE(r.scores[r.order[k - 1]], r.scores[r.order[k]]) << to_string(m);
    }
}
