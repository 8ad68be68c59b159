#include <gtest/gtest.h>

#include <random>

#include "figa/attack.hpp"
#include "figa/error.hpp"
#include "support.hpp"

using namespace figa;
using figa::testing::feature_names;
using figa::testing::make_dataset;
using figa::testing::numeric_schema;

namespace {

FeatureRanking ranking_of(std::vector<std::size_t> order) {
    FeatureRanking r;
    r.scores.assign(order.size(), 0.0);
    for (std::size_t k = 0; k < order.size(); ++k) r.scores[order[k]] = static_cast<double>(order.size() - k);
    r.order = std::move(order);
    return r;
}

ScalerState unit_scaler(std::size_t p) { return ScalerState(std::vector<FeatureRange>(p, {0.0, 1.0})); }

AttackConfig config(std::size_t n, double eps) {
    AttackConfig c;
    c.n = n;
    c.epsilon = eps;
    return c;
}

}  // namespace

TEST(Direction, TowardTargetMean) {
    // column 0: input mean 2, target mean 5; column 1: equal means; column 2: target below input
    auto ds = make_dataset({{1, 3, 9}, {3, 3, 7}, {4, 3, 1}, {6, 3, 2}}, {1, 1, 0, 0});
    auto d = compute_direction(ds);
    EXPECT_EQ(d.signs, (std::vector<int>{1, 0, -1}));
}

TEST(Direction, RequiresBothClasses) {
    auto ds = make_dataset({{1}, {2}}, {1, 1});
    EXPECT_THROW(compute_direction(ds), RankingError);
}

TEST(SelectFeatures, Examples) {
    auto schema = numeric_schema(feature_names(4));
    auto ranking = ranking_of({3, 1, 0, 2});
    DirectionVector all{{1, 1, -1, 1}};
    EXPECT_EQ(select_features(ranking, all, unit_scaler(4), schema, config(2, 0.1)),
              (std::vector<std::size_t>{3, 1}));
    DirectionVector zero1{{1, 0, -1, 1}};
    EXPECT_EQ(select_features(ranking, zero1, unit_scaler(4), schema, config(2, 0.1)),
              (std::vector<std::size_t>{3, 0}));
    EXPECT_THROW(select_features(ranking, all, unit_scaler(4), schema, config(5, 0.1)), SelectionError);
}

TEST(SelectFeatures, SkipsImmutableConstantAndMasked) {
    std::vector<FeatureSpec> specs;
    for (auto& n : feature_names(4)) specs.push_back({n, FeatureKind::continuous, "", true, false});
    specs[3].mutable_ = false;
    FeatureSchema schema(specs, "label", "1", "0");
    ScalerState scaler({{0, 1}, {2, 2}, {0, 1}, {0, 1}});
    DirectionVector d{{1, 1, 1, 1}};
    auto ranking = ranking_of({3, 1, 0, 2});
    EXPECT_EQ(select_features(ranking, d, scaler, schema, config(2, 0.1)), (std::vector<std::size_t>{0, 2}));
    auto masked = config(1, 0.1);
    masked.feature_mask = std::vector<std::size_t>{2};
    EXPECT_EQ(select_features(ranking, d, scaler, schema, masked), (std::vector<std::size_t>{2}));
}

TEST(Perturb, HandTraceContinuous) {
    auto schema = numeric_schema(feature_names(3));
    AttackPlan plan(ranking_of({0, 1, 2}), DirectionVector{{1, -1, 1}}, config(2, 0.1), unit_scaler(3), schema);
    auto out = perturb(std::vector<double>{0.2, 0.4, 0.6}, plan);
    EXPECT_NEAR(out[0], 0.26, 1e-12);
    EXPECT_NEAR(out[1], 0.34, 1e-12);
    EXPECT_EQ(out[2], 0.6);
}

TEST(Perturb, ZeroEpsilonIsIdentity) {
    auto schema = numeric_schema(feature_names(3));
    ScalerState scaler({{-3, 7}, {0, 100}, {1, 2}});
    AttackPlan plan(ranking_of({2, 0, 1}), DirectionVector{{1, -1, 1}}, config(3, 0.0), scaler, schema);
    std::vector<double> x{0.123456789, 33.3, 1.7};
    EXPECT_EQ(perturb(x, plan), x);
}

TEST(Perturb, DiscreteRoundsTowardOriginal) {
    auto schema = numeric_schema({"count"}, FeatureKind::discrete);
    ScalerState scaler({{0, 10}});
    // scaled 0.7, delta 0.04 -> 0.74 -> 7.4 -> floor -> 7
    AttackPlan up(ranking_of({0}), DirectionVector{{1}}, config(1, 0.04 / 0.7), scaler, schema);
    EXPECT_EQ(perturb(std::vector<double>{7}, up)[0], 7.0);
    // same movement downward: 6.6 -> ceil -> 7
    AttackPlan down(ranking_of({0}), DirectionVector{{-1}}, config(1, 0.04 / 0.7), scaler, schema);
    EXPECT_EQ(perturb(std::vector<double>{7}, down)[0], 7.0);
    // a bigger step lands on an integer below the perturbed value
    AttackPlan big(ranking_of({0}), DirectionVector{{1}}, config(1, 0.25 / 0.7), scaler, schema);
    EXPECT_EQ(perturb(std::vector<double>{7}, big)[0], 9.0);
}

TEST(Perturb, LargeEpsilonClipsToTrainingExtremes) {
    auto schema = numeric_schema(feature_names(3));
    ScalerState scaler({{0, 10}, {-5, 5}, {100, 200}});
    AttackPlan plan(ranking_of({0, 1, 2}), DirectionVector{{1, -1, 1}}, config(3, 1000.0), scaler, schema);
    auto out = perturb(std::vector<double>{3, 2, 150}, plan);
    EXPECT_EQ(out, (std::vector<double>{10, -5, 200}));
}

TEST(Perturb, StrictOneHotKeepsGroupConsistent) {
    auto schema = FeatureSchema::from_json_text(R"({"target_column":"y","positive_class_label":"1",
        "negative_class_label":"0","features":[{"name":"c","kind":"categorical","categories":["a","b","c"]}]})");
    ScalerState scaler(std::vector<FeatureRange>(3, {0, 1}));
    auto cfg = config(1, 10.0);
    AttackPlan loose(ranking_of({1, 0, 2}), DirectionVector{{-1, 1, -1}}, cfg, scaler, schema);
    std::vector<double> x{1, 0, 0};
    auto out = perturb(x, loose);
    EXPECT_EQ(out, (std::vector<double>{1, 1, 0}));  // independent binary columns
    cfg.strict_onehot = true;
    AttackPlan strict(ranking_of({1, 0, 2}), DirectionVector{{-1, 1, -1}}, cfg, scaler, schema);
    auto fixed = perturb(x, strict);
    EXPECT_EQ(fixed[0] + fixed[1] + fixed[2], 1.0);
    EXPECT_EQ(fixed[1], 1.0);
}

TEST(Perturb, BatchMatchesRowwise) {
    auto ds = figa::testing::gaussian_dataset(100, 5, 1.5, 12);
    AttackConfig cfg = config(3, 0.3);
    cfg.method = RankingMethod::info_gain_ratio;
    auto plan = make_plan(ds, cfg);
    auto batch = perturb_batch(ds.X, plan);
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        auto row = perturb(ds.X.row(r), plan);
        for (std::size_t c = 0; c < ds.features(); ++c) EXPECT_EQ(batch(r, c), row[c]);
    }
    auto twins = Matrix::from_rows({{0.1, 0.2, 0.3, 0.4, 0.5}, {0.1, 0.2, 0.3, 0.4, 0.5}});
    auto t = perturb_batch(twins, plan);
    for (std::size_t c = 0; c < 5; ++c) EXPECT_EQ(t(0, c), t(1, c));
    EXPECT_EQ(perturb_batch(ds.X, plan.with(3, 0.0)), ds.X);
}

TEST(AttackPlan, ValidatesInputs) {
    auto schema = numeric_schema(feature_names(2));
    EXPECT_THROW(AttackPlan(ranking_of({0, 1}), DirectionVector{{1}}, config(1, 0.1), unit_scaler(2), schema),
                 ShapeError);
    EXPECT_THROW(AttackPlan(ranking_of({0, 1}), DirectionVector{{1, 1}}, config(1, -0.1), unit_scaler(2), schema),
                 Error);
    EXPECT_THROW(AttackPlan(ranking_of({0, 1}), DirectionVector{{1, 1}}, config(0, 0.1), unit_scaler(2), schema),
                 Error);
    auto bad = ranking_of({0, 1});
    bad.order = {0, 0};
    EXPECT_THROW(AttackPlan(bad, DirectionVector{{1, 1}}, config(1, 0.1), unit_scaler(2), schema), Error);
    AttackPlan ok(ranking_of({0, 1}), DirectionVector{{1, 1}}, config(1, 0.1), unit_scaler(2), schema);
    EXPECT_THROW(perturb(std::vector<double>{1, 2, 3}, ok), ShapeError);
}
