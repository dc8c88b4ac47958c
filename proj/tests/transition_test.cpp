#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "advgeo/adversarial_map.hpp"
#include "advgeo/synth.hpp"
#include "advgeo/transition.hpp"
#include "test_util.hpp"

using namespace advgeo;

TEST(Uniform, OffDiagonals) {
    const auto t = uniform_transition(10);
    for (std::size_t i = 0; i < 10; ++i) {
        double row = 0;
        for (std::size_t j = 0; j < 10; ++j) {
            EXPECT_EQ(t(i, j), i == j ? 0.0 : 1.0 / 9.0);
            row += t(i, j);
        }
        EXPECT_NEAR(row, 1.0, 1e-15);
    }
    EXPECT_EQ(uniform_transition(2)(0, 1), 1.0);
    EXPECT_THROW(uniform_transition(1), Error);
}

TEST(Weighted, InverseDistance) {
    const auto d = testutil::matrix(Measure::euclidean, {{0, 1, 3}, {1, 0, 2}, {3, 2, 0}}, false);
    const auto t = weighted_transition(d);
    EXPECT_NEAR(t(0, 1), 0.75, 1e-12);
    EXPECT_NEAR(t(0, 2), 0.25, 1e-12);
    EXPECT_EQ(t.provenance().label(), "euclidean");
}

TEST(Weighted, EqualDistancesAreUniform) {
    const auto d = testutil::matrix(Measure::euclidean, {{0, 2, 2}, {2, 0, 2}, {2, 2, 0}}, false);
    const auto t = weighted_transition(d);
    const auto u = uniform_transition(3);
    for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(t.values()[i], u.values()[i], 1e-15);
}

TEST(Weighted, MapRestriction) {
    const auto d = testutil::matrix(Measure::hopping, {{0, 1, 3}, {1, 0, 2}, {3, 2, 0}}, true);
    const auto map = create_map(d, {2.0, Measure::hopping, ForbiddenDistance::Derivation::user_supplied});
    const auto t = weighted_transition(d, &map);
    EXPECT_EQ(t(0, 1), 1.0);
    EXPECT_EQ(t(0, 2), 0.0);
    EXPECT_TRUE(t.provenance().map_restricted);
}

TEST(Weighted, FallbackRowsFlagged) {
    const double inf = std::numeric_limits<double>::infinity();
    const auto d = testutil::matrix(Measure::hopping, {{0, inf, inf}, {1, 0, 2}, {3, 2, 0}}, true);
    const auto t = weighted_transition(d);
    EXPECT_EQ(t.provenance().fallback_rows, (std::vector<std::size_t>{0}));
    EXPECT_EQ(t(0, 1), 0.5);
}

TEST(Weighted, ZeroDistanceNamesPair) {
    const auto d = testutil::matrix(Measure::euclidean, {{0, 0, 1}, {0, 0, 1}, {1, 1, 0}}, false);
    try {
        weighted_transition(d);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("classes 0 and 1"), std::string::npos) << e.what();
    }
    WeightingOptions floor;
    floor.distance_floor = 1e-9;
    const auto t = weighted_transition(d, nullptr, floor);
    EXPECT_GT(t(0, 1), 0.99);
}

TEST(Weighted, ScaleInvariant) {
    std::vector<double> v(25), s(25);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            v[i * 5 + j] = i == j ? 0.0 : 1.0 + double((i * 7 + j * 3) % 11);
    for (std::size_t i = 0; i < 25; ++i) s[i] = 3.7 * v[i];
    const auto a = weighted_transition(DistanceMatrix(Measure::hopping, 5, v, true));
    const auto b = weighted_transition(DistanceMatrix(Measure::hopping, 5, s, true));
    for (std::size_t i = 0; i < 25; ++i) EXPECT_NEAR(a.values()[i], b.values()[i], 1e-9);
}

TEST(TransitionModelType, RejectsBadRows) {
    EXPECT_THROW(TransitionModel(2, {0.5, 0.5, 1, 0}, {}), Error);
    EXPECT_THROW(TransitionModel(2, {0, 0.9, 1, 0}, {}), Error);
    EXPECT_NO_THROW(TransitionModel(2, {0, 0, 1, 0}, {}));
}

TEST(Entropy, UniformClosedForm) {
    const auto ds = testutil::random_dataset(50, 2, 10, 1);
    const auto d = testutil::matrix(Measure::euclidean,
        [] {
            std::vector<std::vector<double>> r(10, std::vector<double>(10));
            for (int i = 0; i < 10; ++i) for (int j = 0; j < 10; ++j) r[i][j] = std::abs(i - j);
            return r;
        }(), false);
    const auto log = simulate_attack(ds, weighted_transition(d), {{0.1, 0.2}, {0.7}, 3});
    const auto e = model_entropy(log, uniform_transition(10));
    EXPECT_NEAR(e.e_m, std::log(9.0) / 9.0, 1e-12);
    EXPECT_NEAR(e.mean_nll, std::log(9.0), 1e-12);
}

TEST(Entropy, CertainTransitionIsZero) {
    TransitionModel t(2, {0, 1, 1, 0}, {});
    const auto log = AttackLog::create({{0, 1, 0, 1}, {1, 1, 1, 0}, {2, 1, 1, 1}}, 2);
    const auto e = model_entropy(log, t);
    EXPECT_EQ(e.e_m, 0.0);
    EXPECT_EQ(e.misclassified, 2u);
    EXPECT_EQ(e.records, 3u);
}

TEST(Entropy, SurpriseEventsAndErrors) {
    TransitionModel t(3, {0, 1, 0, 0.5, 0, 0.5, 0.5, 0.5, 0}, {});
    const auto log = AttackLog::create({{0, 1, 0, 2}, {1, 1, 1, 0}}, 3);
    const auto e = model_entropy(log, t);
    EXPECT_EQ(e.surprise_events, 1u);
    EXPECT_NEAR(e.e_m, -0.5 * std::log(0.5) / 2.0, 1e-15);
    EXPECT_NEAR(e.mean_nll, std::log(2.0), 1e-15);
    EXPECT_THROW(model_entropy(AttackLog::create({{0, 1, 0, 0}}, 3), t), Error);
    EXPECT_THROW(model_entropy(log, t, 2.0), Error);
}

TEST(Entropy, WeightedBelowUniformWhenConcentrated) {
    // A transition with a dominant target: flips drawn from it score lower.
    const auto d = testutil::matrix(Measure::euclidean, {{0, 1, 30}, {1, 0, 30}, {30, 30, 0}}, false);
    const auto t = weighted_transition(d);
    const auto ds = testutil::random_dataset(300, 2, 3, 4);
    const auto log = simulate_attack(ds, t, {{1.0}, {1.0}, 2});
    EXPECT_LT(model_entropy(log, t).e_m, model_entropy(log, uniform_transition(3)).e_m);
}

TEST(EntropySweep, RowsAndConstancy) {
    const auto ds = testutil::random_dataset(60, 2, 4, 8);
    const auto d = testutil::matrix(Measure::hopping,
        {{0, 1, 2, 3}, {1, 0, 1, 2}, {2, 1, 0, 1}, {3, 2, 1, 0}}, true);
    const auto t = weighted_transition(d);
    const auto log = simulate_attack(ds, t, {{0.5, 1.0, 1.5}, {0.2, 0.6, 1.0}, 5});
    const auto rows = entropy_sweep(log, {uniform_transition(4), t});
    ASSERT_EQ(rows.size(), 6u);
    for (std::size_t r = 0; r < 3; ++r) {
        EXPECT_EQ(rows[r].label, "uniform");
        EXPECT_NEAR(rows[r].e_m, std::log(3.0) / 3.0, 1e-12);
        EXPECT_EQ(rows[3 + r].label, "hopping");
    }
    const auto single = simulate_attack(ds, t, {{0.5}, {1.0}, 5});
    EXPECT_EQ(entropy_sweep(single, {uniform_transition(4), t}).size(), 2u);
}

TEST(EntropySweep, EpsilonWithoutFlipsGivesNanRow) {
    const auto log = AttackLog::create({{0, 0.1, 0, 0}, {0, 0.2, 0, 1}}, 2);
    const auto rows = entropy_sweep(log, {uniform_transition(2)});
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_TRUE(std::isnan(rows[0].e_m));
    EXPECT_EQ(rows[1].e_m, 0.0);
}
