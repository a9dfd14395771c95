#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "psusp/base_system.hpp"
#include "psusp/errors.hpp"

using namespace psusp;

namespace {

template <class F>
Errc code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no psusp::Error thrown";
    return Errc::InvalidArgument;
}

double boole(double x) { return x - 1.0 / x; }

// r_k = 3 at every stage, spacers only on the last subcolumn, sized h_k so
// that T^{h_3} stays inside the stage-4 tower.
RankOneSpec three_cut_spec() {
    RankOneSpec s;
    s.cuts = {3, 3, 3, 3};
    std::int64_t h = 1;
    for (int k = 0; k < 4; ++k) {
        s.spacers.push_back({0, 0, static_cast<int>(h)});
        h = 4 * h;
    }
    return s;
}

}  // namespace

TEST(Preimage, IntegerTranslationShiftsBack) {
    const auto sys = BaseSystem::integer_translation(1);
    EXPECT_EQ(sys.preimage(IntervalSet::integers({0}), 3), IntervalSet::integers({-3}));
    EXPECT_EQ(sys.measure(IntervalSet::integers({0, 4})), 2.0);
}

TEST(Preimage, BooleUnitIntervalHasTwoBranches) {
    const auto sys = BaseSystem::boole();
    const auto pre = sys.preimage(IntervalSet::interval(0, 1), 1);
    ASSERT_EQ(pre.size(), 2u);
    const double s5 = std::sqrt(5.0);
    EXPECT_NEAR(pre.intervals()[0].left, -1.0, 1e-15);
    EXPECT_NEAR(pre.intervals()[0].right, (1 - s5) / 2, 1e-15);
    EXPECT_NEAR(pre.intervals()[1].left, 1.0, 1e-15);
    EXPECT_NEAR(pre.intervals()[1].right, (1 + s5) / 2, 1e-15);
}

TEST(Preimage, BooleGridForwardMapOracle) {
    const auto sys = BaseSystem::boole();
    const auto target = IntervalSet::interval(0, 1);
    for (int n = 1; n <= 3; ++n) {
        const auto pre = sys.preimage(target, n);
        // Points strictly inside the preimage land in the target; points of a
        // grid outside it (away from endpoints) do not.
        int inside = 0;
        for (int i = 0; i < 10'000; ++i) {
            const double x = -6.0 + 12.0 * (i + 0.5) / 10'000;
            double y = x;
            for (int k = 0; k < n; ++k) y = boole(y);
            bool near_edge = false;
            for (const auto& iv : pre.intervals()) {
                near_edge = near_edge || std::abs(x - iv.left) < 1e-9 || std::abs(x - iv.right) < 1e-9;
            }
            if (near_edge) continue;
            EXPECT_EQ(pre.contains(x), target.contains(y)) << "n=" << n << " x=" << x;
            inside += pre.contains(x);
        }
        EXPECT_GT(inside, 0);
    }
}

TEST(Preimage, RankOneClimbsOneLevel) {
    const auto sys = BaseSystem::rank_one({{2}, {{0, 1}}, 1.0});
    const auto& t = *sys.tower();
    ASSERT_EQ(t.height, 3);
    const auto l0 = IntervalSet::interval(t.levels[0].left, t.levels[0].right);
    const auto l1 = IntervalSet::interval(t.levels[1].left, t.levels[1].right);
    EXPECT_TRUE(approx_equal(sys.preimage(l1, 1), l0));
    EXPECT_TRUE(approx_equal(sys.preimage(l0, -1), l1));
    EXPECT_EQ(code_of([&] { sys.preimage(l0, 1); }), Errc::DomainEscape);
}

TEST(Preimage, BooleCapsAndInvertibility) {
    const auto sys = BaseSystem::boole();
    EXPECT_EQ(code_of([&] { sys.preimage(IntervalSet::interval(0, 1), 13); }), Errc::CapExceeded);
    EXPECT_EQ(code_of([&] { sys.preimage(IntervalSet::interval(0, 1), -1); }), Errc::NotInvertible);
    EXPECT_NO_THROW(sys.preimage(IntervalSet::interval(0, 1), 12));
}

TEST(IntersectSequence, TranslationOfPoint) {
    const auto seq = intersect_sequence(BaseSystem::integer_translation(1), IntervalSet::integers({0}), 3);
    EXPECT_EQ(seq, (std::vector<double>{1, 0, 0, 0}));
}

TEST(IntersectSequence, TranslationOfPair) {
    const auto seq = intersect_sequence(BaseSystem::integer_translation(1), IntervalSet::integers({0, 1}), 3);
    EXPECT_EQ(seq, (std::vector<double>{2, 1, 0, 0}));
}

TEST(IntersectSequence, BoolePositiveDecayingAndMatchesMonteCarlo) {
    const auto a = IntervalSet::interval(-1, 1);
    const auto seq = intersect_sequence(BaseSystem::boole(), a, 8);
    ASSERT_EQ(seq.size(), 9u);
    EXPECT_DOUBLE_EQ(seq[0], 2.0);
    for (std::size_t n = 1; n < seq.size(); ++n) {
        EXPECT_GT(seq[n], 0.0);
        EXPECT_LT(seq[n], seq[n - 1]);
    }
    // mu(A ∩ T^-n A) = 2 P(T^n U in A) for U uniform on A.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    constexpr int kSamples = 1'000'000;
    std::vector<int> hits(9, 0);
    for (int i = 0; i < kSamples; ++i) {
        double x = u(rng);
        for (int n = 1; n <= 8; ++n) {
            x = boole(x);
            hits[n] += a.contains(x);
        }
    }
    for (int n = 1; n <= 8; ++n) {
        const double p = static_cast<double>(hits[n]) / kSamples;
        const double se = 2.0 * std::sqrt(p * (1 - p) / kSamples);
        EXPECT_NEAR(2.0 * p, seq[n], 3 * se) << "lag " << n;
    }
}

TEST(SymmetricDifference, Basics) {
    EXPECT_EQ(symmetric_diff_measure(BaseSystem::boole(), IntervalSet::interval(0, 1), 0), 0.0);
    EXPECT_EQ(symmetric_diff_measure(BaseSystem::integer_translation(1), IntervalSet::integers({0}), 1), 2.0);
}

TEST(SymmetricDifference, ThreeCutTowerKeepsTwoThirdsAtH3) {
    // With three cuts at the last stage, T^{h_3} moves two of the three
    // copies of the stage-3 column onto the next copy and the third onto
    // spacers, so exactly one third of A leaves: mu(A Δ T^-h3 A) = 2/3 mu(A).
    const auto sys = BaseSystem::rank_one(three_cut_spec());
    const auto heights = three_cut_spec().heights();
    const auto& t = *sys.tower();
    // Stage-1 base: the first third of the base interval.
    const auto a = IntervalSet::interval(0, 1.0 / 3.0);
    EXPECT_NEAR(sys.measure(a), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(heights[3], 64);
    const double sd = symmetric_diff_measure(sys, a, heights[3]);
    EXPECT_NEAR(sd, 2.0 / 3.0 * sys.measure(a), 1e-12);
    EXPECT_GT(t.height, heights[3]);
}

TEST(SymmetricDifference, TwelveCutTowerIsRigidAtH3) {
    RankOneSpec s{{3, 3, 3, 12}, {{0, 0, 1}, {0, 0, 1}, {0, 0, 1}, std::vector<int>(12, 0)}, 27.0};
    s.spacers[3][11] = 40;
    const auto sys = BaseSystem::rank_one(s);
    const auto a = IntervalSet::interval(0, 1);
    EXPECT_EQ(s.heights()[3], 40);
    const double sd = symmetric_diff_measure(sys, a, 40);
    EXPECT_NEAR(sd, 2.0 / 12.0, 1e-12);
    EXPECT_LT(sd, 0.2 * sys.measure(a));
}

TEST(Wandering, Examples) {
    EXPECT_TRUE(wandering_check(BaseSystem::integer_translation(1), IntervalSet::integers({0}), 100));
    EXPECT_FALSE(wandering_check(BaseSystem::boole(), IntervalSet::interval(-1, 1), 5));
    EXPECT_TRUE(wandering_check(BaseSystem::boole(), IntervalSet{}, 10));
    EXPECT_FALSE(wandering_check(BaseSystem::integer_translation(1), IntervalSet::integers({0, 3}), 5));
    EXPECT_TRUE(wandering_check(BaseSystem::integer_translation(1), IntervalSet::integers({0, 3}), 1));
}

TEST(BuildTower, BaseCase) {
    const auto t = build_tower({{}, {}, 1.0});
    EXPECT_EQ(t.height, 1);
    EXPECT_TRUE(t.defined_domain.empty());
}

TEST(BuildTower, NoSpacersConservesMeasure) {
    const auto t = build_tower({{2}, {{0, 0}}, 1.0});
    EXPECT_EQ(t.height, 2);
    EXPECT_DOUBLE_EQ(t.level_width, 0.5);
    EXPECT_DOUBLE_EQ(t.region.length(), 1.0);
}

TEST(BuildTower, HeightRecursion) {
    const RankOneSpec s{{2}, {{0, 3}}, 1.0};
    EXPECT_EQ(build_tower(s).height, 5);
    // Independent scalar evaluation of h_{k+1} = r_k h_k + sum s_{k,i}.
    const RankOneSpec deep{{2, 3, 2}, {{0, 1}, {1, 0, 2}, {0, 0}}, 1.0};
    std::int64_t h = 1;
    h = 2 * h + 1;
    h = 3 * h + 3;
    h = 2 * h + 0;
    EXPECT_EQ(build_tower(deep).height, h);
    EXPECT_EQ(deep.heights().back(), h);
}

TEST(BuildTower, LevelsAreDisjointAndClimbByTranslation) {
    const auto sys = BaseSystem::rank_one({{2, 3, 2}, {{0, 1}, {1, 0, 2}, {0, 0}}, 1.0});
    const auto& t = *sys.tower();
    EXPECT_NEAR(t.region.length(), t.level_width * static_cast<double>(t.height), 1e-12);
    for (std::int64_t j = 0; j + 1 < t.height; ++j) {
        const auto& lv = t.levels[static_cast<std::size_t>(j)];
        const double x = 0.5 * (lv.left + lv.right);
        EXPECT_EQ(t.level_of(sys.apply(x, 1)), j + 1);
    }
}

TEST(BuildTower, OverflowAndValidation) {
    EXPECT_EQ(code_of([] { build_tower({{2, 2}, {{0, 1000}, {0, 1000}}, 1.0}, 100); }), Errc::StageOverflow);
    EXPECT_EQ(code_of([] { build_tower({{1}, {{0}}, 1.0}); }), Errc::InvalidArgument);
    EXPECT_EQ(code_of([] { build_tower({{2}, {{0}}, 1.0}); }), Errc::InvalidArgument);
    EXPECT_EQ(code_of([] { build_tower({{2}, {{0, 0}}, -1.0}); }), Errc::InvalidArgument);
}
