#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "psusp/errors.hpp"
#include "psusp/poisson.hpp"

using namespace psusp;

namespace {

std::vector<std::int64_t> column(const std::vector<std::vector<std::int64_t>>& rows, std::size_t j) {
    std::vector<std::int64_t> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[j]);
    return out;
}

}  // namespace

TEST(Sampling, DeterministicPerStream) {
    const auto sys = BaseSystem::boole();
    const auto w = IntervalSet::parse("[-2,1) [3,5)");
    const SeededSampler s{42, 7};
    EXPECT_EQ(sample_poisson(sys, w, s), sample_poisson(sys, w, s));
    EXPECT_NE(sample_poisson(sys, w, s).points, sample_poisson(sys, w, s.substream(1)).points);
}

TEST(Sampling, PointsSortedAndInsideWindow) {
    const auto sys = BaseSystem::boole();
    const auto w = IntervalSet::parse("[-2,1) [3,5)");
    for (std::uint64_t t = 0; t < 50; ++t) {
        const auto cfg = sample_poisson(sys, w, SeededSampler{1, t}, 3.0);
        EXPECT_TRUE(std::is_sorted(cfg.points.begin(), cfg.points.end()));
        for (double x : cfg.points) EXPECT_TRUE(w.contains(x)) << x;
    }
}

TEST(Sampling, CountsArePoissonAndIndependent) {
    const auto sys = BaseSystem::boole();
    const IntervalSet sets[] = {IntervalSet::interval(0, 1.5), IntervalSet::parse("[2,2.5) [4,5)")};
    const auto rows = sample_count_matrix(sys, sets, 20000, SeededSampler{5, 0}, Parallelism{1});
    const auto a = column(rows, 0);
    const auto b = column(rows, 1);
    EXPECT_GT(poisson_goodness_of_fit(a, 1.5).p_value, kGofPValue);
    EXPECT_GT(poisson_goodness_of_fit(b, 1.5).p_value, kGofPValue);
    std::vector<double> da(a.begin(), a.end()), db(b.begin(), b.end());
    const auto cov = jackknife_covariance(da, db);
    EXPECT_LT(std::abs(z_score(cov.estimate, cov.std_error, 0.0)), kInconsistentZ);
}

TEST(Sampling, CountingBasePutsPoissonMassOnSites) {
    const auto sys = BaseSystem::integer_translation(1);
    const IntervalSet sets[] = {IntervalSet::integers({0}), IntervalSet::integers({2, 3, 4})};
    const auto rows = sample_count_matrix(sys, sets, 20000, SeededSampler{9, 0}, Parallelism{1}, 0.5);
    EXPECT_GT(poisson_goodness_of_fit(column(rows, 0), 0.5).p_value, kGofPValue);
    EXPECT_GT(poisson_goodness_of_fit(column(rows, 1), 1.5).p_value, kGofPValue);
}

TEST(Sampling, WorkerCountDoesNotChangeResults) {
    const auto sys = BaseSystem::boole();
    const IntervalSet sets[] = {IntervalSet::interval(0, 1)};
    EXPECT_EQ(sample_count_matrix(sys, sets, 500, SeededSampler{3, 0}, Parallelism{1}),
              sample_count_matrix(sys, sets, 500, SeededSampler{3, 0}, Parallelism{4}));
}

TEST(Sampling, NegativeIntensityRejected) {
    EXPECT_THROW(sample_poisson(BaseSystem::boole(), IntervalSet::interval(0, 1), SeededSampler{}, -1.0), Error);
}

TEST(Count, WindowViolation) {
    const auto cfg = sample_poisson(BaseSystem::boole(), IntervalSet::interval(0, 1), SeededSampler{1, 0});
    EXPECT_NO_THROW(count(cfg, IntervalSet::interval(0.2, 0.8)));
    try {
        count(cfg, IntervalSet::interval(0.5, 1.5));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::WindowViolation);
    }
}

TEST(Pushforward, MovesPointsAndWindow) {
    const auto sys = BaseSystem::integer_translation(1);
    Configuration cfg{{0.0, 0.0, 2.0}, IntervalSet::integers({0, 1, 2})};
    const auto moved = pushforward(cfg, sys, 2);
    EXPECT_EQ(moved.points, (std::vector<double>{2.0, 2.0, 4.0}));
    EXPECT_EQ(moved.window, IntervalSet::integers({2, 3, 4}));
    EXPECT_EQ(pushforward(cfg, sys, 0), cfg);
}

TEST(Pushforward, BoolePreservesLaw) {
    // T_* of a Poisson sample on T^{-1}A restricted to A is Poisson(mu(A)).
    const auto sys = BaseSystem::boole();
    const auto a = IntervalSet::interval(0.5, 2.0);
    const auto pre = sys.preimage(a, 1);
    std::vector<std::int64_t> counts;
    for (std::uint64_t t = 0; t < 20000; ++t) {
        const auto cfg = sample_poisson(sys, pre, SeededSampler{17, t});
        const auto img = pushforward(cfg, sys, 1);
        counts.push_back(count_points(img.points, a));
        EXPECT_EQ(img.size(), cfg.size());
    }
    EXPECT_GT(poisson_goodness_of_fit(counts, 1.5).p_value, kGofPValue);
}

TEST(Pushforward, BooleWindowAcrossZeroEscapes) {
    const auto sys = BaseSystem::boole();
    Configuration cfg{{}, IntervalSet::interval(-1, 1)};
    EXPECT_THROW(pushforward(cfg, sys, 1), Error);
}

TEST(Covariance, MatchesIntersectionMeasure) {
    const auto sys = BaseSystem::boole();
    const auto a = IntervalSet::interval(-1, 1);
    for (std::int64_t n : {0, 1, 3}) {
        const auto est = estimate_count_covariance(sys, a, a, n, 20000, SeededSampler{21, std::uint64_t(n)}, {1});
        const double exact = intersection_measure(sys, a, a, n);
        EXPECT_LT(std::abs(z_score(est.estimate, est.std_error, exact)), kInconsistentZ) << "lag " << n;
    }
}

TEST(Covariance, RequiresEnoughTrials) {
    try {
        estimate_count_covariance(BaseSystem::boole(), IntervalSet::interval(0, 1), IntervalSet::interval(0, 1), 1, 999,
                                  SeededSampler{}, {1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InsufficientTrials);
    }
}

TEST(Csv, Headers) {
    std::ostringstream a, b;
    const Configuration cfgs[] = {{{0.5}, IntervalSet::interval(0, 1)}};
    write_configurations_csv(a, cfgs);
    EXPECT_EQ(a.str().substr(0, 12), "trial,point\n");
    const MomentRow rows[] = {{1, 0.5, 0.1, 0.4, 1.0}};
    write_moments_csv(b, rows);
    EXPECT_EQ(b.str().substr(0, b.str().find('\n')), "n,estimate,std_error,exact_oracle,z_score");
}
