// Randomized invariants. Each property draws its cases from a seeded
// generator so failures reproduce; the case index is printed on failure.
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "psusp/errors.hpp"
#include "psusp/fock.hpp"
#include "psusp/joinings.hpp"
#include "psusp/poisson.hpp"
#include "psusp/spectral.hpp"

using namespace psusp;

namespace {

constexpr int kCases = 200;

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    // Up to `pieces` intervals inside [lo, hi).
    IntervalSet set(double lo, double hi, int pieces = 4) {
        std::vector<Interval> ivs;
        const int n = integer(1, pieces);
        for (int i = 0; i < n; ++i) {
            double a = real(lo, hi), b = real(lo, hi);
            if (a > b) std::swap(a, b);
            if (b - a > 1e-6) ivs.push_back({a, b});
        }
        return IntervalSet::from_union(std::move(ivs));
    }

    IntervalSet lattice_set(int lo, int hi) {
        std::vector<std::int64_t> pts;
        for (int k = lo; k < hi; ++k) {
            if (integer(0, 2) == 0) pts.push_back(k);
        }
        return IntervalSet::integers(pts);
    }

    RankOneSpec tower_spec() {
        RankOneSpec s;
        const int stages = integer(1, 3);
        for (int k = 0; k < stages; ++k) {
            const int r = integer(2, 4);
            s.cuts.push_back(r);
            std::vector<int> sp(static_cast<std::size_t>(r));
            for (auto& v : sp) v = integer(0, 2);
            s.spacers.push_back(sp);
        }
        s.base_width = real(0.5, 3.0);
        return s;
    }

    BaseSystem system() {
        switch (integer(0, 2)) {
            case 0: return BaseSystem::integer_translation(integer(1, 3));
            case 1: return BaseSystem::boole();
            default: return BaseSystem::rank_one(tower_spec());
        }
    }

    IntervalSet set_for(const BaseSystem& sys) {
        if (sys.is_counting()) return lattice_set(-10, 10);
        if (const auto* t = sys.tower()) {
            const auto h = t->region.hull();
            return set(h->left, h->right).intersect(t->region);
        }
        return set(-4, 4);
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

bool escapes(const BaseSystem& sys, const IntervalSet& a, std::int64_t n) {
    try {
        sys.preimage(a, n);
        return false;
    } catch (const Error& e) {
        if (e.code() == Errc::DomainEscape) return true;
        throw;
    }
}

}  // namespace

TEST(Property, SetAlgebraInclusionExclusion) {
    Gen g(1);
    for (int i = 0; i < kCases; ++i) {
        const auto a = g.set(-5, 5), b = g.set(-5, 5);
        EXPECT_NEAR(a.unite(b).length() + a.intersect(b).length(), a.length() + b.length(), 1e-12) << i;
        EXPECT_NEAR(a.subtract(b).length(), a.length() - a.intersect(b).length(), 1e-12) << i;
        EXPECT_TRUE(approx_equal(IntervalSet::parse(a.to_string()), a)) << i;
    }
}

TEST(Property, PreimagesPreserveMeasure) {
    Gen g(2);
    int checked = 0;
    for (int i = 0; i < kCases; ++i) {
        const auto sys = g.system();
        const auto a = g.set_for(sys);
        const std::int64_t n = g.integer(0, 6);
        if (escapes(sys, a, n)) continue;
        EXPECT_NEAR(sys.measure(sys.preimage(a, n)), sys.measure(a), 1e-9 * std::max(1.0, sys.measure(a)))
            << i << " " << sys.id() << " " << a.to_string() << " n=" << n;
        ++checked;
    }
    EXPECT_GT(checked, kCases / 2);
}

TEST(Property, PreimagesComposeAsAFlow) {
    Gen g(3);
    int checked = 0;
    for (int i = 0; i < kCases; ++i) {
        const auto sys = g.system();
        const auto a = g.set_for(sys);
        const std::int64_t m = g.integer(0, 3), n = g.integer(0, 3);
        if (escapes(sys, a, m + n) || escapes(sys, a, n)) continue;
        const auto once = sys.preimage(a, m + n);
        IntervalSet twice;
        try {
            twice = sys.preimage(sys.preimage(a, n), m);
        } catch (const Error& e) {
            ASSERT_EQ(e.code(), Errc::DomainEscape);
            continue;
        }
        EXPECT_TRUE(approx_equal(once, twice, 1e-9)) << i << " " << sys.id() << " " << a.to_string();
        ++checked;
    }
    EXPECT_GT(checked, kCases / 2);
}

TEST(Property, PreimageMembershipMatchesForwardMap) {
    Gen g(4);
    for (int i = 0; i < kCases; ++i) {
        const auto sys = g.system();
        const auto a = g.set_for(sys);
        const std::int64_t n = g.integer(1, 4);
        if (a.empty() || escapes(sys, a, n)) continue;
        const auto pre = sys.preimage(a, n);
        for (const auto& iv : pre.intervals()) {
            const double x = sys.is_counting() ? std::ceil(iv.left) : 0.5 * (iv.left + iv.right);
            if (!iv.contains(x)) continue;
            EXPECT_TRUE(a.contains(sys.apply(x, n))) << i << " " << sys.id() << " x=" << x;
        }
    }
}

TEST(Property, PushforwardIsEquivariant) {
    // N(T_*^n omega restricted to A) = N(omega restricted to T^{-n} A), point by point.
    Gen g(5);
    for (int i = 0; i < kCases; ++i) {
        const auto sys = i % 2 == 0 ? BaseSystem::boole() : BaseSystem::integer_translation(1);
        const auto a = sys.is_counting() ? g.lattice_set(-5, 5) : g.set(0.2, 4);
        const std::int64_t n = g.integer(1, 3);
        const auto pre = sys.preimage(a, n);
        const auto cfg = sample_poisson(sys, pre, SeededSampler{5, static_cast<std::uint64_t>(i)}, 2.0);
        std::vector<double> moved;
        for (double x : cfg.points) moved.push_back(sys.apply(x, n));
        std::sort(moved.begin(), moved.end());
        EXPECT_EQ(count_points(moved, a), count(cfg, pre)) << i;
    }
}

TEST(Property, IntersectionSequenceIsPositiveDefinite) {
    Gen g(6);
    for (int i = 0; i < 40; ++i) {
        const auto sys = i % 2 == 0 ? BaseSystem::boole() : BaseSystem::integer_translation(1);
        const auto a = sys.is_counting() ? g.lattice_set(-6, 6) : g.set(-3, 3);
        const auto seq = intersect_sequence(sys, a, 8);
        EXPECT_GE(toeplitz_min_eigenvalue(seq), -1e-8) << i;
        for (double r : seq) EXPECT_LE(r, seq[0] + 1e-12);
    }
}

TEST(Property, WanderingIsMonotoneInHorizon) {
    Gen g(7);
    for (int i = 0; i < kCases; ++i) {
        const auto sys = i % 2 == 0 ? BaseSystem::integer_translation(g.integer(1, 3)) : BaseSystem::boole();
        const auto w = sys.is_counting() ? g.lattice_set(0, 6) : g.set(3, 6, 2);
        const std::int64_t big = g.integer(1, 8);
        if (wandering_check(sys, w, big)) {
            for (std::int64_t m = 0; m < big; ++m) EXPECT_TRUE(wandering_check(sys, w, m)) << i << " m=" << m;
        }
    }
}

TEST(Property, SuperpositionOfIndependentSamples) {
    // Counts of the union of two independent samples at intensities s and
    // 1 - s are Poisson(mu(A)).
    Gen g(8);
    for (int i = 0; i < 5; ++i) {
        const auto sys = BaseSystem::boole();
        const auto a = g.set(-2, 2);
        const double s = g.real(0.1, 0.9);
        std::vector<std::int64_t> counts;
        for (std::uint64_t t = 0; t < 10000; ++t) {
            const SeededSampler base{8, t + 100000 * static_cast<std::uint64_t>(i)};
            const auto c1 = sample_poisson(sys, a, base.substream(0), s);
            const auto c2 = sample_poisson(sys, a, base.substream(1), 1.0 - s);
            counts.push_back(static_cast<std::int64_t>(c1.size() + c2.size()));
        }
        EXPECT_GT(poisson_goodness_of_fit(counts, a.length()).p_value, kGofPValue) << i;
    }
}

TEST(Property, FockExponentialIsFunctorial) {
    Gen g(9);
    for (int i = 0; i < 60; ++i) {
        const int d = g.integer(1, 3), k = g.integer(1, 4);
        CounterEngine rng(static_cast<std::uint64_t>(i));
        const CMatrix a = random_contraction(d, rng), b = random_contraction(d, rng);
        const SymFockSpace space(d, k);
        const auto lhs = fock_exponential(a * b, space);
        const auto rhs = fock_exponential(a, space) * fock_exponential(b, space);
        EXPECT_LT((lhs - rhs).hilbert_schmidt_norm(), 1e-12) << i;
        EXPECT_LT((fock_exponential(a.adjoint(), space) - fock_exponential(a, space).adjoint()).hilbert_schmidt_norm(),
                  1e-12)
            << i;
        const double na = spectral_norm(a);
        const auto phi = fock_exponential(a, space);
        for (int level = 0; level <= k; ++level) {
            EXPECT_LE(spectral_norm(phi.block(level)), std::pow(na, level) + 1e-12) << i;
        }
    }
}

TEST(Property, ConvolutionMultipliesMassAndPreservesSymmetry) {
    Gen g(10);
    for (int i = 0; i < 50; ++i) {
        const std::size_t m = static_cast<std::size_t>(g.integer(3, 40));
        std::vector<double> w(m), v(m);
        for (auto& x : w) x = g.real(0, 1);
        for (auto& x : v) x = g.real(0, 1);
        for (std::size_t j = 1; j < m; ++j) v[m - j] = v[j];
        const CircleMeasure a(w), b(v);
        const auto c = convolve(a, b);
        EXPECT_NEAR(c.total_mass(), a.total_mass() * b.total_mass(), 1e-12) << i;
        EXPECT_TRUE(convolve(b, b).is_symmetric(1e-12)) << i;
        const auto e = exp_spectral_type(a.normalized());
        EXPECT_NEAR(e.measure.total_mass(), std::exp(1.0) - 1.0, 1e-11) << i;
    }
}

TEST(Property, LiftedJoiningsAreMassConsistent) {
    Gen g(11);
    const auto sys = BaseSystem::integer_translation(1);
    for (int i = 0; i < kCases; ++i) {
        const double c1 = g.real(0.05, 3), c2 = g.real(0.05, 3);
        GraphSum gamma;
        const int lags = g.integer(1, 3);
        double left = c1;
        for (int j = 0; j < lags; ++j) {
            const double c = j + 1 == lags ? left : left * g.real(0.1, 0.9);
            gamma.weights[g.integer(-4, 4)] += c;
            left -= c;
        }
        const auto spec = lift_c1c2(gamma, c1, c2);
        EXPECT_NO_THROW(spec.validate(sys)) << i;
        EXPECT_NEAR(spec.nu_scale, c1 / c2, 1e-12);
    }
}
