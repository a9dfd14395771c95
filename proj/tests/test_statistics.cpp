#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "psusp/errors.hpp"
#include "psusp/statistics.hpp"

using namespace psusp;

namespace {

double naive_cov(const std::vector<double>& x, const std::vector<double>& y, std::size_t skip) {
    double mx = 0, my = 0, n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i == skip) continue;
        mx += x[i];
        my += y[i];
        n += 1;
    }
    mx /= n;
    my /= n;
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i != skip) s += (x[i] - mx) * (y[i] - my);
    }
    return s / (n - 1);
}

}  // namespace

TEST(Statistics, ZScore) {
    EXPECT_DOUBLE_EQ(z_score(1.5, 0.5, 1.0), 1.0);
    EXPECT_EQ(z_score(1.0, 0.0, 1.0), 0.0);
    EXPECT_TRUE(std::isinf(z_score(1.1, 0.0, 1.0)));
}

TEST(Statistics, MeanAndStddev) {
    const std::vector<double> x{1, 2, 3, 4};
    EXPECT_DOUBLE_EQ(mean(x), 2.5);
    EXPECT_NEAR(sample_stddev(x), std::sqrt(5.0 / 3.0), 1e-15);
    const auto e = mean_estimate(x);
    EXPECT_NEAR(e.std_error, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
}

TEST(Statistics, JackknifeMatchesBruteForce) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::vector<double> x(57), y(57);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = g(rng);
        y[i] = 0.4 * x[i] + g(rng) + 100.0;
    }
    const auto est = jackknife_covariance(x, y);
    const auto n = x.size();
    EXPECT_NEAR(est.estimate, naive_cov(x, y, n), 1e-12);
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i) loo[i] = naive_cov(x, y, i);
    double m = 0;
    for (double v : loo) m += v;
    m /= static_cast<double>(n);
    double ss = 0;
    for (double v : loo) ss += (v - m) * (v - m);
    EXPECT_NEAR(est.std_error, std::sqrt((n - 1.0) / n * ss), 1e-12);
}

TEST(Statistics, JackknifeRejectsBadInput) {
    const std::vector<double> a{1, 2}, b{1, 2, 3};
    EXPECT_THROW(jackknife_covariance(a, b), Error);
    EXPECT_THROW(jackknife_covariance(a, a), Error);
}

TEST(Statistics, Correlation) {
    const std::vector<double> x{1, 2, 3}, y{2, 4, 6}, z{3, 2, 1}, c{5, 5, 5};
    EXPECT_NEAR(correlation(x, y), 1.0, 1e-15);
    EXPECT_NEAR(correlation(x, z), -1.0, 1e-15);
    EXPECT_EQ(correlation(x, c), 0.0);
}

TEST(Statistics, ChiSquareTailClosedForms) {
    for (double s : {0.1, 1.0, 3.7, 12.0}) {
        EXPECT_NEAR(chi_square_upper_tail(s, 2), std::exp(-s / 2), 1e-14);
        EXPECT_NEAR(chi_square_upper_tail(s, 1), std::erfc(std::sqrt(s / 2)), 1e-14);
    }
    EXPECT_EQ(chi_square_upper_tail(0.0, 3), 1.0);
    EXPECT_EQ(chi_square_upper_tail(5.0, 0), 1.0);
}

TEST(Statistics, PoissonFitAcceptsPoissonRejectsGeometric) {
    std::mt19937_64 rng(11);
    std::poisson_distribution<std::int64_t> pois(2.0);
    std::geometric_distribution<std::int64_t> geo(1.0 / 3.0);  // same mean 2
    std::vector<std::int64_t> a(20000), b(20000);
    for (auto& v : a) v = pois(rng);
    for (auto& v : b) v = geo(rng);
    const auto ra = poisson_goodness_of_fit(a, 2.0);
    EXPECT_GT(ra.dof, 3);
    EXPECT_GT(ra.p_value, kGofPValue);
    EXPECT_LT(poisson_goodness_of_fit(b, 2.0).p_value, 1e-12);
    EXPECT_LT(poisson_goodness_of_fit(a, 2.3).p_value, 1e-12);
}

TEST(Statistics, PoissonFitZeroMean) {
    const std::vector<std::int64_t> z(10, 0), nz{0, 1};
    EXPECT_EQ(poisson_goodness_of_fit(z, 0.0).p_value, 1.0);
    EXPECT_EQ(poisson_goodness_of_fit(nz, 0.0).p_value, 0.0);
    EXPECT_THROW(poisson_goodness_of_fit(z, -1.0), Error);
}

TEST(Statistics, HomogeneityHandComputed) {
    // Two cells, 60/40 against 40/60: statistic = 4 * 10^2 / 50 = 8.
    std::vector<std::int64_t> a, b;
    a.insert(a.end(), 60, 0);
    a.insert(a.end(), 40, 1);
    b.insert(b.end(), 40, 0);
    b.insert(b.end(), 60, 1);
    const auto r = homogeneity_test(a, b);
    EXPECT_EQ(r.dof, 1);
    EXPECT_NEAR(r.statistic, 8.0, 1e-12);
    EXPECT_NEAR(r.p_value, std::erfc(std::sqrt(4.0)), 1e-14);
    EXPECT_NEAR(homogeneity_test(a, a).statistic, 0.0, 1e-15);
}
