#pragma once

#include <cstdint>
#include <span>

namespace psusp {

/// |z| above this marks a lag inconsistent.
inline constexpr double kInconsistentZ = 4.0;
/// Goodness-of-fit tests pass when p exceeds this.
inline constexpr double kGofPValue = 0.001;

struct Estimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// (estimate - exact) / std_error; zero-error estimates give 0 on an exact
/// match and +-infinity otherwise.
double z_score(double estimate, double std_error, double exact) noexcept;

double mean(std::span<const double> x) noexcept;
/// Unbiased sample standard deviation.
double sample_stddev(std::span<const double> x) noexcept;
/// Sample mean with standard error sd / sqrt(n).
Estimate mean_estimate(std::span<const double> x) noexcept;
/// Unbiased sample covariance with delete-one jackknife standard error (O(n)).
Estimate jackknife_covariance(std::span<const double> x, std::span<const double> y);
/// Pearson correlation; 0 when either side has zero variance.
double correlation(std::span<const double> x, std::span<const double> y) noexcept;

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

/// Upper tail P(chi2_dof > statistic).
double chi_square_upper_tail(double statistic, int dof);

/// Pearson goodness of fit of nonnegative counts against Poisson(lambda).
/// Adjacent cells are pooled until each expects at least 5 observations.
ChiSquareResult poisson_goodness_of_fit(std::span<const std::int64_t> counts, double lambda);

/// Two-sample chi-square homogeneity test on categorical labels. Labels seen
/// fewer than 10 times in the pooled sample share one cell.
ChiSquareResult homogeneity_test(std::span<const std::int64_t> labels_a, std::span<const std::int64_t> labels_b);

}  // namespace psusp
