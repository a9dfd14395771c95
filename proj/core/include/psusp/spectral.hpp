#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "psusp/base_system.hpp"

namespace psusp {

inline constexpr std::size_t kDefaultGridSize = 4096;

/// Nonnegative measure on the circle, discretized on the lattice
/// theta_j = 2 pi j / M (wrapped into [-pi, pi)). Bin 0 is theta = 0, so
/// circular convolution of weight vectors is convolution of measures.
class CircleMeasure {
public:
    explicit CircleMeasure(std::vector<double> weights);

    static CircleMeasure uniform(std::size_t grid, double mass = 1.0);
    static CircleMeasure spike(std::size_t grid, std::size_t bin, double mass = 1.0);
    /// Spike at the lattice point nearest to theta.
    static CircleMeasure spike_at(std::size_t grid, double theta, double mass = 1.0);
    /// Weights density(theta_j) * 2 pi / M.
    static CircleMeasure from_density(std::size_t grid, const std::function<double(double)>& density);

    std::size_t size() const noexcept { return weights_.size(); }
    std::span<const double> weights() const noexcept { return weights_; }
    double weight(std::size_t bin) const { return weights_.at(bin); }
    double total_mass() const noexcept;

    double angle(std::size_t bin) const noexcept;
    std::size_t bin_of(double theta) const noexcept;
    bool is_symmetric(double tol = 1e-10) const noexcept;

    CircleMeasure normalized() const;
    CircleMeasure scaled(double factor) const;
    /// Removes the atom at theta = 0.
    CircleMeasure without_zero_atom() const;

private:
    std::vector<double> weights_;
};

/// Circular convolution through the real FFT; total masses multiply.
CircleMeasure convolve(const CircleMeasure& a, const CircleMeasure& b);

/// sum_{k = first..last} sigma^{*k} / k!, evaluated in the Fourier domain.
CircleMeasure convolution_series(const CircleMeasure& sigma, int first, int last);

struct ExpSpectralType {
    CircleMeasure measure;
    int order = 0;            ///< truncation order actually used
    double tail_bound = 0.0;  ///< sum_{k > order} 1/k!
};

/// sum_{k=1..K} sigma^{*k}/k! for a probability measure sigma. K is raised
/// to the smallest order whose factorial tail is below `tail_tol`; orders
/// beyond 64 raise TailToleranceUnreachable.
ExpSpectralType exp_spectral_type(const CircleMeasure& sigma, int order = 17, double tail_tol = 1e-12,
                                  bool exclude_zero_atom = false);

/// sum_{k > order} 1/k!, summed directly (no cancellation against e).
double factorial_tail(int order) noexcept;

/// sum over bins of min(a, b) for two probability measures on the same grid.
double overlap(const CircleMeasure& a, const CircleMeasure& b);

struct SingularityCheck {
    double overlap = 0.0;
    double leakage_bound = 0.0;  ///< 2 / M
    bool singular_at_resolution = false;
};

/// Compares normalized sigma with the normalized tail sum_{k>=2} sigma^{*k}/k!.
SingularityCheck convolution_singularity_check(const CircleMeasure& sigma, int order = 17);

/// mu(A ∩ T^{-n} A), n = 0..N, after checking the Toeplitz matrix is
/// positive semidefinite (smallest eigenvalue >= -1e-8).
std::vector<double> spectral_sequence(const BaseSystem& system, const IntervalSet& a, std::int64_t max_lag);

/// Smallest eigenvalue of the symmetric Toeplitz matrix built from r(0..N).
double toeplitz_min_eigenvalue(std::span<const double> sequence);

/// Fejér-smoothed transform of a real positive-definite sequence; mass r(0).
CircleMeasure measure_from_sequence(std::span<const double> sequence, std::size_t grid = kDefaultGridSize);

/// CSV with header `bin_center,weight`, rows in increasing angle.
void write_circle_measure_csv(std::ostream& os, const CircleMeasure& m);
CircleMeasure read_circle_measure_csv(std::istream& is);

}  // namespace psusp
