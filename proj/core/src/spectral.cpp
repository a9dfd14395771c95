#include "psusp/spectral.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <complex>
#include <istream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <string>

#include <Eigen/Dense>
#include <fftw3.h>
#include <fmt/format.h>

#include "psusp/csv.hpp"
#include "psusp/errors.hpp"

namespace psusp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxOrder = 64;

// FFTW's planner is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

using Spectrum = std::vector<std::complex<double>>;

Spectrum forward(std::span<const double> w) {
    const int n = static_cast<int>(w.size());
    std::vector<double> in(w.begin(), w.end());
    Spectrum out(w.size() / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

std::vector<double> inverse(Spectrum spec, std::size_t n) {
    std::vector<double> out(n);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(spec.data()), out.data(),
                                    FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    for (auto& v : out) v /= static_cast<double>(n);
    return out;
}

// Round-off from the transform is zeroed below a floor relative to the mass.
void clean(std::vector<double>& w, double mass, bool symmetrize) {
    const double floor = 64.0 * DBL_EPSILON * std::max(mass, DBL_MIN);
    for (auto& v : w) {
        if (v < floor) v = 0.0;
    }
    if (symmetrize) {
        const std::size_t n = w.size();
        for (std::size_t j = 1; j < (n + 1) / 2; ++j) {
            const double avg = 0.5 * (w[j] + w[n - j]);
            w[j] = avg;
            w[n - j] = avg;
        }
    }
}

void require_same_grid(const CircleMeasure& a, const CircleMeasure& b) {
    if (a.size() != b.size()) {
        throw Error(Errc::GridMismatch, fmt::format("grid sizes {} and {} differ", a.size(), b.size()));
    }
}

void require_probability(const CircleMeasure& m, std::string_view what) {
    if (std::abs(m.total_mass() - 1.0) > 1e-10) {
        throw Error(Errc::InvalidArgument, fmt::format("{} must be normalized (mass {})", what, m.total_mass()));
    }
}

}  // namespace

CircleMeasure::CircleMeasure(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw Error(Errc::InvalidArgument, "circle measure needs at least one bin");
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw Error(Errc::InvalidArgument, "circle measure weights must be finite and >= 0");
    }
}

CircleMeasure CircleMeasure::uniform(std::size_t grid, double mass) {
    return CircleMeasure(std::vector<double>(grid, mass / static_cast<double>(grid)));
}

CircleMeasure CircleMeasure::spike(std::size_t grid, std::size_t bin, double mass) {
    std::vector<double> w(grid, 0.0);
    w.at(bin) = mass;
    return CircleMeasure(std::move(w));
}

CircleMeasure CircleMeasure::spike_at(std::size_t grid, double theta, double mass) {
    const CircleMeasure probe(std::vector<double>(grid, 0.0));
    return spike(grid, probe.bin_of(theta), mass);
}

CircleMeasure CircleMeasure::from_density(std::size_t grid, const std::function<double(double)>& density) {
    std::vector<double> w(grid);
    const CircleMeasure probe(std::vector<double>(grid, 0.0));
    for (std::size_t j = 0; j < grid; ++j) w[j] = density(probe.angle(j)) * kTwoPi / static_cast<double>(grid);
    return CircleMeasure(std::move(w));
}

double CircleMeasure::total_mass() const noexcept {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
}

double CircleMeasure::angle(std::size_t bin) const noexcept {
    double theta = kTwoPi * static_cast<double>(bin) / static_cast<double>(weights_.size());
    if (theta >= std::numbers::pi) theta -= kTwoPi;
    return theta;
}

std::size_t CircleMeasure::bin_of(double theta) const noexcept {
    const auto m = static_cast<long long>(weights_.size());
    auto j = static_cast<long long>(std::llround(theta * static_cast<double>(m) / kTwoPi)) % m;
    if (j < 0) j += m;
    return static_cast<std::size_t>(j);
}

bool CircleMeasure::is_symmetric(double tol) const noexcept {
    const std::size_t n = weights_.size();
    for (std::size_t j = 1; j < n; ++j) {
        if (std::abs(weights_[j] - weights_[n - j]) > tol) return false;
    }
    return true;
}

CircleMeasure CircleMeasure::normalized() const {
    const double mass = total_mass();
    if (!(mass > 0.0)) throw Error(Errc::InvalidArgument, "cannot normalize a zero measure");
    return scaled(1.0 / mass);
}

CircleMeasure CircleMeasure::scaled(double factor) const {
    std::vector<double> w(weights_);
    for (auto& v : w) v *= factor;
    return CircleMeasure(std::move(w));
}

CircleMeasure CircleMeasure::without_zero_atom() const {
    std::vector<double> w(weights_);
    w[0] = 0.0;
    return CircleMeasure(std::move(w));
}

CircleMeasure convolve(const CircleMeasure& a, const CircleMeasure& b) {
    require_same_grid(a, b);
    auto fa = forward(a.weights());
    const auto fb = forward(b.weights());
    for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
    auto w = inverse(std::move(fa), a.size());
    clean(w, a.total_mass() * b.total_mass(), a.is_symmetric() && b.is_symmetric());
    return CircleMeasure(std::move(w));
}

CircleMeasure convolution_series(const CircleMeasure& sigma, int first, int last) {
    if (first < 1 || last < first) throw Error(Errc::InvalidArgument, "need 1 <= first <= last");
    const auto base = forward(sigma.weights());
    Spectrum sum(base.size());
    double mass_sum = 0.0;
    const double mass = sigma.total_mass();
    for (std::size_t i = 0; i < base.size(); ++i) {
        std::complex<double> term = 1.0;
        for (int k = 1; k <= last; ++k) {
            term *= base[i] / static_cast<double>(k);
            if (k >= first) sum[i] += term;
        }
    }
    double term = 1.0;
    for (int k = 1; k <= last; ++k) {
        term *= mass / static_cast<double>(k);
        if (k >= first) mass_sum += term;
    }
    auto w = inverse(std::move(sum), sigma.size());
    clean(w, mass_sum, sigma.is_symmetric());
    return CircleMeasure(std::move(w));
}

double factorial_tail(int order) noexcept {
    double term = 1.0;
    for (int k = 1; k <= order; ++k) term /= static_cast<double>(k);
    double tail = 0.0;
    for (int k = order + 1; k <= order + 80; ++k) {
        term /= static_cast<double>(k);
        tail += term;
        if (term == 0.0) break;
    }
    return tail;
}

ExpSpectralType exp_spectral_type(const CircleMeasure& sigma, int order, double tail_tol, bool exclude_zero_atom) {
    if (order < 1) throw Error(Errc::InvalidArgument, "truncation order must be at least 1");
    if (order > kMaxOrder) {
        throw Error(Errc::TailToleranceUnreachable, fmt::format("order {} exceeds {}", order, kMaxOrder));
    }
    CircleMeasure base = sigma;
    require_probability(base, "sigma");
    if (exclude_zero_atom) base = base.without_zero_atom().normalized();
    int used = order;
    while (!(factorial_tail(used) < tail_tol)) {
        if (++used > kMaxOrder) {
            throw Error(Errc::TailToleranceUnreachable,
                        fmt::format("no order <= {} reaches tail tolerance {}", kMaxOrder, tail_tol));
        }
    }
    return {convolution_series(base, 1, used), used, factorial_tail(used)};
}

double overlap(const CircleMeasure& a, const CircleMeasure& b) {
    require_same_grid(a, b);
    require_probability(a, "first measure");
    require_probability(b, "second measure");
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::min(a.weights()[j], b.weights()[j]);
    return std::clamp(s, 0.0, 1.0);
}

SingularityCheck convolution_singularity_check(const CircleMeasure& sigma, int order) {
    const auto base = sigma.normalized();
    const auto tail = convolution_series(base, 2, std::max(order, 2)).normalized();
    SingularityCheck out;
    out.overlap = overlap(base, tail);
    out.leakage_bound = 2.0 / static_cast<double>(sigma.size());
    out.singular_at_resolution = out.overlap < out.leakage_bound;
    return out;
}

double toeplitz_min_eigenvalue(std::span<const double> sequence) {
    const auto n = static_cast<Eigen::Index>(sequence.size());
    if (n == 0) return 0.0;
    Eigen::MatrixXd t(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) t(i, j) = sequence[static_cast<std::size_t>(std::abs(i - j))];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

std::vector<double> spectral_sequence(const BaseSystem& system, const IntervalSet& a, std::int64_t max_lag) {
    auto seq = intersect_sequence(system, a, max_lag);
    const double min_eig = toeplitz_min_eigenvalue(seq);
    if (min_eig < -1e-8) {
        throw Error(Errc::NotPositiveDefinite, fmt::format("Toeplitz matrix has eigenvalue {}", min_eig));
    }
    return seq;
}

CircleMeasure measure_from_sequence(std::span<const double> sequence, std::size_t grid) {
    if (sequence.empty()) throw Error(Errc::InvalidArgument, "empty sequence");
    const std::size_t n_max = sequence.size() - 1;
    std::vector<double> w(grid);
    const CircleMeasure probe(std::vector<double>(grid, 0.0));
    for (std::size_t j = 0; j < grid; ++j) {
        const double theta = probe.angle(j);
        double s = sequence[0];
        for (std::size_t n = 1; n <= n_max; ++n) {
            const double fejer = 1.0 - static_cast<double>(n) / static_cast<double>(n_max + 1);
            s += 2.0 * fejer * sequence[n] * std::cos(static_cast<double>(n) * theta);
        }
        w[j] = std::max(0.0, s / static_cast<double>(grid));
    }
    return CircleMeasure(std::move(w));
}

void write_circle_measure_csv(std::ostream& os, const CircleMeasure& m) {
    os << "bin_center,weight\n";
    const std::size_t n = m.size();
    const std::size_t start = (n + 1) / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (start + i) % n;
        os << csv::real(m.angle(j)) << ',' << csv::real(m.weights()[j]) << '\n';
    }
}

CircleMeasure read_circle_measure_csv(std::istream& is) {
    std::string line;
    std::vector<std::pair<double, double>> rows;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("bin_center", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error(Errc::ParseError, fmt::format("line {}: expected two columns", line_no));
        try {
            rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw Error(Errc::ParseError, fmt::format("line {}: malformed number", line_no));
        }
    }
    if (rows.empty()) throw Error(Errc::ParseError, "no measure rows");
    std::vector<double> w(rows.size(), 0.0);
    const CircleMeasure probe(std::vector<double>(rows.size(), 0.0));
    std::vector<bool> seen(rows.size(), false);
    for (const auto& [theta, weight] : rows) {
        const auto j = probe.bin_of(theta);
        if (std::abs(std::remainder(theta - probe.angle(j), kTwoPi)) > 1e-9 || seen[j]) {
            throw Error(Errc::ParseError, fmt::format("bin center {} is not on a uniform grid of {} bins", theta, rows.size()));
        }
        seen[j] = true;
        w[j] = weight;
    }
    return CircleMeasure(std::move(w));
}

}  // namespace psusp
