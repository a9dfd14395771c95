#include "psusp/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "psusp/csv.hpp"
#include "psusp/errors.hpp"

namespace psusp {

namespace {

constexpr double kStructureTol = 1e-10;

void multisets(int d, int size, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == size) {
        out.push_back(cur);
        return;
    }
    for (int i = start; i < d; ++i) {
        cur.push_back(i);
        multisets(d, size, i, cur, out);
        cur.pop_back();
    }
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// prod_i m_i! over the occupation numbers of a sorted multiset.
double occupation_factor(const std::vector<int>& alpha) {
    double f = 1.0;
    std::size_t i = 0;
    while (i < alpha.size()) {
        std::size_t j = i;
        while (j < alpha.size() && alpha[j] == alpha[i]) ++j;
        f *= factorial(static_cast<int>(j - i));
        i = j;
    }
    return f;
}

bool is_projection(const CMatrix& p) {
    return (p * p - p).norm() <= kStructureTol * std::max<double>(1.0, static_cast<double>(p.rows())) &&
           (p - p.adjoint()).norm() <= kStructureTol * std::max<double>(1.0, static_cast<double>(p.rows()));
}

std::vector<double> resolve_weights(std::span<const double> weights, int d) {
    if (weights.empty()) return std::vector<double>(static_cast<std::size_t>(d), 1.0);
    if (static_cast<int>(weights.size()) != d) {
        throw Error(Errc::InvalidArgument, fmt::format("expected {} stationary weights, got {}", d, weights.size()));
    }
    for (double w : weights) {
        if (!(w > 0.0)) throw Error(Errc::InvalidArgument, "stationary weights must be positive");
    }
    return {weights.begin(), weights.end()};
}

MarkovRestriction restrict_level_one(const CMatrix& dense, const SymFockSpace& space, std::span<const double> weights) {
    const int d = space.base_dim();
    const auto w = resolve_weights(weights, d);
    const auto off = static_cast<Eigen::Index>(space.offset(1));
    MarkovRestriction out;

    bool real_nonneg = true;
    for (Eigen::Index i = 0; i < dense.rows(); ++i) {
        for (Eigen::Index j = 0; j < dense.cols(); ++j) {
            const auto v = dense(i, j);
            if (std::abs(v.imag()) > 1e-12 || v.real() < -1e-12) real_nonneg = false;
        }
    }
    bool vacuum_fixed = std::abs(dense(0, 0) - 1.0) <= kStructureTol;
    for (Eigen::Index i = 1; i < dense.rows(); ++i) {
        vacuum_fixed = vacuum_fixed && std::abs(dense(i, 0)) <= kStructureTol && std::abs(dense(0, i)) <= kStructureTol;
    }

    out.restricted = dense.block(off, off, d, d).real();
    const auto& q = out.restricted;
    bool fixes_constants = true;
    bool sub = true;
    for (int i = 0; i < d; ++i) {
        double row = 0.0;
        for (int j = 0; j < d; ++j) {
            if (q(i, j) < -1e-12 || std::abs(dense(off + i, off + j).imag()) > 1e-12) sub = false;
            row += q(i, j);
        }
        if (row > 1.0 + kStructureTol) sub = false;
        if (std::abs(row - 1.0) > kStructureTol) fixes_constants = false;
    }
    for (int j = 0; j < d; ++j) {
        double col = 0.0;
        for (int i = 0; i < d; ++i) col += w[static_cast<std::size_t>(i)] * q(i, j);
        if (col > w[static_cast<std::size_t>(j)] + kStructureTol) sub = false;
    }
    out.is_sub_markov = sub;
    out.is_markov_like = real_nonneg && vacuum_fixed && fixes_constants;
    return out;
}

}  // namespace

SymFockSpace::SymFockSpace(int base_dim, int chaos_cap) : d_(base_dim), k_(chaos_cap) {
    if (base_dim < 1) throw Error(Errc::InvalidArgument, "base dimension must be positive");
    if (chaos_cap < 1) throw Error(Errc::InvalidArgument, "chaos cap must be at least 1");
    offsets_.push_back(0);
    for (int k = 0; k <= chaos_cap; ++k) {
        std::vector<std::vector<int>> level;
        std::vector<int> cur;
        multisets(base_dim, k, 0, cur, level);
        offsets_.push_back(offsets_.back() + level.size());
        basis_.push_back(std::move(level));
    }
}

FockOperator::FockOperator(SymFockSpace space, std::vector<CMatrix> blocks)
    : space_(std::move(space)), blocks_(std::move(blocks)) {
    if (static_cast<int>(blocks_.size()) != space_.chaos_cap() + 1) {
        throw Error(Errc::InvalidArgument, "one block per chaos level is required");
    }
    for (int k = 0; k <= space_.chaos_cap(); ++k) {
        const auto n = static_cast<Eigen::Index>(space_.level_size(k));
        if (blocks_[static_cast<std::size_t>(k)].rows() != n || blocks_[static_cast<std::size_t>(k)].cols() != n) {
            throw Error(Errc::InvalidArgument, fmt::format("block {} must be {}x{}", k, n, n));
        }
    }
}

FockOperator FockOperator::operator*(const FockOperator& rhs) const {
    if (!(space_ == rhs.space_)) throw Error(Errc::InvalidArgument, "Fock spaces differ");
    std::vector<CMatrix> out;
    for (std::size_t k = 0; k < blocks_.size(); ++k) out.push_back(blocks_[k] * rhs.blocks_[k]);
    return {space_, std::move(out)};
}

FockOperator FockOperator::operator-(const FockOperator& rhs) const {
    if (!(space_ == rhs.space_)) throw Error(Errc::InvalidArgument, "Fock spaces differ");
    std::vector<CMatrix> out;
    for (std::size_t k = 0; k < blocks_.size(); ++k) out.push_back(blocks_[k] - rhs.blocks_[k]);
    return {space_, std::move(out)};
}

FockOperator FockOperator::adjoint() const {
    std::vector<CMatrix> out;
    for (const auto& b : blocks_) out.push_back(b.adjoint());
    return {space_, std::move(out)};
}

CMatrix FockOperator::dense() const {
    const auto n = static_cast<Eigen::Index>(space_.total_size());
    CMatrix out = CMatrix::Zero(n, n);
    for (int k = 0; k <= space_.chaos_cap(); ++k) {
        const auto off = static_cast<Eigen::Index>(space_.offset(k));
        const auto& b = blocks_[static_cast<std::size_t>(k)];
        out.block(off, off, b.rows(), b.cols()) = b;
    }
    return out;
}

double FockOperator::operator_norm() const {
    double m = 0.0;
    for (const auto& b : blocks_) m = std::max(m, spectral_norm(b));
    return m;
}

double FockOperator::hilbert_schmidt_norm() const {
    double s = 0.0;
    for (const auto& b : blocks_) s += b.squaredNorm();
    return std::sqrt(s);
}

std::complex<double> permanent(const CMatrix& m) {
    const auto n = m.rows();
    if (m.cols() != n) throw Error(Errc::InvalidArgument, "permanent needs a square matrix");
    if (n == 0) return 1.0;
    if (n > 24) throw Error(Errc::InvalidArgument, "permanent size too large");
    std::complex<double> total = 0.0;
    const std::uint64_t subsets = std::uint64_t{1} << n;
    for (std::uint64_t s = 1; s < subsets; ++s) {
        std::complex<double> prod = 1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            std::complex<double> row = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (s & (std::uint64_t{1} << j)) row += m(i, j);
            }
            prod *= row;
        }
        const int bits = std::popcount(s);
        total += ((n - bits) % 2 == 0) ? prod : -prod;
    }
    return total;
}

double spectral_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

FockOperator fock_exponential(const CMatrix& psi, const SymFockSpace& space) {
    const int d = space.base_dim();
    if (psi.rows() != d || psi.cols() != d) {
        throw Error(Errc::InvalidArgument, fmt::format("psi must be {}x{}", d, d));
    }
    const double norm = spectral_norm(psi);
    if (norm > 1.0 + 1e-10) throw Error(Errc::NormExceeded, fmt::format("||psi|| = {} exceeds 1", norm));

    std::vector<CMatrix> blocks;
    for (int k = 0; k <= space.chaos_cap(); ++k) {
        const auto& basis = space.level_basis(k);
        const auto n = static_cast<Eigen::Index>(basis.size());
        CMatrix block(n, n);
        std::vector<double> norms(basis.size());
        for (std::size_t a = 0; a < basis.size(); ++a) norms[a] = std::sqrt(occupation_factor(basis[a]));
        CMatrix sub(k, k);
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = 0; b < n; ++b) {
                const auto& alpha = basis[static_cast<std::size_t>(a)];
                const auto& beta = basis[static_cast<std::size_t>(b)];
                for (int i = 0; i < k; ++i) {
                    for (int j = 0; j < k; ++j) sub(i, j) = psi(alpha[static_cast<std::size_t>(i)], beta[static_cast<std::size_t>(j)]);
                }
                block(a, b) = permanent(sub) / (norms[static_cast<std::size_t>(a)] * norms[static_cast<std::size_t>(b)]);
            }
        }
        blocks.push_back(std::move(block));
    }
    return {space, std::move(blocks)};
}

LimitCheckReport exponential_limit_check(std::span<const CMatrix> projections, const SymFockSpace& space) {
    if (projections.empty()) throw Error(Errc::InvalidArgument, "need at least one projection");
    for (std::size_t n = 0; n < projections.size(); ++n) {
        if (!is_projection(projections[n])) {
            throw Error(Errc::NotProjection, fmt::format("P_{} is not an orthogonal projection", n + 1));
        }
        if (n > 0) {
            const auto& prev = projections[n - 1];
            const auto& cur = projections[n];
            if ((cur * prev - cur).norm() > kStructureTol * std::max<double>(1.0, static_cast<double>(cur.rows()))) {
                throw Error(Errc::NotDecreasing, fmt::format("range of P_{} is not inside range of P_{}", n + 1, n));
            }
        }
    }
    // For a decreasing family the intersection of ranges is the range of the last element.
    const CMatrix& limit = projections.back();
    const auto limit_exp = fock_exponential(limit, space);

    LimitCheckReport report;
    for (const auto& p : projections) {
        const auto diff = fock_exponential(p, space) - limit_exp;
        const double base = spectral_norm(p - limit);
        report.hs_deviations.push_back(diff.hilbert_schmidt_norm());
        report.operator_deviations.push_back(diff.operator_norm());
        report.base_deviations.push_back(base);
        for (int k = 0; k <= space.chaos_cap(); ++k) {
            if (spectral_norm(diff.block(k)) > k * base + 1e-10) report.bound_holds = false;
        }
    }
    for (std::size_t n = 1; n < report.hs_deviations.size(); ++n) {
        const double prev = report.hs_deviations[n - 1];
        const double cur = report.hs_deviations[n];
        if (cur > prev + 1e-12) report.non_increasing = false;
        if (!(cur < prev - 1e-12)) report.strictly_decreasing = false;
    }
    return report;
}

MarkovRestriction markov_restriction_check(const FockOperator& phi, std::span<const double> weights) {
    return restrict_level_one(phi.dense(), phi.space(), weights);
}

MarkovRestriction markov_restriction_check(const CMatrix& dense_phi, const SymFockSpace& space,
                                           std::span<const double> weights) {
    const auto n = static_cast<Eigen::Index>(space.total_size());
    if (dense_phi.rows() != n || dense_phi.cols() != n) {
        throw Error(Errc::InvalidArgument, fmt::format("dense operator must be {}x{}", n, n));
    }
    const auto lo = static_cast<Eigen::Index>(space.offset(1));
    const auto hi = static_cast<Eigen::Index>(space.offset(2));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const bool in1_i = i >= lo && i < hi;
            const bool in1_j = j >= lo && j < hi;
            if (in1_i != in1_j && std::abs(dense_phi(i, j)) > kStructureTol) {
                throw Error(Errc::Level1NotPreserved,
                            fmt::format("entry ({}, {}) couples level 1 to another level", i, j));
            }
        }
    }
    return restrict_level_one(dense_phi, space, weights);
}

AgeevReport ageev_check(std::span<const double> eigenphases, int chaos_cap, double tol) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (eigenphases.empty()) throw Error(Errc::DegeneratePhases, "no eigenphases");
    if (chaos_cap < 1) throw Error(Errc::InvalidArgument, "chaos cap must be at least 1");
    auto circ = [&](double a, double b) { return std::abs(std::remainder(a - b, two_pi)); };
    for (double p : eigenphases) {
        if (!(p >= 0.0 && p < two_pi)) throw Error(Errc::InvalidArgument, fmt::format("phase {} outside [0, 2pi)", p));
    }
    for (std::size_t i = 0; i < eigenphases.size(); ++i) {
        for (std::size_t j = i + 1; j < eigenphases.size(); ++j) {
            if (circ(eigenphases[i], eigenphases[j]) <= tol) {
                throw Error(Errc::DegeneratePhases, fmt::format("phases {} and {} coincide", eigenphases[i], eigenphases[j]));
            }
        }
    }

    struct Sum {
        int level;
        std::vector<int> multiset;
        double value;
    };
    std::vector<Sum> sums;
    const int d = static_cast<int>(eigenphases.size());
    for (int k = 1; k <= chaos_cap; ++k) {
        std::vector<std::vector<int>> level;
        std::vector<int> cur;
        multisets(d, k, 0, cur, level);
        for (auto& m : level) {
            double s = 0.0;
            for (int i : m) s += eigenphases[static_cast<std::size_t>(i)];
            sums.push_back({k, std::move(m), std::fmod(s, two_pi)});
        }
    }

    AgeevReport report;
    for (std::size_t i = 0; i < sums.size(); ++i) {
        for (std::size_t j = i + 1; j < sums.size(); ++j) {
            if (circ(sums[i].value, sums[j].value) > tol) continue;
            if (report.first_collision.empty()) {
                report.first_collision = fmt::format("level {} multiset {} and level {} multiset {} share phase {}",
                                                     sums[i].level, fmt::join(sums[i].multiset, ","), sums[j].level,
                                                     fmt::join(sums[j].multiset, ","), sums[i].value);
            }
            if (sums[i].level == sums[j].level) {
                report.simple_per_level = false;
            } else {
                report.cross_level_disjoint = false;
            }
        }
    }
    return report;
}

AgeevReport ageev_check_unitary(const CMatrix& unitary, int chaos_cap, double tol) {
    Eigen::ComplexEigenSolver<CMatrix> solver(unitary);
    std::vector<double> phases;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        double p = std::arg(solver.eigenvalues()(i));
        if (p < 0.0) p += 2.0 * std::numbers::pi;
        if (p >= 2.0 * std::numbers::pi) p = 0.0;
        phases.push_back(p);
    }
    return ageev_check(phases, chaos_cap, tol);
}

CMatrix random_gaussian(int d, CounterEngine& rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    CMatrix g(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const double re = normal(rng);
            g(i, j) = {re, normal(rng)};
        }
    }
    return g;
}

CMatrix random_contraction(int d, CounterEngine& rng) {
    CMatrix g = random_gaussian(d, rng);
    const double u = 0.5 + 0.5 * (1.0 - rng.uniform());
    return g * (u / spectral_norm(g));
}

CMatrix random_unitary(int d, CounterEngine& rng) {
    Eigen::HouseholderQR<CMatrix> qr(random_gaussian(d, rng));
    return qr.householderQ() * CMatrix::Identity(d, d);
}

CMatrix random_projection(int d, int rank, CounterEngine& rng) {
    const CMatrix u = random_unitary(d, rng);
    Eigen::VectorXcd diag = Eigen::VectorXcd::Zero(d);
    for (int i = 0; i < rank; ++i) diag(i) = 1.0;
    return u * diag.asDiagonal() * u.adjoint();
}

RMatrix random_doubly_substochastic(int d, CounterEngine& rng) {
    RMatrix q(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) q(i, j) = rng.uniform();
    }
    const double worst = std::max(q.rowwise().sum().maxCoeff(), q.colwise().sum().maxCoeff());
    return q * ((0.5 + 0.5 * (1.0 - rng.uniform())) / worst);
}

namespace {

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// k-multiset products of `values`, matched greedily against `eig`.
double spectrum_mismatch(const Eigen::VectorXcd& eig, const std::vector<std::complex<double>>& expected) {
    std::vector<bool> used(expected.size(), false);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t j = 0; j < expected.size(); ++j) {
            if (used[j]) continue;
            const double dist = std::abs(eig(i) - expected[j]);
            if (dist < best) {
                best = dist;
                arg = j;
            }
        }
        used[arg] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

std::vector<std::complex<double>> multiset_products(const SymFockSpace& space, int k, const Eigen::VectorXcd& values) {
    std::vector<std::complex<double>> out;
    for (const auto& alpha : space.level_basis(k)) {
        std::complex<double> p = 1.0;
        for (int i : alpha) p *= values(i);
        out.push_back(p);
    }
    return out;
}

FockBatteryRow battery_case(int index, int d, int k, CounterEngine& rng) {
    const SymFockSpace space(d, k);
    FockBatteryRow row;
    row.index = index;
    row.d = d;
    row.k = k;

    const CMatrix a = random_contraction(d, rng);
    const CMatrix b = random_contraction(d, rng);
    const auto ea = fock_exponential(a, space);
    row.functoriality = max_abs(fock_exponential(a * b, space).dense() - (ea * fock_exponential(b, space)).dense());
    row.adjoint = max_abs(fock_exponential(a.adjoint(), space).dense() - ea.adjoint().dense());
    const double na = spectral_norm(a);
    for (int level = 0; level <= k; ++level) {
        if (spectral_norm(ea.block(level)) > std::pow(na, level) + 1e-10) row.norm_bound = false;
    }

    const auto eu = fock_exponential(random_unitary(d, rng), space).dense();
    row.unitarity = max_abs(eu.adjoint() * eu - CMatrix::Identity(eu.rows(), eu.cols()));

    const int rank = static_cast<int>(rng() % static_cast<std::uint64_t>(d + 1));
    const auto ep = fock_exponential(random_projection(d, rank, rng), space).dense();
    row.projection = std::max(max_abs(ep * ep - ep), max_abs(ep - ep.adjoint()));

    // Diagonal psi: blocks are exactly diagonal with multiset products.
    // Normal psi: block spectra match the same products up to rounding.
    Eigen::VectorXcd values(d);
    for (int i = 0; i < d; ++i) values(i) = std::polar(std::sqrt(rng.uniform()), 2.0 * std::numbers::pi * rng.uniform());
    const CMatrix diag = values.asDiagonal();
    const CMatrix v = random_unitary(d, rng);
    const auto ed = fock_exponential(diag, space);
    const auto en = fock_exponential(v * diag * v.adjoint(), space);
    for (int level = 0; level <= k; ++level) {
        const auto expected = multiset_products(space, level, values);
        Eigen::VectorXcd ev(static_cast<Eigen::Index>(expected.size()));
        for (std::size_t i = 0; i < expected.size(); ++i) ev(static_cast<Eigen::Index>(i)) = expected[i];
        const CMatrix want = ev.asDiagonal();
        row.eigenvalues = std::max(row.eigenvalues, max_abs(ed.block(level) - want));
        Eigen::ComplexEigenSolver<CMatrix> solver(en.block(level));
        row.eigenvalues = std::max(row.eigenvalues, spectrum_mismatch(solver.eigenvalues(), expected));
    }

    const RMatrix q = random_doubly_substochastic(d, rng);
    const auto mr = markov_restriction_check(fock_exponential(q.cast<std::complex<double>>(), space));
    row.sub_markov = mr.is_sub_markov && (mr.restricted - q).cwiseAbs().maxCoeff() <= 1e-12;

    // Coordinate projections of rank d, d-1, ..., 0 in a random frame.
    const CMatrix frame = random_unitary(d, rng);
    std::vector<CMatrix> chain;
    for (int r = d; r >= 0; --r) {
        Eigen::VectorXcd keep = Eigen::VectorXcd::Zero(d);
        for (int i = 0; i < r; ++i) keep(i) = 1.0;
        CMatrix p = frame * keep.asDiagonal() * frame.adjoint();
        p = 0.5 * (p + p.adjoint());
        chain.push_back(p);
    }
    const auto lc = exponential_limit_check(chain, space);
    row.limit_decreasing = lc.strictly_decreasing && lc.bound_holds;
    return row;
}

}  // namespace

bool FockBatteryReport::passes() const noexcept {
    return std::all_of(rows.begin(), rows.end(), [&](const FockBatteryRow& r) {
        return r.functoriality <= tolerance && r.adjoint <= tolerance && r.unitarity <= tolerance &&
               r.projection <= tolerance && r.eigenvalues <= tolerance && r.norm_bound && r.sub_markov &&
               r.limit_decreasing;
    });
}

FockBatteryReport fock_property_battery(const SeededSampler& sampler, int cases, int max_d, int max_k) {
    if (cases < 1 || max_d < 1 || max_k < 1) throw Error(Errc::InvalidArgument, "battery sizes must be positive");
    FockBatteryReport report;
    for (int i = 0; i < cases; ++i) {
        auto rng = sampler.substream(static_cast<std::uint64_t>(i)).engine();
        const int d = 1 + i % max_d;
        const int k = 1 + (i / max_d) % max_k;
        report.rows.push_back(battery_case(i, d, k, rng));
    }
    return report;
}

void write_fock_battery_csv(std::ostream& os, const FockBatteryReport& report) {
    os << "case,d,K,functoriality,adjoint,unitarity,projection,eigenvalues,norm_bound,sub_markov,limit_decreasing\n";
    for (const auto& r : report.rows) {
        os << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.index, r.d, r.k, csv::real(r.functoriality),
                          csv::real(r.adjoint), csv::real(r.unitarity), csv::real(r.projection),
                          csv::real(r.eigenvalues), int{r.norm_bound}, int{r.sub_markov}, int{r.limit_decreasing});
    }
}

}  // namespace psusp
