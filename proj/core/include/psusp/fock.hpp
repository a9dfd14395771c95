#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "psusp/random.hpp"

namespace psusp {

using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;

/// Truncated symmetric Fock space over C^d: chaos levels 0..K, level k
/// spanned by the multisets of size k drawn from {0..d-1} (lexicographic).
class SymFockSpace {
public:
    SymFockSpace(int base_dim, int chaos_cap);

    int base_dim() const noexcept { return d_; }
    int chaos_cap() const noexcept { return k_; }
    const std::vector<std::vector<int>>& level_basis(int level) const { return basis_.at(static_cast<std::size_t>(level)); }
    std::size_t level_size(int level) const { return level_basis(level).size(); }
    /// Offset of a level inside the dense (all-levels) coordinate vector.
    std::size_t offset(int level) const { return offsets_.at(static_cast<std::size_t>(level)); }
    std::size_t total_size() const noexcept { return offsets_.back(); }

    friend bool operator==(const SymFockSpace& a, const SymFockSpace& b) { return a.d_ == b.d_ && a.k_ == b.k_; }

private:
    int d_;
    int k_;
    std::vector<std::vector<std::vector<int>>> basis_;
    std::vector<std::size_t> offsets_;
};

/// Level-diagonal operator on a truncated Fock space.
class FockOperator {
public:
    FockOperator(SymFockSpace space, std::vector<CMatrix> blocks);

    const SymFockSpace& space() const noexcept { return space_; }
    const CMatrix& block(int level) const { return blocks_.at(static_cast<std::size_t>(level)); }
    const std::vector<CMatrix>& blocks() const noexcept { return blocks_; }

    FockOperator operator*(const FockOperator& rhs) const;
    FockOperator operator-(const FockOperator& rhs) const;
    FockOperator adjoint() const;
    CMatrix dense() const;

    /// max over levels of the spectral norm.
    double operator_norm() const;
    double hilbert_schmidt_norm() const;

private:
    SymFockSpace space_;
    std::vector<CMatrix> blocks_;
};

/// Ryser's formula; exact for the small sizes used here.
std::complex<double> permanent(const CMatrix& m);

double spectral_norm(const CMatrix& m);

/// The exponential of a contraction psi: psi^{⊗k} restricted to the
/// symmetric subspace of level k, in the occupation-normalized basis.
/// Block entry (alpha, beta) is perm(psi[alpha, beta]) / sqrt(prod m_alpha! prod m_beta!).
FockOperator fock_exponential(const CMatrix& psi, const SymFockSpace& space);

struct LimitCheckReport {
    std::vector<double> hs_deviations;        ///< ||exp(P_n) - exp(P_inf)||_HS
    std::vector<double> operator_deviations;  ///< ||exp(P_n) - exp(P_inf)|| (max over levels)
    std::vector<double> base_deviations;      ///< ||P_n - P_inf||
    bool non_increasing = true;
    bool strictly_decreasing = true;
    /// Level-k spectral norm of the difference is at most k ||P_n - P_inf||.
    bool bound_holds = true;
};

/// Decreasing orthogonal projections P_1 >= P_2 >= ...; P_inf projects onto
/// the intersection of their ranges.
LimitCheckReport exponential_limit_check(std::span<const CMatrix> projections, const SymFockSpace& space);

struct MarkovRestriction {
    bool is_markov_like = false;
    RMatrix restricted;
    bool is_sub_markov = false;
};

/// Level-1 restriction of a Fock operator; sub-Markov means nonnegative
/// entries, row sums <= 1 and weighted column sums sum_i w_i Q_ij <= w_j.
/// Empty weights mean uniform.
MarkovRestriction markov_restriction_check(const FockOperator& phi, std::span<const double> weights = {});
/// Same check for an operator given densely over all levels; throws
/// Level1NotPreserved if level 1 couples to other levels.
MarkovRestriction markov_restriction_check(const CMatrix& dense_phi, const SymFockSpace& space,
                                           std::span<const double> weights = {});

struct AgeevReport {
    bool simple_per_level = true;
    bool cross_level_disjoint = true;
    std::string first_collision;
};

/// Distinctness of multiset phase sums mod 2 pi within each level k <= K and
/// disjointness across levels, by exhaustive enumeration.
AgeevReport ageev_check(std::span<const double> eigenphases, int chaos_cap, double tol = 1e-9);
/// Runs ageev_check on the eigenphases of a unitary.
AgeevReport ageev_check_unitary(const CMatrix& unitary, int chaos_cap, double tol = 1e-9);

/// Random test matrices. Entries come from `rng` only, so a fixed stream
/// reproduces the same matrices.
CMatrix random_gaussian(int d, CounterEngine& rng);
/// Gaussian matrix rescaled to spectral norm u in (0, 1].
CMatrix random_contraction(int d, CounterEngine& rng);
CMatrix random_unitary(int d, CounterEngine& rng);
CMatrix random_projection(int d, int rank, CounterEngine& rng);
/// Nonnegative, every row and column sum at most 1 (hence a contraction).
RMatrix random_doubly_substochastic(int d, CounterEngine& rng);

struct FockBatteryRow {
    int index = 0;
    int d = 0;
    int k = 0;
    double functoriality = 0.0;   ///< ||exp(AB) - exp(A) exp(B)||_max
    double adjoint = 0.0;         ///< ||exp(A*) - exp(A)*||_max
    double unitarity = 0.0;       ///< ||exp(U)* exp(U) - I||_max
    double projection = 0.0;      ///< idempotence and self-adjointness defect of exp(P)
    double eigenvalues = 0.0;     ///< level-k spectra vs k-multiset products, diagonal psi
    bool norm_bound = true;       ///< level-k norm <= ||psi||^k
    bool sub_markov = true;       ///< exp(Q) restricts to Q and is sub-Markov
    bool limit_decreasing = true; ///< nested projection chain gives strictly decreasing deviations
};

struct FockBatteryReport {
    std::vector<FockBatteryRow> rows;
    double tolerance = 1e-8;
    bool passes() const noexcept;
};

/// Random contractions, unitaries, projections and substochastic matrices
/// with d <= max_d and K <= max_k. Case i uses `sampler.substream(i)`.
FockBatteryReport fock_property_battery(const SeededSampler& sampler, int cases = 20, int max_d = 4, int max_k = 4);

/// CSV with one row per case.
void write_fock_battery_csv(std::ostream& os, const FockBatteryReport& report);

}  // namespace psusp
