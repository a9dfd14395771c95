#include "runner.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace psusp::cli {

namespace {

// Fixed once for all presets; not tuned per preset.
constexpr std::uint64_t kPresetSeed = 20261015;

constexpr const char* kRigidTower = R"(system = rankone
rankone.cuts = 3 3 3 12
rankone.spacers.0 = 0 0 1
rankone.spacers.1 = 0 0 1
rankone.spacers.2 = 0 0 1
rankone.spacers.3 = 0 0 0 0 0 0 0 0 0 0 0 40
rankone.base_width = 27
)";

std::vector<Preset> build() {
    std::vector<Preset> p;
    p.push_back({"covariance-identity-boole",
                 "suspension count covariance equals the base overlap mu(A ∩ T^-n A), Boole map, lags 0..8",
                 "experiment = simulate\nsystem = boole\nset = [-1,1)\nlags = 0..8\ntrials = 100000\n"});
    p.push_back({"zero-type-boole", "zero-type base gives a mixing suspension: Boole covariance sequence",
                 "experiment = zero-type\nsystem = boole\nset = [-1,1)\nmax_lag = 8\ntrials = 100000\n"});
    p.push_back({"zero-type-translation", "zero-type base gives a mixing suspension: integer translation",
                 "experiment = zero-type\nsystem = integer\ninteger.step = 1\nset = [0,1)\nmax_lag = 10\n"
                 "trials = 100000\n"});
    p.push_back({"rigidity-rank-one", "rigid base gives a rigid suspension along the tower heights",
                 fmt::format("experiment = rigidity\n{}set = [0,1)\ncandidates = 0 4 13 40\nepsilon = 0.2\n"
                             "trials = 100000\n",
                             kRigidTower)});
    p.push_back({"bernoulli-translation", "dissipative base gives independent Poisson counts on wandering translates",
                 "experiment = dissipative\nsystem = integer\ninteger.step = 1\nset = [0,1)\nlags = 0..20\n"
                 "trials = 100000\n"});
    p.push_back({"ergodic-boole", "ergodic base gives concentrating Birkhoff averages of void indicators",
                 "experiment = ergodic\nsystem = boole\nset = [-1,1)\nhorizon = 512\ntrials = 200\n"});
    p.push_back({"exp-spectral-uniform", "reduced maximal spectral type of the suspension is sum_k sigma^*k / k!",
                 "experiment = exp-type\nmeasure = uniform\ngrid = 4096\norder = 17\ntail_tol = 1e-12\n"});
    p.push_back({"singularity-spike", "convolution powers of an atom at an irrational angle are mutually singular",
                 "experiment = singularity\nmeasure = spike 1.0\ngrid = 4096\nexpect = singular\n"});
    p.push_back({"singularity-uniform", "negative control: the uniform measure overlaps its convolution powers",
                 "experiment = singularity\nmeasure = uniform\ngrid = 4096\nexpect = overlapping\n"});
    p.push_back({"spectral-sequence-boole", "the overlap sequence of a set is positive definite (a spectral measure)",
                 "experiment = sequence\nsystem = boole\nset = [-1,1)\nmax_lag = 12\n"});
    p.push_back({"fock-battery", "exponential functor: functoriality, unitaries, projections, limits, Markov restriction",
                 "experiment = fock-battery\ncases = 20\nmax_d = 4\nmax_k = 4\n"});
    p.push_back({"ageev-distinctness", "simple spectrum on each chaos: distinct multiset phase sums",
                 "experiment = ageev\nrandom_phases = 3\nchaos_cap = 4\nengineered_theta = 1.0\n"});
    p.push_back({"msj-family-covariance", "joining family second-order statistics sum_k c_k mu(A ∩ T^-k B)",
                 "experiment = joining-covariance\nsystem = boole\njoining.name = family-a0.5-c0\njoining.a = 0.5\n"
                 "joining.a_prime = 0.5\njoining.c.0 = 0.5\ntrials = 100000\n"});
    p.push_back({"joining-structure", "Poissonian joinings: Poisson marginals, covariances, infinite divisibility",
                 "experiment = joining-structure\nsystem = boole\nset = [0,1)\ntrials = 100000\n"});
    p.push_back({"reconstruction", "graph joinings are recovered exactly from their two marginals",
                 fmt::format("experiment = reconstruction\n{}set = [0,1)\nlags = 1 2 3\ntrials = 1000\n", kRigidTower)});
    for (auto& preset : p) preset.config += fmt::format("seed = {}\n", kPresetSeed);
    return p;
}

}  // namespace

const std::vector<Preset>& presets() {
    static const std::vector<Preset> all = build();
    return all;
}

const Preset* find_preset(std::string_view name) {
    const auto& all = presets();
    const auto it = std::find_if(all.begin(), all.end(), [&](const Preset& p) { return p.name == name; });
    return it == all.end() ? nullptr : &*it;
}

std::string list_suites() {
    std::string out;
    for (const auto& p : presets()) {
        out += fmt::format("{:<28} {}{}\n", p.name, p.claim, p.long_run ? " [--long]" : "");
    }
    return out;
}

}  // namespace psusp::cli
