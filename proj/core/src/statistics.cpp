#include "psusp/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "psusp/errors.hpp"

namespace psusp {

double z_score(double estimate, double std_error, double exact) noexcept {
    const double diff = estimate - exact;
    if (std_error > 0.0) return diff / std_error;
    if (std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(exact))) return 0.0;
    return diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

double mean(std::span<const double> x) noexcept {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_stddev(std::span<const double> x) noexcept {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

Estimate mean_estimate(std::span<const double> x) noexcept {
    if (x.empty()) return {};
    return {mean(x), sample_stddev(x) / std::sqrt(static_cast<double>(x.size()))};
}

Estimate jackknife_covariance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error(Errc::InvalidArgument, "covariance inputs differ in length");
    const auto n = x.size();
    if (n < 3) throw Error(Errc::InsufficientTrials, "jackknife covariance needs at least 3 samples");
    const double nd = static_cast<double>(n);
    // Centre first so the leave-one-out sums stay well conditioned.
    const double mx = mean(x);
    const double my = mean(y);
    double sx = 0.0, sy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = x[i] - mx;
        const double b = y[i] - my;
        sx += a;
        sy += b;
        sxy += a * b;
    }
    const double full = (sxy - sx * sy / nd) / (nd - 1.0);
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = x[i] - mx;
        const double b = y[i] - my;
        const double m = nd - 1.0;
        loo[i] = ((sxy - a * b) - (sx - a) * (sy - b) / m) / (m - 1.0);
    }
    const double loo_mean = mean(loo);
    double ss = 0.0;
    for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
    return {full, std::sqrt((nd - 1.0) / nd * ss)};
}

double correlation(std::span<const double> x, std::span<const double> y) noexcept {
    if (x.size() != y.size() || x.size() < 2) return 0.0;
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double chi_square_upper_tail(double statistic, int dof) {
    if (dof <= 0) return 1.0;
    if (!(statistic > 0.0)) return 1.0;
    if (!std::isfinite(statistic)) return 0.0;
    boost::math::chi_squared_distribution<double> dist(dof);
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

ChiSquareResult poisson_goodness_of_fit(std::span<const std::int64_t> counts, double lambda) {
    if (lambda < 0.0) throw Error(Errc::InvalidArgument, "Poisson mean must be nonnegative");
    if (counts.empty()) return {};
    const double n = static_cast<double>(counts.size());
    if (lambda == 0.0) {
        const bool all_zero = std::all_of(counts.begin(), counts.end(), [](auto c) { return c == 0; });
        return {all_zero ? 0.0 : std::numeric_limits<double>::infinity(), 0, all_zero ? 1.0 : 0.0};
    }
    const auto max_obs = *std::max_element(counts.begin(), counts.end());
    if (*std::min_element(counts.begin(), counts.end()) < 0) {
        throw Error(Errc::InvalidArgument, "counts must be nonnegative");
    }
    std::vector<double> observed(static_cast<std::size_t>(max_obs) + 1, 0.0);
    for (auto c : counts) observed[static_cast<std::size_t>(c)] += 1.0;

    boost::math::poisson_distribution<double> dist(lambda);
    struct Cell {
        std::int64_t lo;
        double expected;
        double observed;
    };
    std::vector<Cell> cells;
    double cdf = 0.0;
    Cell cur{0, 0.0, 0.0};
    for (std::int64_t k = 0;; ++k) {
        const double pk = boost::math::pdf(dist, static_cast<double>(k));
        cdf += pk;
        cur.expected += n * pk;
        if (static_cast<std::size_t>(k) < observed.size()) cur.observed += observed[static_cast<std::size_t>(k)];
        const double tail = n * std::max(0.0, boost::math::cdf(boost::math::complement(dist, static_cast<double>(k))));
        if (cur.expected >= 5.0 && tail >= 5.0) {
            cells.push_back(cur);
            cur = Cell{k + 1, 0.0, 0.0};
        } else if (tail < 5.0) {
            // Everything from cur.lo upward becomes the final cell.
            cur.expected += tail;
            for (auto j = static_cast<std::size_t>(k) + 1; j < observed.size(); ++j) cur.observed += observed[j];
            cells.push_back(cur);
            break;
        }
    }
    if (cells.size() >= 2 && cells.back().expected < 5.0) {
        auto last = cells.back();
        cells.pop_back();
        cells.back().expected += last.expected;
        cells.back().observed += last.observed;
    }
    ChiSquareResult out;
    for (const auto& c : cells) out.statistic += (c.observed - c.expected) * (c.observed - c.expected) / c.expected;
    out.dof = static_cast<int>(cells.size()) - 1;
    out.p_value = chi_square_upper_tail(out.statistic, out.dof);
    return out;
}

ChiSquareResult homogeneity_test(std::span<const std::int64_t> labels_a, std::span<const std::int64_t> labels_b) {
    if (labels_a.empty() || labels_b.empty()) return {};
    std::map<std::int64_t, std::pair<double, double>> table;
    for (auto l : labels_a) table[l].first += 1.0;
    for (auto l : labels_b) table[l].second += 1.0;
    std::vector<std::pair<double, double>> cells;
    std::pair<double, double> rare{0.0, 0.0};
    for (const auto& [label, c] : table) {
        if (c.first + c.second < 10.0) {
            rare.first += c.first;
            rare.second += c.second;
        } else {
            cells.push_back(c);
        }
    }
    if (rare.first + rare.second > 0.0) {
        if (rare.first + rare.second < 10.0 && !cells.empty()) {
            auto smallest = std::min_element(cells.begin(), cells.end(), [](const auto& x, const auto& y) {
                return x.first + x.second < y.first + y.second;
            });
            smallest->first += rare.first;
            smallest->second += rare.second;
        } else {
            cells.push_back(rare);
        }
    }
    const double na = static_cast<double>(labels_a.size());
    const double nb = static_cast<double>(labels_b.size());
    const double total = na + nb;
    ChiSquareResult out;
    for (const auto& [oa, ob] : cells) {
        const double row = oa + ob;
        const double ea = row * na / total;
        const double eb = row * nb / total;
        out.statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    out.dof = static_cast<int>(cells.size()) - 1;
    out.p_value = chi_square_upper_tail(out.statistic, out.dof);
    return out;
}

}  // namespace psusp
