#pragma once

// Single-particle populations, density of states with Fermi-Dirac /
// Bose-Einstein fits, and the distribution of pairs found in the lowest
// modes of the N-coboson state.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "coboson/errors.hpp"
#include "coboson/logmath.hpp"
#include "coboson/spectrum.hpp"
#include "coboson/symfun.hpp"

namespace coboson {

// ---------------------------------------------------------------------------
// Populations
// ---------------------------------------------------------------------------

struct PopulationProfile {
    std::vector<double> n;       ///< n_j aligned with the spectrum modes
    std::vector<double> lambdas; ///< the occupations the populations were built from
    std::size_t pairs = 0;
    double sum_residual = 0.0;   ///< |sum_j n_j - N|
};

namespace detail {

inline PopulationProfile finish_profile(PopulationProfile p)
{
    CompensatedSum total;
    for (double v : p.n) {
        total.add(v);
    }
    p.sum_residual = std::abs(total.value() - static_cast<double>(p.pairs));
    return p;
}

} // namespace detail

/// n_j(N) = N lambda_j chi_{N-1}^{(without j)} / chi_N, for every retained mode.
[[nodiscard]] inline PopulationProfile populations(const OccupationSpectrum& s, std::size_t N)
{
    PopulationProfile p;
    p.pairs = N;
    p.lambdas.assign(s.lambdas().begin(), s.lambdas().end());
    p.n.assign(s.size(), 0.0);
    if (N == 0) {
        return p;
    }
    auto ll = s.log_lambdas();
    const double log_eN = log_elementary(ll, N).back();
    if (log_eN == kNegInf) {
        throw InfeasibleError("chi_N = 0: " + std::to_string(N) + " pairs do not fit into " +
                              std::to_string(s.size()) + " modes");
    }
    // In e-polynomial form: n_j = lambda_j e_{N-1}(without j) / e_N.
    const auto loo = log_elementary_leave_one_out(ll, N - 1);
    for (std::size_t j = 0; j < s.size(); ++j) {
        p.n[j] = loo[j] == kNegInf ? 0.0 : std::exp(ll[j] + loo[j] - log_eN);
    }
    return detail::finish_profile(std::move(p));
}

/// Same quantity through one full chi_excluding run per mode. O(J^2 N).
[[nodiscard]] inline PopulationProfile populations_recompute(const OccupationSpectrum& s, std::size_t N)
{
    PopulationProfile p;
    p.pairs = N;
    p.lambdas.assign(s.lambdas().begin(), s.lambdas().end());
    p.n.assign(s.size(), 0.0);
    if (N == 0) {
        return p;
    }
    const auto full = chi_fermi_dp(s, N);
    if (full.is_zero(N)) {
        throw InfeasibleError("chi_N = 0");
    }
    const double logN = std::log(static_cast<double>(N));
    for (std::size_t j = 0; j < s.size(); ++j) {
        const auto ex = chi_excluding(s, j, N - 1);
        if (ex.is_zero(N - 1)) {
            continue;
        }
        p.n[j] = std::exp(logN + s.log_lambdas()[j] + ex.log(N - 1) - full.log(N));
    }
    return detail::finish_profile(std::move(p));
}

/// Mean number of pairs in the first t modes, sum_{j<t} n_j.
[[nodiscard]] inline double window_population(const PopulationProfile& p, std::size_t t)
{
    CompensatedSum s;
    for (std::size_t j = 0; j < std::min(t, p.n.size()); ++j) {
        s.add(p.n[j]);
    }
    return s.value();
}

// ---------------------------------------------------------------------------
// Density of states
// ---------------------------------------------------------------------------

[[nodiscard]] inline std::vector<double> degeneracy_1d(std::size_t J)
{
    return std::vector<double>(J, 1.0);
}

/// g_j = j + 1, the level degeneracy of an isotropic 2D oscillator.
[[nodiscard]] inline std::vector<double> degeneracy_isotropic_2d(std::size_t J)
{
    std::vector<double> g(J);
    for (std::size_t j = 0; j < J; ++j) {
        g[j] = static_cast<double>(j + 1);
    }
    return g;
}

/// DOS_j = g_j n_j.
[[nodiscard]] inline std::vector<double> dos(const PopulationProfile& p, std::span<const double> degeneracy)
{
    if (degeneracy.size() < p.n.size()) {
        throw DomainError("degeneracy list shorter than the population profile");
    }
    std::vector<double> out(p.n.size());
    for (std::size_t j = 0; j < p.n.size(); ++j) {
        if (!(degeneracy[j] >= 1.0)) {
            throw DomainError("degeneracies must be >= 1");
        }
        out[j] = degeneracy[j] * p.n[j];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Simplex minimizer
// ---------------------------------------------------------------------------

struct SimplexResult {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    bool converged = false;
    std::size_t evaluations = 0;
};

/// Nelder-Mead with standard coefficients. Converged once every vertex lies
/// within rel_tol of the best one, coordinate-wise relative to max(1, |x|).
[[nodiscard]] inline SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                                               std::vector<double> start, std::span<const double> step,
                                               std::size_t max_evaluations = 10'000, double rel_tol = 1e-9)
{
    const std::size_t n = start.size();
    std::vector<std::vector<double>> v(n + 1, start);
    std::vector<double> fv(n + 1);
    SimplexResult r;
    auto eval = [&](const std::vector<double>& x) {
        ++r.evaluations;
        const double y = f(x);
        return std::isnan(y) ? std::numeric_limits<double>::infinity() : y;
    };
    for (std::size_t i = 0; i < n; ++i) {
        v[i + 1][i] += step[i];
    }
    for (std::size_t i = 0; i <= n; ++i) {
        fv[i] = eval(v[i]);
    }

    std::vector<std::size_t> order(n + 1);
    while (true) {
        for (std::size_t i = 0; i <= n; ++i) {
            order[i] = i;
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = order[0], worst = order[n], second = order[n - 1];

        double spread = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                const double scale = std::max(1.0, std::abs(v[best][k]));
                spread = std::max(spread, std::abs(v[i][k] - v[best][k]) / scale);
            }
        }
        if (spread < rel_tol) {
            r.converged = true;
            break;
        }
        if (r.evaluations >= max_evaluations) {
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) {
                continue;
            }
            for (std::size_t k = 0; k < n; ++k) {
                centroid[k] += v[i][k] / static_cast<double>(n);
            }
        }
        auto along = [&](double coef) {
            std::vector<double> x(n);
            for (std::size_t k = 0; k < n; ++k) {
                x[k] = centroid[k] + coef * (v[worst][k] - centroid[k]);
            }
            return x;
        };

        auto xr = along(-1.0);
        const double fr = eval(xr);
        if (fr < fv[best]) {
            auto xe = along(-2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                v[worst] = std::move(xe);
                fv[worst] = fe;
            } else {
                v[worst] = std::move(xr);
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            v[worst] = std::move(xr);
            fv[worst] = fr;
            continue;
        }
        const bool outside = fr < fv[worst];
        auto xc = along(outside ? -0.5 : 0.5);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fv[worst])) {
            v[worst] = std::move(xc);
            fv[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) {
                continue;
            }
            for (std::size_t k = 0; k < n; ++k) {
                v[i][k] = v[best][k] + 0.5 * (v[i][k] - v[best][k]);
            }
            fv[i] = eval(v[i]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    r.x = v[best];
    r.value = fv[best];
    return r;
}

// ---------------------------------------------------------------------------
// Distribution fits
// ---------------------------------------------------------------------------

enum class FitModel { fermi_dirac, bose_einstein };

struct FitResult {
    FitModel model = FitModel::fermi_dirac;
    double j_mu = 0.0;  ///< Fermi level in mode-index units
    double T_eff = 0.0; ///< k_B T / epsilon_0
    double residual = 0.0; ///< RMS misfit over the fitted window
    bool converged = false;
    std::size_t evaluations = 0;
    std::size_t window = 0; ///< number of (j, DOS_j) points fitted

    /// T_eff below 1e-3 is reported as zero temperature.
    [[nodiscard]] bool zero_temperature() const noexcept { return T_eff < 1e-3; }
};

inline constexpr double kMinFitTemperature = 1e-6;

[[nodiscard]] inline double fermi_dirac(double j, double g, double j_mu, double T)
{
    const double x = (j - j_mu) / std::max(T, kMinFitTemperature);
    if (x > 700.0) {
        return 0.0;
    }
    return g / (std::exp(x) + 1.0);
}

/// g / (exp((j - j_mu)/T) - 1); NaN where the denominator is not positive.
[[nodiscard]] inline double bose_einstein(double j, double g, double j_mu, double T)
{
    const double x = (j - j_mu) / std::max(T, kMinFitTemperature);
    if (!(x > 0.0)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (x > 700.0) {
        return 0.0;
    }
    return g / std::expm1(x);
}

namespace detail {

inline FitResult fit_distribution(FitModel model, std::span<const double> dos_values,
                                  std::span<const double> degeneracy, std::size_t pairs)
{
    if (pairs < 1) {
        throw DomainError("fits need N >= 1");
    }
    if (degeneracy.size() < dos_values.size()) {
        throw DomainError("degeneracy list shorter than the DOS");
    }
    const std::size_t window = std::min(dos_values.size(), 4 * pairs);
    const auto y = dos_values.first(window);
    const std::size_t nonzero = static_cast<std::size_t>(
        std::count_if(y.begin(), y.end(), [](double v) { return v != 0.0; }));
    if (nonzero < 4) {
        throw DomainError("fit needs at least 4 nonzero DOS points");
    }

    auto objective = [&](std::span<const double> p) {
        double sum = 0.0;
        for (std::size_t j = 0; j < window; ++j) {
            const double jd = static_cast<double>(j);
            if (model == FitModel::fermi_dirac) {
                const double d = y[j] - fermi_dirac(jd, degeneracy[j], p[0], p[1]);
                sum += d * d;
            } else {
                const double m = bose_einstein(jd, degeneracy[j], p[0], p[1]);
                if (std::isnan(m)) {
                    // Infeasible point: grows with the distance past the pole.
                    const double over = p[0] - jd + 1.0;
                    sum += y[j] * y[j] + 1.0 + over * over;
                } else {
                    const double d = y[j] - m;
                    sum += d * d;
                }
            }
        }
        return sum;
    };

    std::size_t steepest = 0;
    double drop = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < window; ++j) {
        if (y[j] - y[j + 1] > drop) {
            drop = y[j] - y[j + 1];
            steepest = j;
        }
    }
    const double N = static_cast<double>(pairs);
    const std::array<std::array<double, 2>, 3> starts{{{N, 0.1}, {N / 2.0, 1.0}, {static_cast<double>(steepest), 0.5}}};

    FitResult best;
    best.model = model;
    best.window = window;
    double best_value = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
    for (const auto& s : starts) {
        const std::array<double, 2> step{1.0, 0.5 * s[1] + 0.05};
        auto r = nelder_mead(objective, {s[0], s[1]}, step);
        evaluations += r.evaluations;
        if (r.value < best_value) {
            best_value = r.value;
            best.j_mu = r.x[0];
            best.T_eff = std::max(r.x[1], kMinFitTemperature);
            best.converged = r.converged;
        }
    }
    best.evaluations = evaluations;

    double misfit = 0.0;
    for (std::size_t j = 0; j < window; ++j) {
        const double jd = static_cast<double>(j);
        double m = model == FitModel::fermi_dirac ? fermi_dirac(jd, degeneracy[j], best.j_mu, best.T_eff)
                                                  : bose_einstein(jd, degeneracy[j], best.j_mu, best.T_eff);
        if (std::isnan(m)) {
            m = 0.0;
        }
        misfit += (y[j] - m) * (y[j] - m);
    }
    best.residual = std::sqrt(misfit / static_cast<double>(window));
    return best;
}

} // namespace detail

/// Least-squares fit of g_j / (exp((j - j_mu)/T) + 1) over j < min(J, 4N).
[[nodiscard]] inline FitResult fit_fd(std::span<const double> dos_values, std::span<const double> degeneracy,
                                      std::size_t pairs)
{
    return detail::fit_distribution(FitModel::fermi_dirac, dos_values, degeneracy, pairs);
}

/// Least-squares fit of g_j / (exp((j - j_mu)/T) - 1) over j < min(J, 4N).
[[nodiscard]] inline FitResult fit_be(std::span<const double> dos_values, std::span<const double> degeneracy,
                                      std::size_t pairs)
{
    return detail::fit_distribution(FitModel::bose_einstein, dos_values, degeneracy, pairs);
}

// ---------------------------------------------------------------------------
// Counting statistics
// ---------------------------------------------------------------------------

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

[[nodiscard]] inline Moments moments(std::span<const double> probs)
{
    CompensatedSum m;
    for (std::size_t n = 0; n < probs.size(); ++n) {
        m.add(static_cast<double>(n) * probs[n]);
    }
    Moments out;
    out.mean = m.value();
    CompensatedSum v;
    for (std::size_t n = 0; n < probs.size(); ++n) {
        const double d = static_cast<double>(n) - out.mean;
        v.add(d * d * probs[n]);
    }
    out.variance = v.value();
    return out;
}

struct CountingDistribution {
    std::vector<double> probs; ///< P(n), n = 0..min(t, N)
    std::size_t window = 0;    ///< t
    std::size_t pairs = 0;
    double mean = 0.0;
    double variance = 0.0;
};

/// P(n) = C(N, n) chi_n^{first t} chi_{N-n}^{rest} / chi_N.
[[nodiscard]] inline CountingDistribution counting(const OccupationSpectrum& s, std::size_t N, std::size_t t)
{
    if (t < 1 || t > s.size()) {
        throw DomainError("window t must satisfy 1 <= t <= J");
    }
    auto ll = s.log_lambdas();
    const double log_eN = log_elementary(ll, N).back();
    if (log_eN == kNegInf) {
        throw InfeasibleError("chi_N = 0");
    }
    // The binomial and factorials cancel in e-polynomial form:
    // P(n) = e_n(first t) e_{N-n}(rest) / e_N.
    const auto inside = log_elementary(ll.first(t), N);
    const auto outside = log_elementary(ll.subspan(t), N);
    CountingDistribution d;
    d.window = t;
    d.pairs = N;
    const std::size_t top = std::min(t, N);
    d.probs.resize(top + 1);
    for (std::size_t n = 0; n <= top; ++n) {
        const double l = inside[n] + outside[N - n];
        d.probs[n] = l == kNegInf ? 0.0 : std::exp(l - log_eN);
    }
    const auto m = moments(d.probs);
    d.mean = m.mean;
    d.variance = m.variance;
    return d;
}

} // namespace coboson
