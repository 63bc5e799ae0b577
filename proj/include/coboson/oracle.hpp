#pragma once

// Brute-force references: a direct SVD of the sampled two-body Gaussian and
// exhaustive enumeration of the combinatorial sums behind chi_N, the
// populations and the counting distribution. These are for verification;
// they scale exponentially and are capped accordingly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "coboson/errors.hpp"
#include "coboson/logmath.hpp"
#include "coboson/observables.hpp"
#include "coboson/spectrum.hpp"
#include "coboson/symfun.hpp"

namespace coboson::oracle {

// ---------------------------------------------------------------------------
// Jacobi SVD
// ---------------------------------------------------------------------------

/// Column-major dense matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return data[j * rows + i]; }
    double operator()(std::size_t i, std::size_t j) const { return data[j * rows + i]; }
    double* column(std::size_t j) { return data.data() + j * rows; }
    const double* column(std::size_t j) const { return data.data() + j * rows; }
};

struct Svd {
    std::vector<double> singular; ///< descending
    Matrix u;                     ///< left vectors, one per column
    Matrix v;                     ///< right vectors, one per column
    std::size_t sweeps = 0;
};

/// One-sided (Hestenes) Jacobi SVD with a fixed cyclic sweep order. Columns
/// count as orthogonal once |<a_p, a_q>| <= tol |a_p| |a_q|; tol = 0 selects sqrt(m) eps.
[[nodiscard]] inline Svd jacobi_svd(Matrix a, double tol = 0.0, std::size_t max_sweeps = 80)
{
    const std::size_t m = a.rows, n = a.cols;
    if (tol == 0.0) {
        tol = std::sqrt(static_cast<double>(m)) * std::numeric_limits<double>::epsilon();
    }
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        v(i, i) = 1.0;
    }
    auto dot = [](const double* x, const double* y, std::size_t len) {
        double s = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            s += x[i] * y[i];
        }
        return s;
    };
    auto rotate = [](double* x, double* y, std::size_t len, double c, double s) {
        for (std::size_t i = 0; i < len; ++i) {
            const double xi = x[i], yi = y[i];
            x[i] = c * xi - s * yi;
            y[i] = s * xi + c * yi;
        }
    };

    std::vector<double> norms(n);
    double frobenius2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        norms[j] = dot(a.column(j), a.column(j), m);
        frobenius2 += norms[j];
    }
    // Columns below this carry only the rounding error of the entries; rotating
    // such pairs against each other need not settle.
    const double noise = static_cast<double>(m) * std::numeric_limits<double>::epsilon();
    const double negligible = noise * noise * frobenius2;

    Svd out;
    for (out.sweeps = 0; out.sweeps < max_sweeps; ++out.sweeps) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double alpha = norms[p], beta = norms[q];
                if (alpha == 0.0 || beta == 0.0 || std::max(alpha, beta) < negligible) {
                    continue;
                }
                const double gamma = dot(a.column(p), a.column(q), m);
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) {
                    continue;
                }
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                rotate(a.column(p), a.column(q), m, c, s);
                rotate(v.column(p), v.column(q), n, c, s);
                norms[p] = dot(a.column(p), a.column(p), m);
                norms[q] = dot(a.column(q), a.column(q), m);
            }
        }
        if (!rotated) {
            break;
        }
    }
    if (out.sweeps == max_sweeps) {
        throw SolverError("Jacobi SVD did not converge");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });
    out.singular.resize(n);
    out.u = Matrix(m, n);
    out.v = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        const double s = std::sqrt(norms[j]);
        out.singular[k] = s;
        for (std::size_t i = 0; i < m; ++i) {
            out.u(i, k) = s > 0.0 ? a(i, j) / s : 0.0;
        }
        for (std::size_t i = 0; i < n; ++i) {
            out.v(i, k) = v(i, j);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Grid Schmidt decomposition
// ---------------------------------------------------------------------------

/// Psi(x_a, x_b) = exp(-R^2 / (2 sigma_R^2)) exp(-(r - x0)^2 / (2 sigma_r^2)),
/// R = (x_a + x_b)/2, r = x_b - x_a.
struct GaussianPair {
    double sigma_R = std::sqrt(0.5);
    double sigma_r = std::sqrt(2.0);
    double x0 = 0.0;

    /// Harmonic-approximation ground state: sigma_R^2 = 1/2, sigma_r^2 = 2/mu.
    static GaussianPair from_harmonic(double mu, double x0)
    {
        return GaussianPair{std::sqrt(0.5), std::sqrt(2.0 / mu), x0};
    }
};

struct GridOptions {
    double resolution = 4.0;  ///< points per min(sigma_R, sigma_r)
    double coverage = 6.0;    ///< half-width is x0/2 + coverage * max width
    bool refine = true;       ///< repeat on a grid with half the spacing
    double max_change = 1e-6; ///< tolerated change of the occupations under refinement
    std::size_t keep_modes = 16;
};

struct GridSchmidt {
    std::vector<double> occupations; ///< squared singular values, descending
    std::vector<double> x;           ///< shared grid for both species
    double spacing = 0.0;
    /// modes_a[j][i] ~ phi_j^(a)(x_i), normalized as functions (sum phi^2 dx = 1)
    std::vector<std::vector<double>> modes_a;
    std::vector<std::vector<double>> modes_b;
    /// max |lambda_j(h) - lambda_j(h/2)| over the kept modes; 0 without refinement
    double convergence = 0.0;
};

namespace detail {

inline GridSchmidt sample_and_decompose(const GaussianPair& g, double half_width, std::size_t points,
                                        std::size_t keep)
{
    GridSchmidt out;
    out.x.resize(points);
    const double h = 2.0 * half_width / static_cast<double>(points - 1);
    out.spacing = h;
    for (std::size_t i = 0; i < points; ++i) {
        out.x[i] = half_width * (2.0 * static_cast<double>(i) - static_cast<double>(points - 1)) /
                   static_cast<double>(points - 1);
    }
    Matrix k(points, points);
    double norm2 = 0.0;
    for (std::size_t jb = 0; jb < points; ++jb) {
        for (std::size_t ia = 0; ia < points; ++ia) {
            const double R = 0.5 * (out.x[ia] + out.x[jb]);
            const double r = out.x[jb] - out.x[ia] - g.x0;
            const double val = std::exp(-R * R / (2.0 * g.sigma_R * g.sigma_R) - r * r / (2.0 * g.sigma_r * g.sigma_r)) * h;
            k(ia, jb) = val;
            norm2 += val * val;
        }
    }
    const double scale = 1.0 / std::sqrt(norm2);
    for (double& val : k.data) {
        val *= scale;
    }
    const auto svd = jacobi_svd(std::move(k));
    out.occupations.resize(points);
    for (std::size_t j = 0; j < points; ++j) {
        out.occupations[j] = svd.singular[j] * svd.singular[j];
    }
    keep = std::min(keep, points);
    const double inv = 1.0 / std::sqrt(h);
    out.modes_a.assign(keep, std::vector<double>(points));
    out.modes_b.assign(keep, std::vector<double>(points));
    for (std::size_t j = 0; j < keep; ++j) {
        for (std::size_t i = 0; i < points; ++i) {
            out.modes_a[j][i] = svd.u(i, j) * inv;
            out.modes_b[j][i] = svd.v(i, j) * inv;
        }
    }
    return out;
}

} // namespace detail

/// Schmidt decomposition of the sampled two-body Gaussian by SVD of
/// Psi(x_a, x_b) dx. With refinement the finer result is returned and the
/// change of the leading occupations is reported as the convergence estimate.
[[nodiscard]] inline GridSchmidt grid_schmidt(const GaussianPair& g, const GridOptions& opt = {})
{
    if (!(g.sigma_R > 0.0 && g.sigma_r > 0.0)) {
        throw DomainError("Gaussian widths must be positive");
    }
    const double half_width = 0.5 * std::abs(g.x0) + opt.coverage * std::max(g.sigma_R, g.sigma_r);
    const double h = std::min(g.sigma_R, g.sigma_r) / opt.resolution;
    const auto points = static_cast<std::size_t>(std::ceil(2.0 * half_width / h)) + 1;
    if (points > 1024) {
        throw CapacityError("grid SVD limited to 1024 points per axis");
    }
    auto coarse = detail::sample_and_decompose(g, half_width, points, opt.keep_modes);
    if (!opt.refine) {
        return coarse;
    }
    if (2 * points - 1 > 1024) {
        throw CapacityError("refined grid SVD exceeds 1024 points per axis");
    }
    auto fine = detail::sample_and_decompose(g, half_width, 2 * points - 1, opt.keep_modes);
    double change = 0.0;
    for (std::size_t j = 0; j < std::min(opt.keep_modes, points); ++j) {
        change = std::max(change, std::abs(fine.occupations[j] - coarse.occupations[j]));
    }
    fine.convergence = change;
    if (change > opt.max_change) {
        throw SolverError("grid SVD occupations not converged under refinement (change " + std::to_string(change) + ")");
    }
    return fine;
}

/// Which closed form for z_x the grid SVD supports.
struct ZxArbitration {
    double mu = 0.0;
    double x0 = 0.0;
    std::vector<double> ratios;   ///< lambda_{j+1} / lambda_j, j < 5
    double ratio = 0.0;           ///< their mean
    double ratio_spread = 0.0;    ///< max |ratio_j - mean|
    double z_published = 0.0;     ///< ((1 - mu)/(1 + mu))^2
    double z_gaussian = 0.0;      ///< ((1 - sqrt mu)/(1 + sqrt mu))^2
    bool selects_gaussian = false;
    double selected = 0.0;
    double mismatch = 0.0;        ///< |ratio - selected|
    double convergence = 0.0;
};

[[nodiscard]] inline ZxArbitration arbitrate_zx(double mu, double x0, const GridOptions& opt = {})
{
    ZxArbitration a;
    a.mu = mu;
    a.x0 = x0;
    const auto gs = grid_schmidt(GaussianPair::from_harmonic(mu, x0), opt);
    a.convergence = gs.convergence;
    double sum = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
        const double r = gs.occupations[j + 1] / gs.occupations[j];
        a.ratios.push_back(r);
        sum += r;
    }
    a.ratio = sum / 5.0;
    for (double r : a.ratios) {
        a.ratio_spread = std::max(a.ratio_spread, std::abs(r - a.ratio));
    }
    a.z_published = z_from_mu(mu);
    a.z_gaussian = z_from_mu_gaussian(mu);
    a.selects_gaussian = std::abs(a.ratio - a.z_gaussian) < std::abs(a.ratio - a.z_published);
    a.selected = a.selects_gaussian ? a.z_gaussian : a.z_published;
    a.mismatch = std::abs(a.ratio - a.selected);
    return a;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMaxOracleModes = 16;
inline constexpr std::size_t kMaxOraclePairs = 6;

namespace detail {

/// Calls visit(indices) for every strictly increasing (or non-decreasing) N-tuple over [0, J).
template <class Visit>
void for_each_tuple(std::size_t J, std::size_t N, bool repeats, Visit&& visit)
{
    std::vector<std::size_t> idx(N);
    auto rec = [&](auto&& self, std::size_t pos, std::size_t from) -> void {
        if (pos == N) {
            visit(idx);
            return;
        }
        for (std::size_t j = from; j < J; ++j) {
            idx[pos] = j;
            self(self, pos + 1, repeats ? j : j + 1);
        }
    };
    rec(rec, 0, 0);
}

inline void check_caps(const OccupationSpectrum& s, std::size_t N)
{
    if (s.size() > kMaxOracleModes) {
        throw CapacityError("oracle enumeration limited to J <= 16 modes");
    }
    if (N > kMaxOraclePairs) {
        throw CapacityError("oracle enumeration limited to N <= 6 pairs");
    }
}

inline double factorial(std::size_t n)
{
    double f = 1.0;
    for (std::size_t i = 2; i <= n; ++i) {
        f *= static_cast<double>(i);
    }
    return f;
}

} // namespace detail

/// chi_N = N! sum over index sets j_1 < ... < j_N (fermionic) or
/// j_1 <= ... <= j_N (bosonic) of lambda_j1 ... lambda_jN.
[[nodiscard]] inline double chi_bruteforce(const OccupationSpectrum& s, std::size_t N, ChiKind kind)
{
    if (kind == ChiKind::fermionic && N > s.size()) {
        return 0.0;
    }
    detail::check_caps(s, N);
    CompensatedSum sum;
    const auto lam = s.lambdas();
    detail::for_each_tuple(s.size(), N, kind == ChiKind::bosonic, [&](const std::vector<std::size_t>& idx) {
        double p = 1.0;
        for (auto j : idx) {
            p *= lam[j];
        }
        sum.add(p);
    });
    return detail::factorial(N) * sum.value();
}

/// Populations from the explicit sum over occupied N-subsets.
[[nodiscard]] inline std::vector<double> populations_bruteforce(const OccupationSpectrum& s, std::size_t N)
{
    detail::check_caps(s, N);
    const auto lam = s.lambdas();
    std::vector<CompensatedSum> by_mode(s.size());
    CompensatedSum total;
    detail::for_each_tuple(s.size(), N, false, [&](const std::vector<std::size_t>& idx) {
        double p = 1.0;
        for (auto j : idx) {
            p *= lam[j];
        }
        total.add(p);
        for (auto j : idx) {
            by_mode[j].add(p);
        }
    });
    std::vector<double> n(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
        n[j] = by_mode[j].value() / total.value();
    }
    return n;
}

/// P(n) from all N-subsets binned by how many of their modes fall below t.
[[nodiscard]] inline CountingDistribution counting_bruteforce(const OccupationSpectrum& s, std::size_t N,
                                                              std::size_t t)
{
    detail::check_caps(s, N);
    if (t < 1 || t > s.size()) {
        throw DomainError("window t must satisfy 1 <= t <= J");
    }
    const auto lam = s.lambdas();
    const std::size_t top = std::min(t, N);
    std::vector<CompensatedSum> bins(top + 1);
    CompensatedSum total;
    detail::for_each_tuple(s.size(), N, false, [&](const std::vector<std::size_t>& idx) {
        double p = 1.0;
        std::size_t inside = 0;
        for (auto j : idx) {
            p *= lam[j];
            inside += j < t ? 1 : 0;
        }
        total.add(p);
        bins[inside].add(p);
    });
    CountingDistribution d;
    d.window = t;
    d.pairs = N;
    for (auto& b : bins) {
        d.probs.push_back(b.value() / total.value());
    }
    const auto m = moments(d.probs);
    d.mean = m.mean;
    d.variance = m.variance;
    return d;
}

/// Bosonic chi_N from <0| c^N (c^dagger)^N |0> / N! with
/// c^dagger = sum_j sqrt(lambda_j) a_j^dagger b_j^dagger over bosonic a, b.
/// For index tuples j, k the vacuum expectation of the a (and b) operators is
/// the permanent of the delta matrix [k_l == j_i].
[[nodiscard]] inline double chi_bose_permanent(const OccupationSpectrum& s, std::size_t N)
{
    if (N > 4 || s.size() > 9) {
        throw CapacityError("permanent expansion limited to N <= 4, J <= 9");
    }
    const auto lam = s.lambdas();
    const std::size_t J = s.size();
    std::vector<std::size_t> perm_base(N);
    std::iota(perm_base.begin(), perm_base.end(), 0u);
    auto permanent = [&](const std::vector<std::size_t>& j, const std::vector<std::size_t>& k) {
        std::vector<std::size_t> p = perm_base;
        double total = 0.0;
        do {
            bool all = true;
            for (std::size_t i = 0; i < N && all; ++i) {
                all = k[p[i]] == j[i];
            }
            total += all ? 1.0 : 0.0;
        } while (std::next_permutation(p.begin(), p.end()));
        return total;
    };

    CompensatedSum sum;
    std::vector<std::size_t> j(N, 0);
    const auto tuples = static_cast<std::size_t>(std::pow(static_cast<double>(J), static_cast<double>(N)));
    for (std::size_t code = 0; code < tuples; ++code) {
        std::size_t c = code;
        double weight = 1.0;
        for (std::size_t i = 0; i < N; ++i) {
            j[i] = c % J;
            c /= J;
            weight *= lam[j[i]];
        }
        // Only rearrangements of j give a non-zero overlap; the weight
        // prod sqrt(lambda_j lambda_k) is then prod lambda_j.
        std::set<std::vector<std::size_t>> seen;
        std::vector<std::size_t> p = perm_base;
        do {
            std::vector<std::size_t> k(N);
            for (std::size_t i = 0; i < N; ++i) {
                k[i] = j[p[i]];
            }
            if (!seen.insert(k).second) {
                continue;
            }
            const double perm = permanent(j, k);
            sum.add(weight * perm * perm);
        } while (std::next_permutation(p.begin(), p.end()));
    }
    return sum.value() / detail::factorial(N);
}

/// Compares the multiset chi^B of a 2D spectrum with the product of the 1D
/// values, and the multiset sum with the explicit Fock norm on a truncation.
struct BoseProductReport {
    double z_x = 0.0;
    double z_y = 0.0;
    std::size_t pairs = 0;
    double chi_2d = 0.0;        ///< multiset sum over the product spectrum
    double chi_product = 0.0;   ///< chi^B(z_x) chi^B(z_y)
    double relative_gap = 0.0;  ///< |chi_2d - chi_product| / chi_product
    std::size_t truncated_modes = 0;
    double chi_truncated = 0.0; ///< multiset sum on the truncated spectrum
    double fock_norm = 0.0;     ///< permanent expansion on the same truncation
    double fock_gap = 0.0;      ///< relative difference of the two
};

[[nodiscard]] inline BoseProductReport bose_product_check(double z_x, double z_y, std::size_t N,
                                                          std::size_t truncate = 9)
{
    BoseProductReport r;
    r.z_x = z_x;
    r.z_y = z_y;
    r.pairs = N;
    const std::vector<double> zx{z_x}, zy{z_y}, zxy{z_x, z_y};
    r.chi_2d = chi_bose(build_spectrum(zxy, 1e-14), N).chi(N);
    r.chi_product = chi_bose(build_spectrum(zx, 1e-14), N).chi(N) * chi_bose(build_spectrum(zy, 1e-14), N).chi(N);
    r.relative_gap = std::abs(r.chi_2d - r.chi_product) / r.chi_product;
    const auto small = build_spectrum(zxy, 1e-14).truncated(truncate);
    r.truncated_modes = small.size();
    r.chi_truncated = chi_bose(small, N).chi(N);
    r.fock_norm = chi_bose_permanent(small, N);
    r.fock_gap = std::abs(r.fock_norm - r.chi_truncated) / r.chi_truncated;
    return r;
}

} // namespace coboson::oracle
