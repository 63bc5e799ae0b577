#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "coboson/errors.hpp"
#include "coboson/hermite.hpp"
#include "coboson/observables.hpp"
#include "coboson/oracle.hpp"
#include "coboson/spectrum.hpp"

namespace coboson {

/// Thrown when the analytic Schmidt modes disagree with the grid SVD.
class BasisValidationError : public SolverError {
public:
    BasisValidationError(const std::string& what, std::vector<double> overlaps)
        : SolverError(what), overlaps_(std::move(overlaps))
    {
    }
    [[nodiscard]] const std::vector<double>& overlaps() const noexcept { return overlaps_; }

private:
    std::vector<double> overlaps_;
};

// ---------------------------------------------------------------------------
// Natural orbitals
// ---------------------------------------------------------------------------

struct OrbitalBasis {
    double width = 1.0;
    double center_a = 0.0;
    double center_b = 0.0;
    std::size_t count = 0;
    double mu = 1.0;
    double x0 = 0.0;
    double z_implied = 0.0;   ///< Schmidt parameter of the shifted two-body Gaussian
    double z_published = 0.0; ///< ((1 - mu)/(1 + mu))^2, reported alongside
    bool valid = false;       ///< carried over from the harmonic approximation
    std::vector<double> overlaps; ///< |<grid mode|analytic mode>| per validated mode

    /// phi_j at x for species a (0) or b (1).
    [[nodiscard]] double orbital(std::size_t j, int species, double x) const
    {
        const double c = species == 0 ? center_a : center_b;
        return hermite_fn(j, (x - c) / width) / std::sqrt(width);
    }

    /// phi_0..phi_{n-1} at x for one species.
    void orbitals(std::size_t n, int species, double x, std::span<double> out) const
    {
        const double c = species == 0 ? center_a : center_b;
        hermite_functions(n - 1, (x - c) / width, out);
        const double s = 1.0 / std::sqrt(width);
        for (std::size_t j = 0; j < n; ++j) {
            out[j] *= s;
        }
    }
};

struct BasisOptions {
    bool validate = true;
    std::size_t validate_modes = 8;
    double min_overlap = 1.0 - 1e-6;
    /// Grid modes whose occupation is below this are not resolvable and are skipped.
    double min_occupation = 1e-13;
    oracle::GridOptions grid{};
};

/// Width and Schmidt parameter of the Gaussian exp(-A(a^2 + b^2) - 2Bab) in
/// coordinates shifted by -+x0/2, where A = (1 + mu)/4, B = (1 - mu)/4.
struct GaussianSchmidt {
    double width;
    double z;
};

[[nodiscard]] inline GaussianSchmidt gaussian_schmidt(double mu)
{
    if (!(mu >= 1.0)) {
        throw DomainError("curvature ratio mu < 1: harmonic approximation invalid");
    }
    const double A = 0.25 * (1.0 + mu);
    const double B = 0.25 * (1.0 - mu);
    const double width = std::pow(A * A - B * B, -0.25) / std::sqrt(2.0);
    // Mehler kernel: exp(-A(a^2+b^2) - 2Bab) ~ sum_j t^j psi_j psi_j, t = (-1 + sqrt(1 - k^2)) / k, k = B/A
    const double k = B / A;
    const double t = k == 0.0 ? 0.0 : -k / (1.0 + std::sqrt((1.0 - k) * (1.0 + k)));
    return {width, t * t};
}

[[nodiscard]] inline OrbitalBasis orbital_basis(const HarmonicApprox& approx, std::size_t J,
                                                const BasisOptions& opt = {})
{
    if (J == 0) {
        throw DomainError("orbital count J must be positive");
    }
    const auto gs = gaussian_schmidt(approx.mu);
    OrbitalBasis b;
    b.width = gs.width;
    b.center_a = -0.5 * approx.x0;
    b.center_b = 0.5 * approx.x0;
    b.count = J;
    b.mu = approx.mu;
    b.x0 = approx.x0;
    b.z_implied = gs.z;
    b.z_published = z_from_mu(approx.mu);
    b.valid = approx.valid;
    if (!opt.validate) {
        return b;
    }

    const auto svd = oracle::grid_schmidt(oracle::GaussianPair::from_harmonic(approx.mu, approx.x0), opt.grid);
    const std::size_t n = std::min({opt.validate_modes, J, svd.modes_a.size()});
    bool ok = true;
    std::vector<double> phi(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (svd.occupations[j] < opt.min_occupation) {
            break;
        }
        double oa = 0.0, ob = 0.0;
        for (std::size_t i = 0; i < svd.x.size(); ++i) {
            oa += svd.modes_a[j][i] * b.orbital(j, 0, svd.x[i]);
            ob += svd.modes_b[j][i] * b.orbital(j, 1, svd.x[i]);
        }
        const double overlap = std::min(std::abs(oa), std::abs(ob)) * svd.spacing;
        b.overlaps.push_back(overlap);
        ok = ok && overlap >= opt.min_overlap;
    }
    if (!ok) {
        throw BasisValidationError("analytic Schmidt modes disagree with the grid SVD", b.overlaps);
    }
    return b;
}

// ---------------------------------------------------------------------------
// Density profile
// ---------------------------------------------------------------------------

struct GridSpec {
    std::size_t points = 2048;
    double half_width = 0.0; ///< 0 selects x0/2 + w (sqrt(2J) + 4)
};

struct DensityGrid {
    std::vector<double> x;
    std::vector<double> rho_a;
    std::vector<double> rho_b;
    std::vector<double> rho_total;
    double norm = 0.0; ///< trapezoidal integral of rho_total
};

/// Samples x_i = L (2i - (n - 1)) / (n - 1): exactly mirror-symmetric.
[[nodiscard]] inline std::vector<double> symmetric_grid(double half_width, std::size_t points)
{
    if (points < 3) {
        throw DomainError("grid needs at least 3 points");
    }
    std::vector<double> x(points);
    const double den = static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        x[i] = half_width * (2.0 * static_cast<double>(i) - den) / den;
    }
    return x;
}

[[nodiscard]] inline double trapezoid(std::span<const double> y, double h)
{
    CompensatedSum s;
    for (std::size_t i = 0; i < y.size(); ++i) {
        s.add((i == 0 || i + 1 == y.size()) ? 0.5 * y[i] : y[i]);
    }
    return s.value() * h;
}

[[nodiscard]] inline double required_half_width(const OrbitalBasis& basis, std::size_t J)
{
    return 0.5 * basis.x0 + basis.width * std::sqrt(2.0 * static_cast<double>(J));
}

[[nodiscard]] inline std::vector<double> resolve_grid(const OrbitalBasis& basis, std::size_t J, const GridSpec& spec)
{
    const double need = required_half_width(basis, J);
    double L = spec.half_width;
    if (L == 0.0) {
        L = need + 4.0 * basis.width;
    } else if (L < need) {
        throw DomainError("density grid half-width " + std::to_string(L) + " does not cover the orbitals (need " +
                          std::to_string(need) + ")");
    }
    return symmetric_grid(L, spec.points);
}

/// rho(x) = sum_j n_j (phi_j^a(x)^2 + phi_j^b(x)^2): the one-body state of
/// the coboson ansatz is diagonal in the Schmidt basis.
[[nodiscard]] inline DensityGrid profile(std::span<const double> populations, const OrbitalBasis& basis,
                                         const GridSpec& spec = {})
{
    const std::size_t J = populations.size();
    if (J == 0) {
        throw DomainError("no populations supplied");
    }
    DensityGrid g;
    g.x = resolve_grid(basis, J, spec);
    const std::size_t n = g.x.size();
    g.rho_a.resize(n);
    g.rho_b.resize(n);
    g.rho_total.resize(n);
    std::vector<double> pa(J), pb(J);
    for (std::size_t i = 0; i < n; ++i) {
        basis.orbitals(J, 0, g.x[i], pa);
        basis.orbitals(J, 1, g.x[i], pb);
        double ra = 0.0, rb = 0.0;
        for (std::size_t j = J; j-- > 0;) {
            ra += populations[j] * pa[j] * pa[j];
            rb += populations[j] * pb[j] * pb[j];
        }
        g.rho_a[i] = ra;
        g.rho_b[i] = rb;
        g.rho_total[i] = ra + rb;
    }
    g.norm = trapezoid(g.rho_total, g.x[1] - g.x[0]);
    return g;
}

// ---------------------------------------------------------------------------
// Peaks and regimes
// ---------------------------------------------------------------------------

struct Peak {
    std::size_t index;
    double height;
    double prominence;
};

/// Local maxima of y with their topographic prominence. Plateaus count once,
/// at their midpoint.
[[nodiscard]] inline std::vector<Peak> find_peaks(std::span<const double> y)
{
    std::vector<Peak> out;
    const std::size_t n = y.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        if (!(y[i] > y[i - 1])) {
            ++i;
            continue;
        }
        std::size_t e = i;
        while (e + 1 < n && y[e + 1] == y[i]) {
            ++e;
        }
        if (e + 1 < n && y[e + 1] < y[i]) {
            const std::size_t p = (i + e) / 2;
            const double h = y[p];
            double left_min = h;
            for (std::size_t k = i; k-- > 0;) {
                if (y[k] > h) {
                    break;
                }
                left_min = std::min(left_min, y[k]);
            }
            double right_min = h;
            for (std::size_t k = e + 1; k < n; ++k) {
                if (y[k] > h) {
                    break;
                }
                right_min = std::min(right_min, y[k]);
            }
            out.push_back({p, h, h - std::max(left_min, right_min)});
        }
        i = e + 1;
    }
    return out;
}

inline constexpr double kDefaultProminence = 1e-3;

/// Peaks of rho_total whose prominence exceeds prominence * max(rho).
[[nodiscard]] inline std::size_t peaks(const DensityGrid& grid, double prominence = kDefaultProminence)
{
    if (!(prominence > 0.0 && prominence < 0.5)) {
        throw DomainError("prominence must lie in (0, 0.5)");
    }
    const double top = *std::max_element(grid.rho_total.begin(), grid.rho_total.end());
    std::size_t count = 0;
    for (const auto& p : find_peaks(grid.rho_total)) {
        count += p.prominence > prominence * top ? 1 : 0;
    }
    return count;
}

enum class Regime { friedel, wigner, intermediate };

[[nodiscard]] inline Regime classify(std::size_t count, std::size_t N)
{
    if (count == N) {
        return Regime::friedel;
    }
    if (count == 2 * N) {
        return Regime::wigner;
    }
    return Regime::intermediate;
}

[[nodiscard]] inline const char* to_string(Regime r)
{
    switch (r) {
    case Regime::friedel: return "Friedel";
    case Regime::wigner: return "Wigner";
    default: return "Intermediate";
    }
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct DensityOptions {
    double tail_tol = 1e-12;
    GridSpec grid{};
    double prominence = kDefaultProminence;
    BasisOptions basis{};
};

struct DensityResult {
    HarmonicApprox approx;
    OrbitalBasis basis;
    PopulationProfile populations;
    DensityGrid grid;
    std::size_t peak_count = 0;
    Regime regime = Regime::intermediate;
};

/// Populations from the spectrum with z_implied, orbitals from the same
/// Gaussian, then the profile and its peak count.
[[nodiscard]] inline DensityResult density_profile(const HarmonicApprox& approx, std::size_t N,
                                                   const DensityOptions& opt = {})
{
    if (N == 0) {
        throw DomainError("N must be positive");
    }
    DensityResult r;
    r.approx = approx;
    const auto gs = gaussian_schmidt(approx.mu);
    const std::vector<double> zs{gs.z};
    const auto spec = spectrum_for_pairs(zs, N, opt.tail_tol);
    r.populations = populations(spec, N);
    r.basis = orbital_basis(approx, spec.size(), opt.basis);
    r.grid = profile(r.populations.n, r.basis, opt.grid);
    r.peak_count = peaks(r.grid, opt.prominence);
    r.regime = classify(r.peak_count, N);
    return r;
}

} // namespace coboson
