#pragma once

// Two-body harmonic approximation and the geometric Schmidt spectrum it
// produces, together with closed-form power sums and entanglement entropies.
// Everything is in oscillator units (hbar = m = omega = 1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "coboson/errors.hpp"
#include "coboson/logmath.hpp"

namespace coboson {

inline constexpr double kReducedMass = 0.5; // m_r = m / 2
inline constexpr double kTotalMass = 2.0;   // m_R = 2 m

// ---------------------------------------------------------------------------
// Interaction and trap descriptors
// ---------------------------------------------------------------------------

/// V(r) = 1 / r^gamma.
struct InversePower {
    double gamma = 1.0;
};

/// Arbitrary radial potential given by value and first two derivatives.
struct GenericPotential {
    std::function<double(double)> value;
    std::function<double(double)> first;
    std::function<double(double)> second;
};

/// Interaction g * V(r) between the two constituents of a pair.
class InteractionSpec {
public:
    static InteractionSpec inverse_power(double gamma, double strength)
    {
        if (!(gamma > 0.0)) {
            throw DomainError("inverse-power exponent must be positive");
        }
        return InteractionSpec(InversePower{gamma}, strength);
    }

    static InteractionSpec generic(GenericPotential potential, double strength)
    {
        if (!potential.value || !potential.first || !potential.second) {
            throw DomainError("generic potential needs value, first and second derivative");
        }
        return InteractionSpec(std::move(potential), strength);
    }

    [[nodiscard]] double strength() const noexcept { return strength_; }
    [[nodiscard]] bool is_inverse_power() const noexcept
    {
        return std::holds_alternative<InversePower>(kind_);
    }
    [[nodiscard]] double gamma() const
    {
        if (!is_inverse_power()) {
            throw DomainError("interaction is not an inverse power");
        }
        return std::get<InversePower>(kind_).gamma;
    }

    [[nodiscard]] double value(double r) const
    {
        if (is_inverse_power()) {
            return std::pow(r, -gamma());
        }
        return std::get<GenericPotential>(kind_).value(r);
    }
    [[nodiscard]] double first(double r) const
    {
        if (is_inverse_power()) {
            const double g = gamma();
            return -g * std::pow(r, -g - 1.0);
        }
        return std::get<GenericPotential>(kind_).first(r);
    }
    [[nodiscard]] double second(double r) const
    {
        if (is_inverse_power()) {
            const double g = gamma();
            return g * (g + 1.0) * std::pow(r, -g - 2.0);
        }
        return std::get<GenericPotential>(kind_).second(r);
    }

    /// The same interaction re-expressed as a generic descriptor, so the
    /// numerical root finder can be run against the closed form.
    [[nodiscard]] InteractionSpec as_generic() const
    {
        if (!is_inverse_power()) {
            return *this;
        }
        const double g = gamma();
        GenericPotential p;
        p.value = [g](double r) { return std::pow(r, -g); };
        p.first = [g](double r) { return -g * std::pow(r, -g - 1.0); };
        p.second = [g](double r) { return g * (g + 1.0) * std::pow(r, -g - 2.0); };
        return generic(std::move(p), strength_);
    }

private:
    InteractionSpec(std::variant<InversePower, GenericPotential> kind, double strength)
        : kind_(std::move(kind)), strength_(strength)
    {
        if (!(strength_ > 0.0)) {
            throw DomainError("interaction strength g must be positive");
        }
    }

    std::variant<InversePower, GenericPotential> kind_;
    double strength_;
};

/// Trap geometry: dimension d and one anisotropy per transverse axis.
/// An anisotropy of exactly 1 is the isotropic limit.
struct TrapSpec {
    std::size_t dimension = 1;
    std::vector<double> anisotropies;

    void validate() const
    {
        if (dimension < 1) {
            throw DomainError("trap dimension must be at least 1");
        }
        if (anisotropies.size() != dimension - 1) {
            throw DomainError("trap needs exactly d-1 anisotropy parameters");
        }
        for (double e : anisotropies) {
            if (!(e >= 1.0)) {
                throw DomainError("anisotropy parameters must be >= 1");
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Harmonic approximation
// ---------------------------------------------------------------------------

struct HarmonicApprox {
    double x0 = 0.0; ///< equilibrium separation, oscillator lengths
    double mu = 1.0; ///< ratio of relative-motion to trap frequency along x
    bool valid = false; ///< strong-interaction regime reached
};

struct EquilibriumOptions {
    double strong_threshold = 2.0; ///< x0 at or above which the approximation is flagged valid
    double r_min = 1e-6;
    double tolerance = 1e-12;
    double r_max_limit = 1e12;
};

namespace detail {

inline double curvature_ratio(const InteractionSpec& v, double x0)
{
    const double slope = -v.first(x0) / x0;
    const double mu2 = v.second(x0) / slope + 1.0;
    if (!(mu2 > 0.0)) {
        throw DomainError("potential has no harmonic minimum at the equilibrium separation");
    }
    return std::sqrt(mu2);
}

} // namespace detail

/// Bracketed bisection for the equilibrium separation of any repulsive,
/// monotone decreasing potential.
[[nodiscard]] inline HarmonicApprox solve_equilibrium_numeric(const InteractionSpec& v,
                                                              const EquilibriumOptions& opt = {})
{
    const double target = kReducedMass / (2.0 * v.strength());
    // f decreases through zero at x0 for the potentials we accept.
    auto f = [&](double r) {
        const double d = v.first(r);
        if (!(d < 0.0)) {
            throw DomainError("potential must be repulsive and monotone decreasing (V'(r) < 0)");
        }
        return -d / r - target;
    };

    double lo = opt.r_min;
    double hi = 2.0 * lo;
    const double f_lo = f(lo);
    if (!(f_lo > 0.0)) {
        throw SolverError("no sign change: -(1/r)V'(r) already below the confinement scale at r_min");
    }
    while (f(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > opt.r_max_limit) {
            throw SolverError("equilibrium root bracket did not close before r_max limit");
        }
    }
    while (hi - lo > opt.tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (f(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    HarmonicApprox out;
    out.x0 = 0.5 * (lo + hi);
    out.mu = detail::curvature_ratio(v, out.x0);
    out.valid = out.x0 >= opt.strong_threshold;
    return out;
}

/// Equilibrium separation x0 and curvature ratio mu. Inverse powers use the
/// closed form x0 = (2 gamma g / m_r)^(1/(gamma+2)), mu^2 = gamma + 2.
[[nodiscard]] inline HarmonicApprox solve_equilibrium(const InteractionSpec& v,
                                                      const EquilibriumOptions& opt = {})
{
    if (!v.is_inverse_power()) {
        return solve_equilibrium_numeric(v, opt);
    }
    const double gamma = v.gamma();
    HarmonicApprox out;
    out.x0 = std::pow(2.0 * gamma * v.strength() / kReducedMass, 1.0 / (gamma + 2.0));
    out.mu = detail::curvature_ratio(v, out.x0);
    out.valid = out.x0 >= opt.strong_threshold;
    return out;
}

/// Strength g that places the inverse-power equilibrium at separation x0.
[[nodiscard]] inline double strength_for_separation(double gamma, double x0)
{
    if (!(gamma > 0.0) || !(x0 > 0.0)) {
        throw DomainError("gamma and x0 must be positive");
    }
    return kReducedMass * std::pow(x0, gamma + 2.0) / (2.0 * gamma);
}

// ---------------------------------------------------------------------------
// Generating parameters
// ---------------------------------------------------------------------------

/// z_x = ((1 - mu) / (1 + mu))^2, the published relation.
[[nodiscard]] inline double z_from_mu(double mu)
{
    if (!(mu >= 1.0)) {
        throw DomainError("curvature ratio mu < 1: harmonic approximation invalid");
    }
    const double t = (mu - 1.0) / (mu + 1.0);
    return t * t;
}

/// Schmidt parameter of a two-body Gaussian with centre-of-mass frequency 1
/// and relative frequency mu: ((1 - sqrt(mu)) / (1 + sqrt(mu)))^2. This is the
/// ratio a direct SVD of the wave function reproduces.
[[nodiscard]] inline double z_from_mu_gaussian(double mu)
{
    if (!(mu >= 1.0)) {
        throw DomainError("curvature ratio mu < 1: harmonic approximation invalid");
    }
    const double s = std::sqrt(mu);
    const double t = (s - 1.0) / (s + 1.0);
    return t * t;
}

/// z_y from the trap anisotropy; exactly 1 for an isotropic trap.
[[nodiscard]] inline double z_from_anisotropy(double epsilon)
{
    if (!(epsilon >= 1.0)) {
        throw DomainError("anisotropy epsilon must be >= 1");
    }
    if (epsilon == 1.0) {
        return 1.0;
    }
    // a - b = -1 / ((a + b)(a^2 + b^2)) with a^4 - b^4 = -1 avoids the
    // cancellation of the textbook form at large epsilon.
    const double a = std::sqrt(std::sqrt((epsilon - 1.0) * (epsilon + 1.0)));
    const double b = std::sqrt(epsilon);
    const double diff = 1.0 / ((a + b) * (a * a + b * b));
    const double t = diff / (a + b);
    return t * t;
}

/// (z_x, z_y1, ..., z_y(d-1)) for a physical trap.
[[nodiscard]] inline std::vector<double> generating_parameters(double z_x, const TrapSpec& trap)
{
    trap.validate();
    std::vector<double> zs{z_x};
    for (double e : trap.anisotropies) {
        zs.push_back(z_from_anisotropy(e));
    }
    return zs;
}

// ---------------------------------------------------------------------------
// Occupation spectrum
// ---------------------------------------------------------------------------

/// Descending Schmidt occupations with their per-axis mode labels.
class OccupationSpectrum {
public:
    OccupationSpectrum() = default;

    /// Wraps an explicit list of occupations (sorted here, labels are the
    /// original positions). Used for truncated and synthetic spectra.
    static OccupationSpectrum from_occupations(std::vector<double> lambdas, double tail = 0.0)
    {
        std::vector<std::uint32_t> order(lambdas.size());
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return lambdas[a] > lambdas[b]; });
        OccupationSpectrum s;
        s.dims_ = 1;
        s.tail_ = tail;
        for (auto i : order) {
            if (!(lambdas[i] > 0.0)) {
                throw DomainError("occupations must be strictly positive");
            }
            s.lambdas_.push_back(lambdas[i]);
            s.log_lambdas_.push_back(std::log(lambdas[i]));
            s.labels_.push_back(i);
        }
        return s;
    }

    [[nodiscard]] std::size_t size() const noexcept { return lambdas_.size(); }
    [[nodiscard]] std::size_t dims() const noexcept { return dims_; }
    [[nodiscard]] std::span<const double> lambdas() const noexcept { return lambdas_; }
    [[nodiscard]] std::span<const double> log_lambdas() const noexcept { return log_lambdas_; }
    [[nodiscard]] double lambda(std::size_t i) const { return lambdas_.at(i); }
    [[nodiscard]] std::span<const double> zs() const noexcept { return zs_; }
    /// Upper bound on the occupation mass not retained.
    [[nodiscard]] double tail() const noexcept { return tail_; }
    [[nodiscard]] std::span<const std::uint32_t> label(std::size_t i) const
    {
        return std::span<const std::uint32_t>(labels_).subspan(i * dims_, dims_);
    }
    [[nodiscard]] std::size_t index_of(std::span<const std::uint32_t> lbl) const
    {
        for (std::size_t i = 0; i < size(); ++i) {
            auto l = label(i);
            if (std::equal(l.begin(), l.end(), lbl.begin(), lbl.end())) {
                return i;
            }
        }
        throw DomainError("unknown mode label");
    }

    /// First J modes; the dropped mass is added to the tail.
    [[nodiscard]] OccupationSpectrum truncated(std::size_t J) const
    {
        OccupationSpectrum s = *this;
        if (J >= size()) {
            return s;
        }
        CompensatedSum dropped;
        for (std::size_t i = J; i < size(); ++i) {
            dropped.add(lambdas_[i]);
        }
        s.lambdas_.resize(J);
        s.log_lambdas_.resize(J);
        s.labels_.resize(J * dims_);
        s.tail_ += dropped.value();
        return s;
    }

    /// Sub-spectrum over a contiguous range of modes [first, last).
    [[nodiscard]] OccupationSpectrum slice(std::size_t first, std::size_t last) const
    {
        last = std::min(last, size());
        first = std::min(first, last);
        OccupationSpectrum s;
        s.dims_ = dims_;
        s.zs_ = zs_;
        s.tail_ = 0.0;
        s.lambdas_.assign(lambdas_.begin() + first, lambdas_.begin() + last);
        s.log_lambdas_.assign(log_lambdas_.begin() + first, log_lambdas_.begin() + last);
        s.labels_.assign(labels_.begin() + first * dims_, labels_.begin() + last * dims_);
        return s;
    }

    /// The spectrum with mode i removed.
    [[nodiscard]] OccupationSpectrum without(std::size_t i) const
    {
        if (i >= size()) {
            throw DomainError("mode index outside the retained spectrum");
        }
        OccupationSpectrum s = *this;
        s.lambdas_.erase(s.lambdas_.begin() + i);
        s.log_lambdas_.erase(s.log_lambdas_.begin() + i);
        s.labels_.erase(s.labels_.begin() + i * dims_, s.labels_.begin() + (i + 1) * dims_);
        return s;
    }

private:
    friend struct SpectrumBuilder;

    std::vector<double> lambdas_;
    std::vector<double> log_lambdas_;
    std::vector<std::uint32_t> labels_;
    std::vector<double> zs_;
    double tail_ = 0.0;
    std::size_t dims_ = 1;
};

struct SpectrumOptions {
    /// Extra modes appended along the slowest-decaying axis. Spectra that
    /// carry N pairs need roughly N of them so that the occupied modes, not
    /// just the most probable ones, are resolved to tail_tol.
    std::size_t reserve_modes = 0;
    std::size_t max_modes = 1'000'000;
};

struct SpectrumBuilder {
    static OccupationSpectrum build(std::span<const double> zs, double tail_tol,
                                    const SpectrumOptions& opt)
    {
        if (zs.empty()) {
            throw DomainError("at least one generating parameter is required");
        }
        if (!(tail_tol > 0.0 && tail_tol <= 1e-3)) {
            throw DomainError("tail_tol must lie in (0, 1e-3]");
        }
        const std::size_t d = zs.size();
        std::vector<std::size_t> per_axis(d);
        std::size_t slowest = 0;
        for (std::size_t i = 0; i < d; ++i) {
            const double z = zs[i];
            if (z == 1.0) {
                throw DomainError("z = 1 has no normalizable spectrum; use the symmetry-limit analytics");
            }
            if (!(z >= 0.0 && z < 1.0)) {
                throw DomainError("generating parameters must lie in [0, 1)");
            }
            if (z == 0.0) {
                per_axis[i] = 1;
            } else {
                const double j = std::ceil(std::log(tail_tol / static_cast<double>(d)) / std::log(z));
                per_axis[i] = static_cast<std::size_t>(std::max(1.0, j));
            }
            if (z > zs[slowest]) {
                slowest = i;
            }
        }
        if (zs[slowest] > 0.0) {
            per_axis[slowest] += opt.reserve_modes;
        }

        double count = 1.0;
        for (auto j : per_axis) {
            count *= static_cast<double>(j);
        }
        if (count > static_cast<double>(opt.max_modes)) {
            std::ostringstream msg;
            msg << "spectrum would retain " << count << " modes (cap " << opt.max_modes << ") for z = [";
            for (std::size_t i = 0; i < d; ++i) {
                msg << (i ? ", " : "") << zs[i];
            }
            msg << "]";
            throw CapacityError(msg.str());
        }
        const auto total = static_cast<std::size_t>(count);

        std::vector<double> log_base(d), log_z(d);
        double log_kept = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            log_base[i] = std::log1p(-zs[i]);
            log_z[i] = zs[i] > 0.0 ? std::log(zs[i]) : 0.0;
            if (zs[i] > 0.0) {
                log_kept += std::log1p(-std::exp(static_cast<double>(per_axis[i]) * log_z[i]));
            }
        }

        std::vector<double> logs(total);
        std::vector<std::uint32_t> labels(total * d);
        std::vector<std::uint32_t> idx(d, 0);
        for (std::size_t n = 0; n < total; ++n) {
            double l = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                l += log_base[i] + static_cast<double>(idx[i]) * log_z[i];
                labels[n * d + i] = idx[i];
            }
            logs[n] = l;
            for (std::size_t i = d; i-- > 0;) {
                if (++idx[i] < per_axis[i]) {
                    break;
                }
                idx[i] = 0;
            }
        }

        std::vector<std::uint32_t> order(total);
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (logs[a] != logs[b]) {
                return logs[a] > logs[b];
            }
            return std::lexicographical_compare(labels.begin() + a * d, labels.begin() + (a + 1) * d,
                                                labels.begin() + b * d, labels.begin() + (b + 1) * d);
        });

        OccupationSpectrum s;
        s.dims_ = d;
        s.zs_.assign(zs.begin(), zs.end());
        s.tail_ = -std::expm1(log_kept);
        s.lambdas_.reserve(total);
        s.log_lambdas_.reserve(total);
        s.labels_.reserve(total * d);
        for (auto k : order) {
            s.log_lambdas_.push_back(logs[k]);
            s.lambdas_.push_back(std::exp(logs[k]));
            s.labels_.insert(s.labels_.end(), labels.begin() + k * d, labels.begin() + (k + 1) * d);
        }
        return s;
    }
};

/// Product occupations prod_i (1 - z_i) z_i^j_i over the per-axis truncation
/// J_i = ceil(log(tail_tol / d) / log z_i), sorted descending.
[[nodiscard]] inline OccupationSpectrum build_spectrum(std::span<const double> zs, double tail_tol,
                                                       const SpectrumOptions& opt = {})
{
    return SpectrumBuilder::build(zs, tail_tol, opt);
}

[[nodiscard]] inline OccupationSpectrum build_spectrum(std::initializer_list<double> zs, double tail_tol,
                                                       const SpectrumOptions& opt = {})
{
    return SpectrumBuilder::build(std::vector<double>(zs), tail_tol, opt);
}

/// Spectrum resolved well enough to host N pairs.
[[nodiscard]] inline OccupationSpectrum spectrum_for_pairs(std::span<const double> zs, std::size_t pairs,
                                                           double tail_tol = 1e-12)
{
    SpectrumOptions opt;
    opt.reserve_modes = pairs + 1;
    return build_spectrum(zs, tail_tol, opt);
}

// ---------------------------------------------------------------------------
// Power sums and entropies
// ---------------------------------------------------------------------------

/// Purity prod_i (1 - z_i) / (1 + z_i); defined (as 0) at z = 1.
[[nodiscard]] inline double purity(std::span<const double> zs) noexcept
{
    double p = 1.0;
    for (double z : zs) {
        p *= (1.0 - z) / (1.0 + z);
    }
    return p;
}

namespace detail {

inline void check_generating(std::span<const double> zs)
{
    for (double z : zs) {
        if (!(z >= 0.0 && z < 1.0)) {
            throw DomainError("generating parameters must lie in [0, 1)");
        }
    }
}

} // namespace detail

/// M(m) = sum_j lambda_j^m = prod_i (1 - z_i)^m / (1 - z_i^m).
[[nodiscard]] inline double power_sum(std::span<const double> zs, unsigned m)
{
    if (m < 1) {
        throw DomainError("power sum order must be >= 1");
    }
    detail::check_generating(zs);
    if (m == 1) {
        return 1.0;
    }
    if (m == 2) {
        return purity(zs);
    }
    double out = 1.0;
    for (double z : zs) {
        if (z == 0.0) {
            continue;
        }
        const double md = static_cast<double>(m);
        out *= std::exp(md * std::log1p(-z)) / -std::expm1(md * std::log(z));
    }
    return out;
}

/// The same closed form evaluated in an extended-precision type.
template <class Real>
[[nodiscard]] Real power_sum_as(std::span<const double> zs, unsigned m)
{
    if (m < 1) {
        throw DomainError("power sum order must be >= 1");
    }
    detail::check_generating(zs);
    Real out = 1;
    if (m == 1) {
        return out;
    }
    for (double zd : zs) {
        const Real z = zd;
        Real zm = 1;
        Real one_minus = 1;
        for (unsigned k = 0; k < m; ++k) {
            zm *= z;
            one_minus *= (Real(1) - z);
        }
        out *= one_minus / (Real(1) - zm);
    }
    return out;
}

/// Power sums M(1..n_max) of an explicit spectrum, in Real arithmetic.
template <class Real>
[[nodiscard]] std::vector<Real> power_sums_of(const OccupationSpectrum& s, unsigned n_max)
{
    std::vector<Real> out(n_max + 1, Real(0));
    for (double l : s.lambdas()) {
        const Real lr = l;
        Real p = lr;
        for (unsigned m = 1; m <= n_max; ++m) {
            out[m] += p;
            p *= lr;
        }
    }
    return out;
}

/// Closed-form power sums M(1..n_max) in Real arithmetic; index 0 unused.
template <class Real>
[[nodiscard]] std::vector<Real> power_sums_closed(std::span<const double> zs, unsigned n_max)
{
    std::vector<Real> out(n_max + 1, Real(0));
    for (unsigned m = 1; m <= n_max; ++m) {
        out[m] = power_sum_as<Real>(zs, m);
    }
    return out;
}

/// Entropies of one geometric factor (1 - z) z^j, in bits.
struct AxisEntropy {
    double z = 0.0;
    double von_neumann = 0.0;
    double linear = 0.0;
    double min_entropy = 0.0;
    double max_entropy = 0.0;
    std::vector<double> renyi;
};

struct EntropyReport {
    std::vector<double> alphas;
    std::vector<double> renyi;
    double von_neumann = 0.0;
    double linear = 0.0;
    double min_entropy = 0.0;
    double max_entropy = 0.0;
    std::vector<AxisEntropy> axes;
};

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double renyi_axis(double z, double alpha)
{
    if (z == 0.0) {
        return 0.0;
    }
    if (z == 1.0) {
        return kInf;
    }
    if (alpha == 1.0) {
        return -((1.0 - z) * std::log2(1.0 - z) + z * std::log2(z)) / (1.0 - z);
    }
    const double log2_num = alpha * std::log1p(-z) / std::log(2.0);
    const double log2_den = std::log(-std::expm1(alpha * std::log(z))) / std::log(2.0);
    return (log2_num - log2_den) / (1.0 - alpha);
}

inline AxisEntropy axis_entropy(double z, std::span<const double> alphas)
{
    AxisEntropy a;
    a.z = z;
    a.von_neumann = renyi_axis(z, 1.0);
    const double zs[1] = {z};
    a.linear = 1.0 - purity(zs);
    a.min_entropy = z == 0.0 ? 0.0 : (z == 1.0 ? kInf : -std::log2(1.0 - z));
    a.max_entropy = z == 0.0 ? 0.0 : kInf;
    for (double alpha : alphas) {
        a.renyi.push_back(renyi_axis(z, alpha));
    }
    return a;
}

} // namespace detail

/// Closed-form entropies of the product spectrum; every additive entropy is
/// the sum of its per-axis terms. Divergent values are +infinity.
[[nodiscard]] inline EntropyReport entropies(std::span<const double> zs, std::span<const double> alphas = {})
{
    for (double z : zs) {
        if (!(z >= 0.0 && z <= 1.0)) {
            throw DomainError("generating parameters must lie in [0, 1]");
        }
    }
    for (double a : alphas) {
        if (!(a > 0.0)) {
            throw DomainError("Renyi order alpha must be positive");
        }
    }
    EntropyReport r;
    r.alphas.assign(alphas.begin(), alphas.end());
    r.renyi.assign(alphas.size(), 0.0);
    for (double z : zs) {
        auto a = detail::axis_entropy(z, alphas);
        r.von_neumann += a.von_neumann;
        r.min_entropy += a.min_entropy;
        r.max_entropy += a.max_entropy;
        for (std::size_t k = 0; k < alphas.size(); ++k) {
            r.renyi[k] += a.renyi[k];
        }
        r.axes.push_back(std::move(a));
    }
    r.linear = 1.0 - purity(zs);
    return r;
}

} // namespace coboson
