#pragma once

// Normalization factors chi_N of the N-coboson state.
//
//   fermionic  chi_N = N! e_N(lambda)   (elementary symmetric polynomial)
//   bosonic    chi_N = N! h_N(lambda)   (complete homogeneous polynomial)
//
// The production path is an all-positive dynamic program carried in log
// space, so chi_N never underflows. The Newton-identity recursion and the
// partition sum over power sums are kept as independent verification routes
// and run in software floating point with a few hundred digits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "coboson/errors.hpp"
#include "coboson/logmath.hpp"
#include "coboson/spectrum.hpp"

namespace coboson {

/// Software float with 256 decimal digits.
using Extended = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<256>,
                                               boost::multiprecision::et_off>;

enum class ChiKind { fermionic, bosonic };
enum class ChiSource { dp, newton, partition };

/// ln chi_n for n = 0..N. A zero chi_n (Pauli blocking) is stored as -inf.
struct ChiTable {
    ChiKind kind = ChiKind::fermionic;
    ChiSource source = ChiSource::dp;
    std::vector<double> logchi;
    /// Heuristic |d chi_n| / chi_n from the discarded spectral tail: n * tail / lambda_min.
    std::vector<double> tail_error;
    /// Newton route only: estimated relative rounding error is above 1e-10.
    bool accuracy_warning = false;
    double estimated_rel_error = 0.0;

    [[nodiscard]] std::size_t pairs() const noexcept { return logchi.empty() ? 0 : logchi.size() - 1; }
    [[nodiscard]] double log(std::size_t n) const { return logchi.at(n); }
    [[nodiscard]] double chi(std::size_t n) const { return std::exp(logchi.at(n)); }
    [[nodiscard]] bool is_zero(std::size_t n) const { return logchi.at(n) == kNegInf; }
};

/// Purity bounds 1 - N P <= chi_{N+1} / chi_N <= 1 - P.
struct BoundPair {
    double lower = 0.0;
    double upper = 0.0;
    double purity = 0.0;
};

// ---------------------------------------------------------------------------
// Log-domain dynamic programs
// ---------------------------------------------------------------------------

/// ln e_k for k = 0..N over the given modes, skipping position `skip`.
[[nodiscard]] inline std::vector<double> log_elementary(std::span<const double> log_lambdas, std::size_t N,
                                                        std::size_t skip = static_cast<std::size_t>(-1))
{
    std::vector<double> le(N + 1, kNegInf);
    le[0] = 0.0;
    std::size_t seen = 0;
    for (std::size_t m = 0; m < log_lambdas.size(); ++m) {
        if (m == skip) {
            continue;
        }
        ++seen;
        const double ll = log_lambdas[m];
        for (std::size_t k = std::min(seen, N); k >= 1; --k) {
            le[k] = log_add_exp(le[k], ll + le[k - 1]);
        }
    }
    return le;
}

/// ln h_k for k = 0..N over the given modes.
[[nodiscard]] inline std::vector<double> log_complete(std::span<const double> log_lambdas, std::size_t N)
{
    std::vector<double> lh(N + 1, kNegInf);
    lh[0] = 0.0;
    for (double ll : log_lambdas) {
        for (std::size_t k = 1; k <= N; ++k) {
            lh[k] = log_add_exp(lh[k], ll + lh[k - 1]);
        }
    }
    return lh;
}

namespace detail {

inline void absorb_modes(std::vector<double>& poly, std::span<const double> log_lambdas)
{
    const std::size_t deg = poly.size() - 1;
    for (double ll : log_lambdas) {
        for (std::size_t k = deg; k >= 1; --k) {
            poly[k] = log_add_exp(poly[k], ll + poly[k - 1]);
        }
    }
}

inline void leave_one_out(std::span<const double> ll, std::size_t lo, std::size_t hi,
                          const std::vector<double>& outside, std::vector<double>& out)
{
    if (hi - lo == 1) {
        out[lo] = outside.back();
        return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    std::vector<double> with_right = outside;
    absorb_modes(with_right, ll.subspan(mid, hi - mid));
    leave_one_out(ll, lo, mid, with_right, out);
    std::vector<double> with_left = outside;
    absorb_modes(with_left, ll.subspan(lo, mid - lo));
    leave_one_out(ll, mid, hi, with_left, out);
}

inline std::vector<double> tail_errors(const OccupationSpectrum& s, std::size_t N)
{
    std::vector<double> err(N + 1, 0.0);
    if (s.size() == 0 || s.tail() == 0.0) {
        return err;
    }
    const double lmin = s.lambdas().back();
    for (std::size_t n = 0; n <= N; ++n) {
        err[n] = static_cast<double>(n) * s.tail() / lmin;
    }
    return err;
}

} // namespace detail

/// ln e_degree of the spectrum with each mode removed in turn, for every mode.
/// Divide and conquer over the mode list: each half is handed the product of
/// the factors (1 + lambda x) outside it, so every entry is a fresh positive
/// product rather than a downdate. Cost O(J * degree * log J).
[[nodiscard]] inline std::vector<double> log_elementary_leave_one_out(std::span<const double> log_lambdas,
                                                                      std::size_t degree)
{
    std::vector<double> out(log_lambdas.size(), kNegInf);
    if (log_lambdas.empty()) {
        return out;
    }
    std::vector<double> unit(degree + 1, kNegInf);
    unit[0] = 0.0;
    detail::leave_one_out(log_lambdas, 0, log_lambdas.size(), unit, out);
    return out;
}

/// Fermionic chi_n = n! e_n for n = 0..N.
[[nodiscard]] inline ChiTable chi_fermi_dp(const OccupationSpectrum& s, std::size_t N)
{
    ChiTable t;
    t.kind = ChiKind::fermionic;
    t.source = ChiSource::dp;
    t.logchi = log_elementary(s.log_lambdas(), N);
    for (std::size_t n = 0; n <= N; ++n) {
        if (t.logchi[n] != kNegInf) {
            t.logchi[n] += log_factorial(n);
        }
    }
    t.tail_error = detail::tail_errors(s, N);
    return t;
}

/// Bosonic chi_n = n! h_n for n = 0..N.
[[nodiscard]] inline ChiTable chi_bose(const OccupationSpectrum& s, std::size_t N)
{
    ChiTable t;
    t.kind = ChiKind::bosonic;
    t.source = ChiSource::dp;
    t.logchi = log_complete(s.log_lambdas(), N);
    for (std::size_t n = 0; n <= N; ++n) {
        if (t.logchi[n] != kNegInf) {
            t.logchi[n] += log_factorial(n);
        }
    }
    t.tail_error = detail::tail_errors(s, N);
    return t;
}

/// Fermionic table with mode `index` left out (recomputed, not downdated).
[[nodiscard]] inline ChiTable chi_excluding(const OccupationSpectrum& s, std::size_t index, std::size_t N)
{
    if (index >= s.size()) {
        throw DomainError("excluded mode is not part of the retained spectrum");
    }
    ChiTable t;
    t.logchi = log_elementary(s.log_lambdas(), N, index);
    for (std::size_t n = 0; n <= N; ++n) {
        if (t.logchi[n] != kNegInf) {
            t.logchi[n] += log_factorial(n);
        }
    }
    t.tail_error = detail::tail_errors(s, N);
    return t;
}

[[nodiscard]] inline ChiTable chi_excluding(const OccupationSpectrum& s, std::span<const std::uint32_t> label,
                                            std::size_t N)
{
    return chi_excluding(s, s.index_of(label), N);
}

enum class SubsetRange { first, complement };

/// Fermionic table over the first t modes, or over the modes from t on.
/// Over the first t modes chi_n vanishes for n > t.
[[nodiscard]] inline ChiTable chi_subset(const OccupationSpectrum& s, SubsetRange range, std::size_t t,
                                         std::size_t N)
{
    if (t > s.size()) {
        throw DomainError("window larger than the retained spectrum");
    }
    auto ll = s.log_lambdas();
    auto part = range == SubsetRange::first ? ll.first(t) : ll.subspan(t);
    ChiTable table;
    table.logchi = log_elementary(part, N);
    for (std::size_t n = 0; n <= N; ++n) {
        if (table.logchi[n] != kNegInf) {
            table.logchi[n] += log_factorial(n);
        }
    }
    table.tail_error = detail::tail_errors(s, N);
    return table;
}

// ---------------------------------------------------------------------------
// Ratios and bounds
// ---------------------------------------------------------------------------

/// chi_{N+1} / chi_N from a table holding both entries.
[[nodiscard]] inline double ratio(const ChiTable& t, std::size_t N)
{
    if (N + 1 > t.pairs()) {
        throw DomainError("table does not reach N + 1");
    }
    if (t.is_zero(N)) {
        throw InfeasibleError("chi_N = 0: ratio undefined");
    }
    if (t.is_zero(N + 1)) {
        return 0.0;
    }
    return std::exp(t.logchi[N + 1] - t.logchi[N]);
}

[[nodiscard]] inline BoundPair bounds(double purity_value, std::size_t N)
{
    if (!(purity_value > 0.0 && purity_value <= 1.0)) {
        throw DomainError("purity must lie in (0, 1]");
    }
    if (N < 1) {
        throw DomainError("bounds need N >= 1");
    }
    BoundPair b;
    b.purity = purity_value;
    b.lower = 1.0 - static_cast<double>(N) * purity_value;
    b.upper = 1.0 - purity_value;
    return b;
}

// ---------------------------------------------------------------------------
// Verification routes over power sums
// ---------------------------------------------------------------------------

namespace detail {

template <class Real>
double to_log(const Real& v)
{
    using std::log;
    return static_cast<double>(log(v));
}

template <class Real>
Real epsilon_of()
{
    return std::numeric_limits<Real>::epsilon();
}

} // namespace detail

/// Newton-identity recursion
///   chi_n = sum_{m=1..n} (n-1)!/(n-m)! (-1)^(m+1) chi_{n-m} M(m),  chi_0 = 1,
/// in Real arithmetic. `power_sums[m]` holds M(m) for m = 1..N (index 0 unused).
/// A forward rounding-error estimate is carried along; past 1e-10 the table is
/// flagged, past 1e-3 (or a non-positive chi) the result is rejected.
template <class Real = Extended>
[[nodiscard]] ChiTable chi_fermi_newton(std::span<const Real> power_sums, std::size_t N)
{
    if (power_sums.size() < N + 1) {
        throw DomainError("need power sums M(1..N)");
    }
    const Real eps = detail::epsilon_of<Real>();
    std::vector<Real> chi(N + 1);
    std::vector<Real> err(N + 1, Real(0)); // relative error bound per entry
    chi[0] = 1;

    ChiTable t;
    t.kind = ChiKind::fermionic;
    t.source = ChiSource::newton;
    t.logchi.assign(N + 1, 0.0);
    t.tail_error.assign(N + 1, 0.0);

    for (std::size_t n = 1; n <= N; ++n) {
        Real sum = 0;
        Real abs_err = 0;
        Real falling = 1; // (n-1)! / (n-m)!
        for (std::size_t m = 1; m <= n; ++m) {
            if (m > 1) {
                falling *= Real(static_cast<unsigned>(n - m + 1));
            }
            Real term = falling * chi[n - m] * power_sums[m];
            const Real mag = abs(term);
            abs_err += mag * (err[n - m] + eps * Real(4));
            if (m % 2 == 0) {
                term = -term;
            }
            sum += term;
        }
        chi[n] = sum;
        if (!(sum > 0)) {
            throw AccuracyError("Newton recursion lost all significant digits at n = " + std::to_string(n) +
                                "; use chi_fermi_dp");
        }
        err[n] = abs_err / sum;
        t.logchi[n] = detail::to_log(sum);
    }
    const double rel = static_cast<double>(err[N]);
    t.estimated_rel_error = rel;
    if (rel > 1e-3) {
        throw AccuracyError("Newton recursion exceeded the precision budget (estimated relative error " +
                            std::to_string(rel) + "); use chi_fermi_dp");
    }
    t.accuracy_warning = rel > 1e-10;
    return t;
}

template <class Real = Extended>
struct PartitionResult {
    Real value = 0;     ///< chi_N
    Real leading = 0;   ///< (M(1))^N, the k_1 = N term
    Real remainder = 0; ///< every partition with some part of size > 1
    std::size_t partitions = 0;
    double estimated_rel_error = 0.0;

    [[nodiscard]] double as_double() const { return static_cast<double>(value); }
};

inline constexpr std::size_t kMaxPartitionPairs = 30;

/// chi_N = N! sum over k_1 + 2 k_2 + ... + N k_N = N of
///   (-1)^(sum k + N) prod_i (M(i)/i)^k_i / k_i!
/// with the k_1 = N term reported separately.
template <class Real = Extended>
[[nodiscard]] PartitionResult<Real> chi_fermi_partition(std::span<const Real> power_sums, std::size_t N)
{
    if (N > kMaxPartitionPairs) {
        throw CapacityError("partition sum limited to N <= 30");
    }
    if (power_sums.size() < N + 1) {
        throw DomainError("need power sums M(1..N)");
    }
    PartitionResult<Real> r;
    Real factorial = 1;
    for (std::size_t i = 2; i <= N; ++i) {
        factorial *= Real(static_cast<unsigned>(i));
    }
    if (N == 0) {
        r.value = 1;
        r.leading = 1;
        r.partitions = 1;
        return r;
    }

    std::vector<Real> scaled(N + 1);
    for (std::size_t i = 1; i <= N; ++i) {
        scaled[i] = power_sums[i] / Real(static_cast<unsigned>(i));
    }

    Real magnitude = 0;
    std::vector<unsigned> k(N + 1, 0);
    // Depth-first over part sizes from N down to 1; `rest` is what remains to fill.
    auto visit = [&](auto&& self, std::size_t part, std::size_t rest, Real product, unsigned count) -> void {
        if (rest == 0) {
            Real term = product;
            if ((count + N) % 2 == 1) {
                term = -term;
            }
            ++r.partitions;
            magnitude += abs(term);
            if (k[1] == N) {
                r.leading += term;
            } else {
                r.remainder += term;
            }
            return;
        }
        if (part == 0) {
            return;
        }
        if (part == 1) {
            // Forced: k_1 = rest.
            Real p = product;
            Real fact = 1;
            for (std::size_t j = 1; j <= rest; ++j) {
                p *= scaled[1];
                fact *= Real(static_cast<unsigned>(j));
            }
            k[1] = static_cast<unsigned>(rest);
            self(self, 0, 0, p / fact, count + static_cast<unsigned>(rest));
            k[1] = 0;
            return;
        }
        Real p = product;
        Real fact = 1;
        for (std::size_t mult = 0; mult * part <= rest; ++mult) {
            if (mult > 0) {
                p *= scaled[part];
                fact *= Real(static_cast<unsigned>(mult));
            }
            k[part] = static_cast<unsigned>(mult);
            self(self, part - 1, rest - mult * part, p / fact, count + static_cast<unsigned>(mult));
        }
        k[part] = 0;
    };
    visit(visit, N, N, Real(1), 0u);

    r.leading *= factorial;
    r.remainder *= factorial;
    r.value = r.leading + r.remainder;
    if (r.value > 0) {
        r.estimated_rel_error =
            static_cast<double>(magnitude * factorial * detail::epsilon_of<Real>() * Real(4) / r.value);
    } else {
        r.estimated_rel_error = std::numeric_limits<double>::infinity();
    }
    return r;
}

} // namespace coboson
