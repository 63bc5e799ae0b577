#pragma once

// Explicit Fock-space construction of the N-pair state for small N, used to
// check the one-body density without assuming it is diagonal in the Schmidt basis.

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "coboson/density.hpp"
#include "coboson/errors.hpp"
#include "coboson/spectrum.hpp"

namespace coboson::oracle {

/// Fermionic occupation-number state: bit j is a_j, bit J + j is b_j.
using FockState = std::map<std::uint32_t, double>;

namespace detail {

/// Applies the creation operator for mode m; returns false if occupied.
inline bool create(std::uint32_t& cfg, unsigned m, double& sign)
{
    const std::uint32_t bit = 1u << m;
    if (cfg & bit) {
        return false;
    }
    sign *= (std::popcount(cfg & (bit - 1u)) % 2) ? -1.0 : 1.0;
    cfg |= bit;
    return true;
}

inline bool annihilate(std::uint32_t& cfg, unsigned m, double& sign)
{
    const std::uint32_t bit = 1u << m;
    if (!(cfg & bit)) {
        return false;
    }
    cfg &= ~bit;
    sign *= (std::popcount(cfg & (bit - 1u)) % 2) ? -1.0 : 1.0;
    return true;
}

} // namespace detail

/// (c^dagger)^N |0>, normalized, with c^dagger = sum_j sqrt(lambda_j) a_j^dagger b_j^dagger.
[[nodiscard]] inline FockState coboson_state(const OccupationSpectrum& s, std::size_t N)
{
    const auto J = static_cast<unsigned>(s.size());
    if (N > 3 || J > 10) {
        throw CapacityError("Fock construction limited to N <= 3, J <= 10");
    }
    const auto lam = s.lambdas();
    FockState state{{0u, 1.0}};
    for (std::size_t step = 0; step < N; ++step) {
        FockState next;
        for (const auto& [cfg, amp] : state) {
            for (unsigned j = 0; j < J; ++j) {
                std::uint32_t c = cfg;
                double sign = 1.0;
                if (!detail::create(c, J + j, sign) || !detail::create(c, j, sign)) {
                    continue;
                }
                next[c] += sign * std::sqrt(lam[j]) * amp;
            }
        }
        state = std::move(next);
    }
    double norm2 = 0.0;
    for (const auto& [cfg, amp] : state) {
        norm2 += amp * amp;
    }
    if (!(norm2 > 0.0)) {
        throw InfeasibleError("N pairs do not fit into the retained modes");
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& [cfg, amp] : state) {
        amp *= inv;
    }
    return state;
}

/// rho_jk = <a_j^dagger a_k> over one species (offset 0 for a, J for b).
[[nodiscard]] inline std::vector<double> one_body_matrix(const FockState& psi, unsigned J, unsigned offset)
{
    std::vector<double> rho(static_cast<std::size_t>(J) * J, 0.0);
    for (const auto& [cfg, amp] : psi) {
        for (unsigned k = 0; k < J; ++k) {
            std::uint32_t c = cfg;
            double sign = 1.0;
            if (!detail::annihilate(c, offset + k, sign)) {
                continue;
            }
            for (unsigned j = 0; j < J; ++j) {
                std::uint32_t d = c;
                double sj = sign;
                if (!detail::create(d, offset + j, sj)) {
                    continue;
                }
                const auto it = psi.find(d);
                if (it != psi.end()) {
                    rho[static_cast<std::size_t>(j) * J + k] += it->second * sj * amp;
                }
            }
        }
    }
    return rho;
}

/// <Psi^dagger(x) Psi(x)> summed over all configuration pairs, on the same
/// grid density::profile would use for J orbitals.
[[nodiscard]] inline DensityGrid fock_density(const OccupationSpectrum& s, std::size_t N, const OrbitalBasis& basis,
                                              const GridSpec& spec = {})
{
    const auto psi = coboson_state(s, N);
    const auto J = static_cast<unsigned>(s.size());
    const auto rho_a = one_body_matrix(psi, J, 0);
    const auto rho_b = one_body_matrix(psi, J, J);

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
        for (unsigned j = 0; j < J; ++j) {
            for (unsigned k = 0; k < J; ++k) {
                ra += rho_a[j * J + k] * pa[j] * pa[k];
                rb += rho_b[j * J + k] * pb[j] * pb[k];
            }
        }
        g.rho_a[i] = ra;
        g.rho_b[i] = rb;
        g.rho_total[i] = ra + rb;
    }
    g.norm = trapezoid(g.rho_total, g.x[1] - g.x[0]);
    return g;
}

} // namespace coboson::oracle
