#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "coboson/errors.hpp"

namespace coboson {

inline constexpr std::size_t kMaxHermiteIndex = 10'000;

/// Orthonormal oscillator eigenfunctions psi_0..psi_jmax at xi, written to out.
///
/// Three-term recurrence on psi_j itself,
///   psi_{k+1} = sqrt(2/(k+1)) xi psi_k - sqrt(k/(k+1)) psi_{k-1},
/// with the Gaussian envelope kept as a separate log scale so that large |xi|
/// does not underflow before the polynomial part has grown.
inline void hermite_functions(std::size_t jmax, double xi, std::span<double> out)
{
    if (jmax > kMaxHermiteIndex) {
        throw CapacityError("oscillator eigenfunction index above 10^4");
    }
    constexpr double kBig = 1e150;
    const double norm0 = 1.0 / std::sqrt(std::sqrt(std::numbers::pi));
    double log_scale = -0.5 * xi * xi;
    double prev = 0.0;
    double cur = norm0;
    out[0] = cur * std::exp(log_scale);
    for (std::size_t k = 0; k < jmax; ++k) {
        const double kd = static_cast<double>(k);
        const double next = std::sqrt(2.0 / (kd + 1.0)) * xi * cur - std::sqrt(kd / (kd + 1.0)) * prev;
        prev = cur;
        cur = next;
        if (std::abs(cur) > kBig) {
            cur /= kBig;
            prev /= kBig;
            log_scale += std::log(kBig);
        }
        out[k + 1] = cur * std::exp(log_scale);
    }
}

/// psi_j(xi) for a single index.
[[nodiscard]] inline double hermite_fn(std::size_t j, double xi)
{
    std::vector<double> buf(j + 1);
    hermite_functions(j, xi, buf);
    return buf[j];
}

} // namespace coboson
