#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace coboson {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without overflow; -inf is the additive identity.
[[nodiscard]] inline double log_add_exp(double a, double b) noexcept
{
    if (a < b) {
        const double t = a;
        a = b;
        b = t;
    }
    if (b == kNegInf) {
        return a;
    }
    return a + std::log1p(std::exp(b - a));
}

/// log of sum_i exp(terms[i]) accumulated in index order.
[[nodiscard]] inline double log_sum_exp(std::span<const double> terms) noexcept
{
    double peak = kNegInf;
    for (double t : terms) {
        if (t > peak) {
            peak = t;
        }
    }
    if (peak == kNegInf) {
        return kNegInf;
    }
    double sum = 0.0;
    for (double t : terms) {
        sum += std::exp(t - peak);
    }
    return peak + std::log(sum);
}

/// ln(n!) via lgamma.
[[nodiscard]] inline double log_factorial(std::size_t n) noexcept
{
    return std::lgamma(static_cast<double>(n) + 1.0);
}

/// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace coboson
