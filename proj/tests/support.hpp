#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace gen {

// Fixed-seed generators for the property tests.
class Source {
public:
    explicit Source(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    std::size_t integer(std::size_t lo, std::size_t hi)
    {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
    }
    std::vector<double> zs(std::size_t dims, double lo, double hi)
    {
        std::vector<double> z(dims);
        for (auto& v : z) {
            v = uniform(lo, hi);
        }
        return z;
    }

private:
    std::mt19937_64 rng_;
};

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

} // namespace gen
