#include <gtest/gtest.h>

#include <cmath>

#include "coboson/oracle.hpp"
#include "coboson/symfun.hpp"
#include "reference.hpp"
#include "support.hpp"

using namespace coboson;

namespace {

OccupationSpectrum geometric(double z, std::size_t J)
{
    return build_spectrum({z}, 1e-14).truncated(J);
}

double log_binomial(std::size_t n, std::size_t k)
{
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

} // namespace

TEST(ChiDp, SmallOrders)
{
    const auto s = build_spectrum({0.5}, 1e-14);
    const auto f = chi_fermi_dp(s, 2);
    EXPECT_EQ(f.log(0), 0.0);
    EXPECT_NEAR(f.chi(1), 1.0 - s.tail(), 1e-15);
    EXPECT_NEAR(f.chi(2), 2.0 / 3.0, 1e-13);
    const auto b = chi_bose(s, 2);
    EXPECT_NEAR(b.chi(1), 1.0, 1e-13);
    EXPECT_NEAR(b.chi(2), 4.0 / 3.0, 1e-13);
}

TEST(ChiDp, FrozenEnumeration)
{
    const auto s12 = geometric(0.5, 12);
    EXPECT_LT(gen::rel_err(chi_fermi_dp(s12, 4).chi(4), ref::kChiF4J12z05), 1e-10);
    EXPECT_LT(gen::rel_err(oracle::chi_bruteforce(s12, 4, ChiKind::fermionic), ref::kChiF4J12z05), 1e-13);
    const auto s10 = geometric(0.5, 10);
    EXPECT_LT(gen::rel_err(chi_bose(s10, 3).chi(3), ref::kChiB3J10z05), 1e-10);
    EXPECT_LT(gen::rel_err(oracle::chi_bruteforce(s10, 3, ChiKind::bosonic), ref::kChiB3J10z05), 1e-13);
}

TEST(ChiDp, PauliBlockingExactZero)
{
    const auto s = geometric(0.5, 6);
    const auto t = chi_fermi_dp(s, 8);
    EXPECT_FALSE(t.is_zero(6));
    EXPECT_TRUE(t.is_zero(7));
    EXPECT_TRUE(t.is_zero(8));
    EXPECT_EQ(t.chi(7), 0.0);
    EXPECT_EQ(ratio(t, 6), 0.0);
    EXPECT_THROW((void)ratio(t, 7), InfeasibleError);
    EXPECT_FALSE(chi_bose(s, 8).is_zero(8));
}

TEST(ChiDp, TailErrorReported)
{
    const auto s = build_spectrum({0.5}, 1e-6);
    const auto t = chi_fermi_dp(s, 3);
    ASSERT_EQ(t.tail_error.size(), 4u);
    EXPECT_EQ(t.tail_error[0], 0.0);
    EXPECT_NEAR(t.tail_error[2], 2.0 * s.tail() / s.lambdas().back(), 1e-18);
}

TEST(ChiDp, NoUnderflowAtLargeN)
{
    const auto s = spectrum_for_pairs(std::vector<double>{0.1}, 150);
    const auto t = chi_fermi_dp(s, 150);
    EXPECT_TRUE(std::isfinite(t.log(150)));
    EXPECT_LT(t.log(150), -1000.0);
}

TEST(ChiNewton, AgreesWithDp)
{
    const auto s = build_spectrum({0.8}, 1e-14);
    const auto M = power_sums_of<Extended>(s, 15);
    const auto newton = chi_fermi_newton<Extended>(M, 15);
    const auto dp = chi_fermi_dp(s, 15);
    EXPECT_EQ(newton.source, ChiSource::newton);
    EXPECT_LT(gen::rel_err(newton.chi(15), dp.chi(15)), 1e-8);
    EXPECT_LT(gen::rel_err(dp.chi(15), ref::kChiF15z08), 1e-8);
    EXPECT_NEAR(newton.chi(1), 1.0, 1e-12);
    const std::vector<double> z{0.5};
    const auto closed = power_sums_closed<Extended>(z, 2);
    EXPECT_NEAR(chi_fermi_newton<Extended>(closed, 2).chi(2), 2.0 / 3.0, 1e-15);
}

TEST(ChiNewton, DoublePrecisionCancellationRejected)
{
    const auto s = spectrum_for_pairs(std::vector<double>{0.3}, 40);
    const auto M = power_sums_of<double>(s, 40);
    EXPECT_THROW((void)chi_fermi_newton<double>(M, 40), AccuracyError);
}

TEST(ChiPartition, SmallAndCross)
{
    const std::vector<double> z{0.5};
    const auto M = power_sums_closed<Extended>(z, 2);
    const auto two = chi_fermi_partition<Extended>(M, 2);
    EXPECT_EQ(two.partitions, 2u);
    EXPECT_NEAR(two.as_double(), 1.0 - 1.0 / 3.0, 1e-15);

    const std::vector<double> z6{0.6};
    const auto M6 = power_sums_closed<Extended>(z6, 6);
    const double p6 = chi_fermi_partition<Extended>(M6, 6).as_double();
    EXPECT_LT(gen::rel_err(p6, ref::kChiF6z06), 1e-12);
    const auto s = build_spectrum({0.6}, 1e-14);
    EXPECT_LT(gen::rel_err(p6, chi_fermi_dp(s, 6).chi(6)), 1e-9);
}

TEST(ChiPartition, NearIsotropicLimit)
{
    const std::vector<double> zs{z_from_mu(std::sqrt(3.0)), 0.9999};
    const auto M = power_sums_closed<Extended>(zs, 5);
    const auto r = chi_fermi_partition<Extended>(M, 5);
    EXPECT_NEAR(r.as_double(), 1.0, 1e-3);
    EXPECT_NEAR(static_cast<double>(r.leading), 1.0, 1e-12);
    EXPECT_THROW((void)chi_fermi_partition<Extended>(power_sums_closed<Extended>(zs, 31), 31), CapacityError);
}

TEST(Ratio, NearOneAndBounds)
{
    const std::vector<double> z{1.0 - 1e-6};
    const auto M = power_sums_closed<Extended>(z, 2);
    const auto t = chi_fermi_newton<Extended>(M, 2);
    const double P = purity(z);
    EXPECT_NEAR(ratio(t, 1), 1.0 - P, 1e-12);
    EXPECT_NEAR(ratio(t, 1), 1.0 - 5e-7, 1e-9);

    const auto s = spectrum_for_pairs(std::vector<double>{0.9}, 11);
    const double r = ratio(chi_fermi_dp(s, 11), 10);
    const auto b = bounds(purity(std::vector<double>{0.9}), 10);
    EXPECT_GE(r, b.lower);
    EXPECT_LE(r, b.upper);
}

TEST(Bounds, Examples)
{
    const auto b1 = bounds(1.0, 1);
    EXPECT_EQ(b1.lower, 0.0);
    EXPECT_EQ(b1.upper, 0.0);
    EXPECT_EQ(ratio(chi_fermi_dp(build_spectrum({0.0}, 1e-12), 2), 1), 0.0);

    const auto b = bounds(purity(std::vector<double>{0.95}), 5);
    EXPECT_NEAR(b.purity, 1.0 / 39.0, 1e-15);
    EXPECT_NEAR(b.lower, 0.8718, 1e-4);
    EXPECT_NEAR(b.upper, 0.9744, 1e-4);

    const std::vector<double> zs{0.0718, 0.9999};
    EXPECT_NEAR(bounds(purity(zs), 100).lower, 0.9957, 1e-4);
    EXPECT_THROW((void)bounds(0.0, 1), DomainError);
    EXPECT_THROW((void)bounds(0.5, 0), DomainError);
}

TEST(Excluding, Examples)
{
    const auto one = build_spectrum({0.0}, 1e-12);
    EXPECT_EQ(chi_excluding(one, 0, 0).chi(0), 1.0);
    const auto s = build_spectrum({0.5}, 1e-14);
    EXPECT_LT(gen::rel_err(chi_excluding(s, 0, 2).chi(2), ref::kChiF2z05Excl0), 1e-12);
    const auto s16 = s.truncated(16);
    EXPECT_LT(gen::rel_err(chi_excluding(s16, 0, 2).chi(2),
                           oracle::chi_bruteforce(s16.without(0), 2, ChiKind::fermionic)),
              1e-12);
    const std::uint32_t lbl[1] = {0};
    EXPECT_EQ(chi_excluding(s, lbl, 2).chi(2), chi_excluding(s, 0, 2).chi(2));
    const std::uint32_t bad[1] = {999};
    EXPECT_THROW((void)chi_excluding(s, bad, 2), DomainError);
    EXPECT_THROW((void)chi_excluding(s, s.size(), 2), DomainError);
}

TEST(Subset, Examples)
{
    const auto s = build_spectrum({0.5}, 1e-14);
    EXPECT_EQ(chi_subset(s, SubsetRange::first, 3, 0).chi(0), 1.0);
    const auto t = chi_subset(s, SubsetRange::first, 3, 5);
    EXPECT_TRUE(t.is_zero(4));
    EXPECT_TRUE(t.is_zero(5));
    EXPECT_NEAR(t.chi(2), ref::kChiF2t3z05, 1e-15);
    EXPECT_NEAR(t.chi(2), oracle::chi_bruteforce(s.truncated(3), 2, ChiKind::fermionic), 1e-15);
}

TEST(LeaveOneOut, MatchesRecompute)
{
    const auto s = build_spectrum({0.7, 0.4}, 1e-12);
    const auto loo = log_elementary_leave_one_out(s.log_lambdas(), 6);
    for (std::size_t j = 0; j < s.size(); j += 7) {
        const double direct = log_elementary(s.log_lambdas(), 6, j).back();
        EXPECT_NEAR(loo[j], direct, 1e-11 * std::abs(direct) + 1e-13);
    }
}

TEST(Properties, MethodAgreement)
{
    for (double z : {0.3, 0.6, 0.9}) {
        const auto s = spectrum_for_pairs(std::vector<double>{z}, 20);
        const auto dp = chi_fermi_dp(s, 20);
        const auto M = power_sums_of<Extended>(s, 20);
        const auto newton = chi_fermi_newton<Extended>(M, 20);
        for (std::size_t N = 1; N <= 20; ++N) {
            const double part = chi_fermi_partition<Extended>(M, N).as_double();
            EXPECT_LT(gen::rel_err(newton.chi(N), dp.chi(N)), 1e-8) << z << " " << N;
            EXPECT_LT(gen::rel_err(part, dp.chi(N)), 1e-8) << z << " " << N;
        }
    }
}

TEST(Properties, PauliBlocking)
{
    gen::Source src(21);
    for (int i = 0; i < 30; ++i) {
        const auto J = src.integer(1, 12);
        const auto s = build_spectrum({src.uniform(0.1, 0.9)}, 1e-12).truncated(J);
        const auto t = chi_fermi_dp(s, s.size() + 3);
        for (std::size_t n = 0; n <= s.size() + 3; ++n) {
            EXPECT_EQ(t.is_zero(n), n > s.size());
        }
    }
}

TEST(Properties, BoundContainment)
{
    gen::Source src(22);
    for (int i = 0; i < 40; ++i) {
        const double z = src.uniform(0.02, 0.98);
        const std::size_t N = src.integer(1, 150);
        const std::vector<double> zs{z};
        const auto s = spectrum_for_pairs(zs, N + 1);
        const double r = ratio(chi_fermi_dp(s, N + 1), N);
        const auto b = bounds(purity(zs), N);
        EXPECT_GE(r, std::max(0.0, b.lower) - 1e-12) << z << " " << N;
        EXPECT_LE(r, b.upper + 1e-12) << z << " " << N;
        // infinite geometric spectrum: ratio = (N+1)(1-z) z^N / (1 - z^(N+1))
        const double closed = (N + 1) * (1 - z) * std::pow(z, N) / (1 - std::pow(z, N + 1));
        EXPECT_LT(gen::rel_err(r, closed), 1e-8) << z << " " << N;
    }
}

TEST(Properties, ConvolutionIdentity)
{
    gen::Source src(23);
    for (int i = 0; i < 30; ++i) {
        const std::vector<double> zs = src.zs(src.integer(1, 2), 0.1, 0.8);
        const std::size_t N = src.integer(1, 12);
        const auto s = spectrum_for_pairs(zs, N);
        const std::size_t t = src.integer(1, s.size());
        const auto full = chi_fermi_dp(s, N);
        const auto first = chi_subset(s, SubsetRange::first, t, N);
        const auto rest = chi_subset(s, SubsetRange::complement, t, N);
        std::vector<double> terms;
        for (std::size_t n = 0; n <= N; ++n) {
            if (!first.is_zero(n) && !rest.is_zero(N - n)) {
                terms.push_back(log_binomial(N, n) + first.log(n) + rest.log(N - n));
            }
        }
        EXPECT_NEAR(log_sum_exp(terms), full.log(N), 1e-10);
    }
}

TEST(Properties, BosonicEnhancement)
{
    gen::Source src(24);
    for (int i = 0; i < 30; ++i) {
        const double z = src.uniform(0.01, 0.95);
        const auto s = spectrum_for_pairs(std::vector<double>{z}, 21);
        const auto b = chi_bose(s, 21);
        for (std::size_t N = 1; N <= 20; ++N) {
            EXPECT_GE(std::exp(b.log(N + 1) - b.log(N)), 1.0) << z << " " << N;
        }
        // renormalized so the truncated spectrum is itself a probability distribution
        std::vector<double> lam(s.lambdas().begin(), s.lambdas().begin() + 10);
        double total = 0.0;
        for (double l : lam) {
            total += l;
        }
        for (double& l : lam) {
            l /= total;
        }
        const auto small = OccupationSpectrum::from_occupations(lam);
        const auto bs = chi_bose(small, 6);
        for (std::size_t N = 1; N <= 5; ++N) {
            EXPECT_LT(gen::rel_err(bs.chi(N), oracle::chi_bruteforce(small, N, ChiKind::bosonic)), 1e-10);
            EXPECT_GE(oracle::chi_bruteforce(small, N + 1, ChiKind::bosonic) /
                          oracle::chi_bruteforce(small, N, ChiKind::bosonic),
                      1.0);
        }
    }
}
