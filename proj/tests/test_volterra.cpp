#include <spikevol/volterra.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace spikevol;
using namespace spikevol::volterra;

namespace {

LimitParams base()
{
    LimitParams p;
    p.alpha = 0.75;
    p.a = 0.5;
    p.b = 1.0;
    p.v0 = 1.0;
    return p;
}

double sup_diff(const GridFunction& a, const GridFunction& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

} // namespace

TEST(Convolve, PowerKernelAgainstConstantIsExact)
{
    const specfun::AlphaGamma ag(0.75, 1.0);
    const UniformGrid g(2.0, 64);
    const auto out = convolve(make_kernel_k(ag), GridFunction(g, std::vector<double>(g.size(), 1.0)));
    for (long long i = 0; i <= g.N; ++i)
        EXPECT_NEAR(out.values[static_cast<std::size_t>(i)], std::pow(g.t(i), 0.75) / std::tgamma(1.75), 1e-13);
}

TEST(Convolve, ResolventIdentities)
{
    const specfun::AlphaGamma ag(0.75, 1.0);
    const auto r = identity_residuals(ag, UniformGrid(2.0, 4096));
    const double skip = 2.0 * r.grid.h();
    EXPECT_LE(IdentityResiduals::sup_beyond(r.first_kind, r.grid, skip), 5e-3);
    EXPECT_LE(IdentityResiduals::sup_beyond(r.second_kind, r.grid, skip), 5e-3);
}

TEST(Convolve, IdentityResidualsShrinkUnderRefinement)
{
    const specfun::AlphaGamma ag(0.75, 1.0);
    const auto a = identity_residuals(ag, UniformGrid(2.0, 512));
    const auto b = identity_residuals(ag, UniformGrid(2.0, 1024));
    const double skip = 4.0 / 512.0;
    EXPECT_LT(IdentityResiduals::sup_beyond(b.first_kind, b.grid, skip),
              IdentityResiduals::sup_beyond(a.first_kind, a.grid, skip));
}

TEST(Convolve, LinearInTheKernelScale)
{
    const UniformGrid g(3.0, 48);
    std::vector<double> v(g.size());
    for (long long i = 0; i <= g.N; ++i) v[static_cast<std::size_t>(i)] = std::sin(g.t(i)) + 2.0;
    const GridFunction f(g, v);
    const auto a = convolve(HawkesPhiKernel(0.7), f);
    const auto b = convolve(HawkesPhiKernel(0.7, 3.0), f);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(b.values[i], 3.0 * a.values[i], 1e-13);
}

TEST(Resolvent, ZeroBranchingGivesZero)
{
    const auto r = solve_resolvent(0.0, HawkesPhiKernel(0.75), UniformGrid(5.0, 100));
    for (double x : r.R.values) EXPECT_EQ(x, 0.0);
}

TEST(Resolvent, ExponentialKernelClosedForm)
{
    const UniformGrid g(4.0, 4096);
    const auto r = solve_resolvent(0.5, ExpKernel(1.0), g);
    for (long long i = 0; i <= g.N; ++i)
        EXPECT_NEAR(r.R.values[static_cast<std::size_t>(i)], 0.5 * std::exp(-0.5 * g.t(i)), 1e-6);
}

TEST(Resolvent, ModelKernelSelfConsistency)
{
    const auto c = characteristics_from_limit(base(), 10);
    const auto r = solve_prelimit_resolvent(c, prelimit_grid(10, 1.0, 64));
    EXPECT_LE(r.residual, 1e-6);
    EXPECT_THROW(solve_resolvent(1.0, HawkesPhiKernel(0.75), UniformGrid(1.0, 8)), SupercriticalError);
}

TEST(Resolvent, NonnegativeProperty)
{
    for (double beta : {0.1, 0.5, 0.9, 0.99}) {
        const auto r = solve_resolvent(beta, HawkesPhiKernel(0.6), UniformGrid(20.0, 400));
        for (double x : r.R.values) EXPECT_GE(x, 0.0);
    }
}

TEST(Prelimit, GridCapNamesTheOffendingN)
{
    try {
        prelimit_grid(100000, 1.0, 64);
        FAIL();
    } catch (const GridCapExceeded& e) {
        EXPECT_EQ(e.offending_n, 100000);
    }
}

TEST(Rescaled, UnitNIsIdentity)
{
    const UniformGrid g(2.0, 128);
    const auto r = solve_resolvent(0.4, HawkesPhiKernel(0.75), g);
    const auto s = rescaled_resolvent(r.R, 1, 0.75, g);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(s.R.values[i], r.R.values[i]);
}

TEST(Rescaled, IntegralBoundedByPowerOfT)
{
    const auto p = base();
    const UniformGrid out(1.0, 64);
    std::vector<double> cs;
    for (long long n : {10, 100}) {
        const auto R = solve_prelimit_resolvent(characteristics_from_limit(p, n), prelimit_grid(n, 1.0, 64));
        const auto s = rescaled_resolvent(R.R, n, p.alpha, out);
        double c = 0.0;
        for (long long i = 1; i <= out.N; ++i)
            c = std::max(c, s.integral.values[static_cast<std::size_t>(i)] / std::pow(out.t(i), p.alpha));
        cs.push_back(c);
    }
    EXPECT_LE(std::max(cs[0], cs[1]) / std::min(cs[0], cs[1]), 2.0);
}

TEST(Rescaled, ApproachesDensityOverB)
{
    const auto p = base();
    const UniformGrid out(1.0, 20);
    const specfun::AlphaGamma ag = p.alpha_gamma();
    double prev = 1e300;
    for (long long n : {30, 100, 300}) {
        const auto R = solve_prelimit_resolvent(characteristics_from_limit(p, n), prelimit_grid(n, 1.0, 64));
        const auto s = rescaled_resolvent(R.R, n, p.alpha, out);
        double d = 0.0;
        for (long long i = 1; i <= out.N; ++i)
            if (out.t(i) >= 0.05)
                d = std::max(d, std::abs(s.R.values[static_cast<std::size_t>(i)] - specfun::ml_density(ag, out.t(i)) / p.b));
        EXPECT_LT(d, prev) << n;
        prev = d;
    }
}

TEST(TwoParam, IndicatorAndMonotonicity)
{
    const UniformGrid g(3.0, 300);
    const auto r = solve_resolvent(0.6, HawkesPhiKernel(0.75), g);
    const auto tp = two_param(r.R);
    for (double y : {0.01, 0.5, 2.0}) EXPECT_DOUBLE_EQ(tp(0.0, y), 1.0);
    for (double t : {0.3, 1.0, 2.5}) {
        EXPECT_NEAR(tp(t, t + 0.1), 1.0 + tp.integral_of_r(t), 1e-14);
        double prev = -1.0;
        for (double y = 0.0; y < 4.0; y += 0.05) {
            const double v = tp(t, y);
            EXPECT_GE(v, prev - 1e-14);
            prev = v;
        }
    }
}

TEST(PrelimitMean, VanishingInputsGiveZero)
{
    PrelimitCharacteristics c;
    c.n = 4;
    c.zeta_m = 0.5;
    c.lambda_m = 1.0;
    const UniformGrid out(1.0, 16);
    const auto R = solve_prelimit_resolvent(c, prelimit_grid(4, 1.0, 16));
    for (double x : prelimit_mean(c, R.R, out).values) EXPECT_EQ(x, 0.0);
}

TEST(PrelimitMean, ZeroBranchingIsBaseline)
{
    PrelimitCharacteristics c;
    c.n = 5;
    c.mu_n = 0.3;
    c.v0n = 2.0;
    const UniformGrid out(1.0, 16);
    const auto R = solve_prelimit_resolvent(c, prelimit_grid(5, 1.0, 16));
    const auto I = prelimit_mean(c, R.R, out);
    for (long long i = 0; i <= out.N; ++i)
        EXPECT_NEAR(I.values[static_cast<std::size_t>(i)], c.baseline(5.0 * out.t(i)) / c.amplitude_scale(), 1e-14);
}

TEST(PrelimitMean, ConvergesToLimitMean)
{
    const auto p = base();
    const UniformGrid out(1.0, 64);
    const auto m = limit_mean(p, out);
    double prev = 1e300;
    for (long long n : {10, 30, 100}) {
        const auto c = characteristics_from_limit(p, n);
        const auto R = solve_prelimit_resolvent(c, prelimit_grid(n, 1.0, 64));
        const double d = sup_diff(prelimit_mean(c, R.R, out), m);
        EXPECT_LT(d, prev);
        prev = d;
    }
}

TEST(LimitMean, EndpointsAndFixedPoint)
{
    auto p = base();
    const auto m = limit_mean(p, UniformGrid(1e6, 4));
    EXPECT_DOUBLE_EQ(m.values[0], p.v0);
    EXPECT_NEAR(m.values.back(), p.mean_level(), 2e-3);
    p.a = p.b * p.v0;
    for (double x : limit_mean(p, UniformGrid(5.0, 50)).values) EXPECT_NEAR(x, p.v0, 1e-14);
}

TEST(LimitMean, MatchesVolterraSolve)
{
    const auto p = base();
    const UniformGrid g(2.0, 1024);
    EXPECT_LE(sup_diff(limit_mean(p, g), limit_mean_volterra(p, g)), 2e-3);
}

TEST(GrowthBounds, StableAcrossLadder)
{
    const auto p = base();
    std::vector<GrowthMember> fam;
    for (long long n : {10, 100}) {
        const auto c = characteristics_from_limit(p, n);
        fam.push_back({n, solve_prelimit_resolvent(c, prelimit_grid(n, 1.0, 64)).R});
    }
    const auto rep = verify_growth_bounds(fam, p.alpha, 2.0, UniformGrid(1.0, 64));
    EXPECT_TRUE(rep.finite);
    EXPECT_TRUE(rep.stable);
    EXPECT_THROW(verify_growth_bounds(fam, p.alpha, 1.5, UniformGrid(1.0, 64)), DomainError);
}
