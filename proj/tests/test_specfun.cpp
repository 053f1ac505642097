#include <spikevol/specfun.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <cmath>

using namespace spikevol;
using namespace spikevol::specfun;

namespace {

struct MlPoint {
    double alpha, beta, x, value;
};

const MlPoint oracle[] = {
#include "ml_values.inc"
};

double integrate(auto f, double a, double b)
{
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-13);
}

} // namespace

TEST(Gamma, MatchesStdTgamma)
{
    for (double x = -4.7; x < 25.0; x += 0.31) EXPECT_NEAR(gamma_fn(x) / std::tgamma(x), 1.0, 1e-13) << x;
    EXPECT_DOUBLE_EQ(rgamma(0.0), 0.0);
    EXPECT_DOUBLE_EQ(rgamma(-3.0), 0.0);
    EXPECT_NEAR(log_gamma(50.5), std::lgamma(50.5), 1e-11);
}

TEST(EvalMl, ConstantTermAtZero) { EXPECT_NEAR(eval_ml(0.75, 0.75, 0.0), 1.0 / std::tgamma(0.75), 1e-15); }

TEST(EvalMl, ExponentialCase)
{
    EXPECT_NEAR(eval_ml(1.0, 1.0, 1.0), std::exp(1.0), 1e-14);
    EXPECT_NEAR(eval_ml(1.0, 1.0, -7.5), std::exp(-7.5), 1e-15);
}

TEST(EvalMl, ExtendedPrecisionOracle)
{
    for (const auto& p : oracle) {
        const double tol = 1e-10 * std::max(1.0, std::abs(p.value));
        EXPECT_NEAR(eval_ml(p.alpha, p.beta, p.x), p.value, tol) << p.alpha << " " << p.beta << " " << p.x;
    }
}

TEST(EvalMl, MinusFiveAtThreeQuarters)
{
    EXPECT_NEAR(eval_ml(0.75, 0.75, -5.0), 0.012140520971468211535, 1e-12);
}

TEST(EvalMl, ReportsMethodAndBound)
{
    const auto r = eval_ml_detailed(0.75, 1.0, -40.0);
    EXPECT_NE(r.method, MlMethod::series);
    EXPECT_LE(r.error_bound, 1e-10);
    EXPECT_THROW(eval_ml(0.0, 1.0, 1.0), DomainError);
    EXPECT_THROW(eval_ml(0.75, 1.0, std::nan("")), DomainError);
}

TEST(EvalMl, ContinuousAcrossMethodSwitches)
{
    EvalPolicy p;
    for (double x : {-p.series_cutoff, -p.asymptotic_cutoff}) {
        const double lo = eval_ml(0.75, 1.0, x * (1.0 + 1e-13));
        const double hi = eval_ml(0.75, 1.0, x * (1.0 - 1e-13));
        EXPECT_NEAR(lo, hi, 1e-11) << x;
    }
}

TEST(MlDensity, IntegratesToOne)
{
    const AlphaGamma ag(0.75, 1.0);
    const double ia = 1.0 / ag.alpha;
    auto sub = [&](double w) {
        if (w <= 0.0) return ag.gamma * ia * rgamma(ag.alpha);
        return ml_density(ag, std::pow(w, ia)) * ia * std::pow(w, ia - 1.0);
    };
    const double body = integrate(sub, 0.0, std::pow(50.0, ag.alpha));
    EXPECT_NEAR(body + (1.0 - ml_cdf(ag, 50.0)), 1.0, 1e-9);
    EXPECT_NEAR(ml_cdf(ag, 1e8), 1.0, 1e-5);
}

TEST(MlDensity, WeightedLimitAtOrigin)
{
    const AlphaGamma ag(0.75, 1.3);
    EXPECT_NEAR(ml_density_weighted(ag, 0.0), 1.3 / std::tgamma(0.75), 1e-14);
    EXPECT_NEAR(ml_density_weighted(ag, 1e-10), 1.3 / std::tgamma(0.75), 1e-6);
    EXPECT_THROW(ml_density(ag, 0.0), DomainError);
}

TEST(MlDensity, CompositionAtOne)
{
    const AlphaGamma ag(0.75, 1.0);
    // f(1) = E_{0.75,0.75}(-1) with gamma = 1
    double ref = 0.0;
    for (const auto& p : oracle)
        if (p.alpha == 0.75 && p.beta == 0.75 && p.x == -1.0) ref = p.value;
    if (ref == 0.0) ref = eval_ml(0.75, 0.75, -1.0);
    EXPECT_NEAR(ml_density(ag, 1.0), ref, 1e-12);
}

TEST(MlCdf, EndpointsAndQuadrature)
{
    const AlphaGamma ag(0.75, 1.0);
    EXPECT_EQ(ml_cdf(ag, 0.0), 0.0);
    const double ia = 1.0 / ag.alpha;
    auto sub = [&](double w) {
        if (w <= 0.0) return ag.gamma * ia * rgamma(ag.alpha);
        return ml_density(ag, std::pow(w, ia)) * ia * std::pow(w, ia - 1.0);
    };
    EXPECT_NEAR(ml_cdf(ag, 1.0), integrate(sub, 0.0, 1.0), 1e-8);
    for (double t = 1e-4; t <= 10.0; t *= 3.7) EXPECT_NEAR(ml_cdf(ag, t), integrate(sub, 0.0, std::pow(t, ag.alpha)), 1e-8);
}

TEST(MlCdf, NondecreasingProperty)
{
    const AlphaGamma ag(0.6, 2.0);
    double prev = 0.0;
    for (double t = 1e-6; t < 1e3; t *= 1.3) {
        const double F = ml_cdf(ag, t);
        EXPECT_GE(F, prev - 1e-15);
        EXPECT_LE(F, 1.0);
        prev = F;
    }
}

TEST(MlCdf, IntegralMatchesTrapezoid)
{
    const AlphaGamma ag(0.75, 1.0);
    const double I = integrate([&](double s) { return ml_cdf(ag, s); }, 0.0, 2.0);
    EXPECT_NEAR(ml_cdf_integral(ag, 2.0), I, 1e-9);
}

TEST(Kernels, ClosedForms)
{
    const AlphaGamma ag(0.75, 1.0);
    EXPECT_NEAR(kernel_k(ag, 1.0), 1.0 / std::tgamma(0.75), 1e-14);
    EXPECT_NEAR(resolvent_first_kind(ag, 1.0), 1.0 / std::tgamma(0.25), 1e-14);
    EXPECT_THROW(kernel_k(ag, 0.0), DomainError);
}

TEST(HawkesPhi, ValuesAndMass)
{
    EXPECT_DOUBLE_EQ(hawkes_phi(0.75, 0.0), 0.75);
    EXPECT_NEAR(hawkes_phi(0.75, 1.0), 0.75 * std::pow(2.0, -1.75), 1e-15);
    EXPECT_NEAR(hawkes_phi(0.75, 1.0), 0.22297, 1e-5);
    EXPECT_NEAR(hawkes_phi_integral(0.75, 1e12), 1.0, 1e-8);
    EXPECT_NEAR(hawkes_phi_integral(0.6, 3.0), integrate([](double s) { return hawkes_phi(0.6, s); }, 0.0, 3.0), 1e-12);
}

TEST(Lifetime, TailDensityAndInverse)
{
    EXPECT_DOUBLE_EQ(lifetime_tail(0.75, 0.0), 1.0);
    EXPECT_NEAR(integrate([](double y) { return lifetime_density(0.75, y); }, 0.0, 1e4) + lifetime_tail(0.75, 1e4), 1.0,
                1e-9);
    EXPECT_NEAR(sample_lifetime(0.75, 0.5), std::pow(2.0, 1.0 / 1.75) - 1.0, 1e-14);
    EXPECT_NEAR(sample_lifetime(0.75, 0.5), 0.4860, 1e-4);
    for (double u : {0.01, 0.3, 0.77, 0.999}) EXPECT_NEAR(lifetime_tail(0.75, sample_lifetime(0.75, u)), u, 1e-12);
}

TEST(LimitMark, PowerLawTail)
{
    EXPECT_NEAR(limit_mark_tail(0.75, 1.0), 0.75, 1e-15);
    EXPECT_GT(limit_mark_tail(0.75, 1e-12), 1e6);
    for (double x : {1e-3, 0.2, 5.0}) EXPECT_NEAR(limit_mark_tail(0.75, 2 * x) / limit_mark_tail(0.75, x), std::pow(2.0, -1.75), 1e-13);
    for (double u : {0.1, 0.5, 0.9}) {
        const double y = sample_limit_mark(0.75, 1e-3, u);
        EXPECT_GE(y, 1e-3);
        EXPECT_NEAR(limit_mark_tail(0.75, y) / limit_mark_tail(0.75, 1e-3), u, 1e-12);
    }
}

TEST(AlphaGamma, ValidationRanges)
{
    EXPECT_THROW(AlphaGamma(0.4, 1.0), DomainError);
    EXPECT_THROW(AlphaGamma(1.0, 1.0), DomainError);
    EXPECT_NO_THROW(AlphaGamma(1.0, 1.0, AlphaRange::evaluation_only));
    EXPECT_THROW(AlphaGamma(0.75, 0.0), DomainError);
    try {
        AlphaGamma(1.2, 1.0);
    } catch (const DomainError& e) {
        EXPECT_STREQ(e.what(), "alpha must lie in (1/2,1)");
    }
}
