#include <spikevol/sve.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace spikevol;
using namespace spikevol::sve;

namespace {

LimitParams spike_on()
{
    LimitParams p;
    p.zeta_m_star = 1.0;
    p.lambda_m_star = 0.98;
    p.zeta_l_star = 2.0;
    p.lambda_l_star = 0.01;
    return p;
}

LimitParams noise_off()
{
    LimitParams p;
    p.test_mode = true;
    p.zeta_m_star = 0.0;
    p.lambda_m_star = 0.0;
    return p;
}

} // namespace

TEST(JumpAmplitude, WindowProperties)
{
    const auto p = spike_on();
    const auto ag = p.alpha_gamma();
    EXPECT_EQ(jump_amplitude(1.0, 1.0, 0.3, p), 0.0);
    double prev = 0.0;
    for (double y = 0.01; y < 3.0; y *= 1.4) {
        const double a = jump_amplitude(1.5, 0.5, y, p);
        EXPECT_GE(a, prev);
        EXPECT_LE(a, p.c3() * specfun::ml_cdf(ag, 1.0) + 1e-15);
        prev = a;
    }
    EXPECT_DOUBLE_EQ(jump_amplitude(1.5, 0.5, 2.0, p), p.c3() * specfun::ml_cdf(ag, 1.0));
    EXPECT_THROW(jump_amplitude(1.0, 1.5, 0.3, p), DomainError);
    EXPECT_THROW(jump_amplitude(1.0, 0.5, 0.0, p), DomainError);
}

TEST(Scheme, NoiseOffFollowsMean)
{
    const auto p = noise_off();
    const UniformGrid g(2.0, 256);
    const auto tb = prepare(p, g);
    const auto a = simulate_eq1(*tb, 1);
    const auto m = volterra::limit_mean(p, g);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(a.raw[i], m.values[i]);
    const auto b = simulate_eq2(*tb, 1);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(b.raw[i], m.values[i], 1e-2) << i;
    EXPECT_EQ(a.jump_count, 0);
    EXPECT_EQ(a.clip_count, 0);
}

TEST(Scheme, StartingAtTheLevelStaysThere)
{
    auto p = noise_off();
    p.v0 = p.a / p.b;
    const UniformGrid g(3.0, 128);
    const auto tb = prepare(p, g);
    for (double x : simulate_eq2(*tb, 4).raw) EXPECT_NEAR(x, p.v0, 1e-14);
    for (double x : simulate_eq1(*tb, 4).raw) EXPECT_NEAR(x, p.v0, 1e-12);
}

TEST(Scheme, ClippedValuesAreNonnegative)
{
    auto p = spike_on();
    p.v0 = 0.05;
    p.a = 0.05;
    const UniformGrid g(1.0, 256);
    const auto tb = prepare(p, g);
    long long clips = 0;
    for (std::uint64_t k = 0; k < 20; ++k) {
        const auto path = simulate_eq1(*tb, 3, k);
        for (std::size_t i = 0; i < g.size(); ++i) {
            EXPECT_GE(path.values[i], 0.0);
            EXPECT_DOUBLE_EQ(path.values[i], std::max(0.0, path.raw[i]));
        }
        clips += path.clip_count;
    }
    EXPECT_GT(clips, 0);
}

TEST(Scheme, RecordedJumpsMatchCountAndLaw)
{
    SchemeConfig sc;
    sc.record_jumps = true;
    sc.y_min = 1e-3;
    const UniformGrid g(1.0, 128);
    const auto tb = prepare(spike_on(), g, sc);
    long long total = 0;
    for (std::uint64_t k = 0; k < 50; ++k) {
        const auto path = simulate_eq1(*tb, 8, k);
        EXPECT_EQ(static_cast<long long>(path.jumps.size()), path.jump_count);
        for (const auto& j : path.jumps) {
            EXPECT_GE(j.y, sc.y_min);
            EXPECT_GE(j.s, 0.0);
            EXPECT_LT(j.s, 1.0);
        }
        total += path.jump_count;
        EXPECT_GE(path.dropped_variance, 0.0);
    }
    EXPECT_GT(total, 0);
}

TEST(Scheme, SameSeedSameNoiseBothForms)
{
    const UniformGrid g(1.0, 64);
    const auto tb = prepare(spike_on(), g);
    const auto a = simulate_eq1(*tb, 5, 2);
    EXPECT_EQ(a.raw, simulate_eq1(*tb, 5, 2).raw);
    EXPECT_NE(a.raw, simulate_eq1(*tb, 6, 2).raw);
    // spike counts follow each form's own V, the spikes themselves are shared
    const auto b = simulate_eq2(*tb, 5, 2);
    EXPECT_NEAR(static_cast<double>(a.jump_count), static_cast<double>(b.jump_count), 0.02 * a.jump_count);
}

TEST(Ensemble, MeanMatchesLimitMean)
{
    for (const auto& p : {LimitParams{}, spike_on()}) {
        const UniformGrid g(1.0, 64);
        const auto tb = prepare(p, g);
        const auto e = ensemble(*tb, Form::eq1, 4000, 17);
        for (std::size_t i = 4; i < g.size(); i += 12)
            EXPECT_NEAR(e.stats.mean[i], tb->mean[i], 3.5 * e.stats.stderr_[i]) << i;
    }
}

TEST(Ensemble, IndependentOfWorkerCount)
{
    const auto tb = prepare(spike_on(), UniformGrid(1.0, 32));
    const auto a = ensemble(*tb, Form::eq2, 130, 3, 1);
    const auto b = ensemble(*tb, Form::eq2, 130, 3, 3);
    EXPECT_EQ(a.stats.mean, b.stats.mean);
    EXPECT_EQ(a.stats.second_moment, b.stats.second_moment);
    EXPECT_EQ(a.mean_jumps, b.mean_jumps);
}

TEST(Laplace, TrivialFunctionalIsOne)
{
    const UniformGrid g(1.0, 32);
    const auto tb = prepare(spike_on(), g);
    const auto est = laplace_mc(*tb, 0.0, GridFunction(g, std::vector<double>(g.size(), 0.0)), 100, 1);
    EXPECT_DOUBLE_EQ(est.mean, 1.0);
    EXPECT_DOUBLE_EQ(est.stderr_, 0.0);
    const auto pos = laplace_mc(*tb, 1.0, GridFunction(g, std::vector<double>(g.size(), 0.5)), 100, 1);
    EXPECT_GT(pos.mean, 0.0);
    EXPECT_LT(pos.mean, 1.0);
}

TEST(Holder, ScaleInvariantAndSmoothPathsAboveAlpha)
{
    const auto p = noise_off();
    const UniformGrid g(1.0, 1024);
    auto path = simulate_eq1(*prepare(p, g), 1);
    std::vector<long long> lags{4, 8, 16, 32, 64};
    const auto a = holder_estimate(path, lags);
    EXPECT_GE(a.exponent, p.alpha);
    for (auto& v : path.values) v *= 3.0;
    EXPECT_NEAR(holder_estimate(path, lags).exponent, a.exponent, 1e-12);
    EXPECT_THROW(holder_estimate(path, {1, 2}), DomainError);
}

TEST(Holder, BrownianScaleForPureDiffusion)
{
    LimitParams p;
    p.a = 2.0;
    p.v0 = 2.0;
    const UniformGrid g(1.0, 2048);
    const auto tb = prepare(p, g);
    std::vector<SvePath> paths;
    for (std::uint64_t k = 0; k < 20; ++k) paths.push_back(simulate_eq1(*tb, 2, k));
    const auto est = holder_estimate(paths, {4, 8, 16, 32, 64, 128});
    EXPECT_GT(est.exponent, 0.1);
    EXPECT_LT(est.exponent, 0.6);
}

TEST(VarianceBudget, VanishesAtZeroAndScales)
{
    const auto p = spike_on();
    const double small = variance_budget(p, 1e-4).value();
    EXPECT_GT(small, 0.0);
    EXPECT_LT(small, variance_budget(p, 1e-2).value());
    for (double t : {0.1, 0.5}) {
        const double r = variance_budget(p, 2.0 * t).value() / variance_budget(p, t).value();
        EXPECT_GT(r, 1.0);
        EXPECT_LE(r, std::pow(2.0, p.alpha) * 1.15) << t;
    }
}

TEST(VarianceBudget, TruncationConvergesFromBelow)
{
    const auto p = spike_on();
    const double full = variance_budget(p, 1.0).value();
    std::vector<double> deficit;
    double prev = 0.0;
    for (double ym : {1e-1, 1e-3, 1e-5}) {
        const double v = variance_budget(p, 1.0, ym).value();
        EXPECT_GE(v, prev);
        EXPECT_LE(v, full * (1.0 + 1e-8));
        deficit.push_back(full - v);
        prev = v;
    }
    // the discarded small marks carry a share of order y_min^(1 - alpha)
    const double expected = std::pow(100.0, 1.0 - p.alpha);
    EXPECT_NEAR(deficit[1] / deficit[2], expected, 0.2 * expected);
}
