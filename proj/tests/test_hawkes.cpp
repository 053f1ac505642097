#include <spikevol/hawkes.hpp>
#include <spikevol/params.hpp>
#include <spikevol/rng.hpp>
#include <spikevol/volterra.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace spikevol;
using namespace spikevol::hawkes;

namespace {

LimitParams mixed()
{
    LimitParams p;
    p.zeta_m_star = 1.0;
    p.lambda_m_star = 0.7;
    p.zeta_l_star = 1.0;
    p.lambda_l_star = 0.3;
    return p;
}

struct Moments {
    double mean = 0.0, se = 0.0;
};

template <class F>
Moments sample(int paths, F&& f)
{
    double s1 = 0.0, s2 = 0.0;
    for (int k = 0; k < paths; ++k) {
        const double x = f(k);
        s1 += x;
        s2 += x * x;
    }
    const double m = s1 / paths;
    return {m, std::sqrt((s2 / paths - m * m) / (paths - 1))};
}

} // namespace

TEST(Stream, UniformMomentsAndIndependence)
{
    rng::Stream a(5, 0, rng::generic), b(5, 1, rng::generic), c(5, 0, rng::generic, 1);
    double s = 0.0, s2 = 0.0, cross = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = a.uniform(), v = b.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        s += u;
        s2 += u * u;
        cross += (u - 0.5) * (v - 0.5);
    }
    EXPECT_NEAR(s / n, 0.5, 4e-3);
    EXPECT_NEAR(s2 / n - 0.25, 1.0 / 12.0, 2e-3);
    EXPECT_NEAR(cross / n, 0.0, 2e-3);
    rng::Stream a2(5, 0, rng::generic);
    EXPECT_EQ(a2.next_u64(), rng::Stream(5, 0, rng::generic).next_u64());
    EXPECT_NE(c.next_u64(), rng::Stream(5, 0, rng::generic).next_u64());
}

TEST(Stream, NormalAndPoissonMoments)
{
    rng::Stream r(11, 3, rng::generic);
    double s = 0.0, s2 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 0.02);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
    for (double mean : {0.3, 5.0, 12.0, 40.0, 700.0}) {
        double k1 = 0.0, k2 = 0.0;
        for (int i = 0; i < 20000; ++i) {
            const auto k = static_cast<double>(r.poisson(mean));
            k1 += k;
            k2 += k * k;
        }
        const double m = k1 / 20000.0, v = k2 / 20000.0 - m * m;
        EXPECT_NEAR(m, mean, 4.0 * std::sqrt(mean / 20000.0)) << mean;
        EXPECT_NEAR(v / mean, 1.0, 4.0 * std::sqrt(2.0 / 20000.0)) << mean;
    }
}

TEST(Stream, PoissonProbabilitiesAboveTheSmallMeanBranch)
{
    rng::Stream r(13, 0, rng::generic);
    const double mean = 25.0;
    const int n = 200000;
    std::vector<int> hist(80, 0);
    for (int i = 0; i < n; ++i) {
        const auto k = r.poisson(mean);
        if (k < 80) ++hist[static_cast<std::size_t>(k)];
    }
    double chi2 = 0.0;
    for (int k = 10; k <= 42; ++k) {
        const double pk = std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0)) * n;
        chi2 += (hist[static_cast<std::size_t>(k)] - pk) * (hist[static_cast<std::size_t>(k)] - pk) / pk;
    }
    // 33 cells; the 0.999 quantile of chi^2(33) is about 63.9
    EXPECT_LT(chi2, 63.9);
    EXPECT_NEAR(rng::log_factorial(12.0), std::lgamma(13.0), 1e-12);
    EXPECT_NEAR(rng::log_factorial(5.0), std::log(120.0), 1e-14);
}

TEST(Characteristics, ConvergeToLimitVector)
{
    const auto p = mixed();
    const auto c = characteristics_from_limit(p, 1000000);
    const double n = 1e6;
    EXPECT_NEAR(c.lambda_m, p.lambda_m_star, 1e-12);
    EXPECT_NEAR(c.zeta_m, p.zeta_m_star, 1e-3);
    EXPECT_NEAR(c.zeta_l / std::pow(n, p.alpha - 1.0), p.zeta_l_star, 1e-12);
    EXPECT_NEAR(c.lambda_l / std::pow(n, 1.0 - p.alpha), p.lambda_l_star, 1e-12);
    for (long long k : {1, 10, 100, 10000}) EXPECT_LT(characteristics_from_limit(LimitParams{}, k).beta_n(), 1.0);
    const auto pm = characteristics_from_limit(LimitParams{}, 20);
    EXPECT_EQ(pm.zeta_l, 0.0);
    EXPECT_NEAR(pm.beta_n(), pm.zeta_m * pm.lambda_m, 1e-15);
}

TEST(Simulate, NoBaselineMeansNoEvents)
{
    PrelimitCharacteristics c;
    c.zeta_m = 0.5;
    c.lambda_m = 1.0;
    const auto run = simulate_hawkes(c, 50.0, 1);
    EXPECT_TRUE(run.log.market.empty());
    EXPECT_TRUE(run.log.limit.empty());
}

TEST(Simulate, PoissonCountsWithoutExcitation)
{
    PrelimitCharacteristics c;
    c.alpha = 0.75;
    c.mu_n = 0.4;
    c.v0n = 2.0;
    c.lambda_m = 0.7;
    c.lambda_l = 1.2;
    const double T = 5.0;
    const double expected =
        (c.lambda_m + c.alpha * c.lambda_l) * (c.mu_n * T + c.v0n * (std::pow(1.0 + T, 1.0 - c.alpha) - 1.0) / (1.0 - c.alpha));
    const auto m = sample(10000, [&](int k) {
        const auto r = simulate_hawkes(c, T, 3, static_cast<std::uint64_t>(k));
        return static_cast<double>(r.log.market.size() + r.log.limit.size());
    });
    EXPECT_NEAR(m.mean, expected, 3.0 * m.se);
}

TEST(Simulate, ClusterRepresentationAgrees)
{
    const auto c = characteristics_from_limit(mixed(), 5);
    const double T = 5.0;
    const auto thin = sample(3000, [&](int k) {
        return static_cast<double>(simulate_hawkes(c, T, 8, static_cast<std::uint64_t>(k)).log.market.size());
    });
    const auto clus = sample(3000, [&](int k) {
        return static_cast<double>(simulate_cluster(c, T, 8, static_cast<std::uint64_t>(k)).market.size());
    });
    EXPECT_NEAR(thin.mean, clus.mean, 3.5 * std::hypot(thin.se, clus.se));
}

TEST(Intensity, BaselineJumpsAndExpiries)
{
    const auto c = characteristics_from_limit(mixed(), 10);
    const auto run = simulate_hawkes(c, 10.0, 4);
    ASSERT_FALSE(run.log.market.empty());
    ASSERT_FALSE(run.log.limit.empty());
    const double first = std::min(run.log.market.front().time, run.log.limit.front().time);
    EXPECT_NEAR(intensity_at(run.log, c, 0.5 * first), c.baseline(0.5 * first), 1e-12);
    bool saw_expiry = false;
    for (const auto& e : run.path.events) {
        if (e.kind == StateChange::market) {
            EXPECT_NEAR(e.right - e.left, c.zeta_m * c.alpha, 1e-10);
        }
        if (e.kind == StateChange::limit) {
            EXPECT_NEAR(e.right - e.left, c.zeta_l, 1e-10);
        }
        if (e.kind == StateChange::expiry) {
            saw_expiry = true;
            EXPECT_NEAR(e.left - e.right, c.zeta_l * std::round((e.left - e.right) / c.zeta_l), 1e-10);
            EXPECT_GE(e.left - e.right, c.zeta_l - 1e-10);
        }
    }
    EXPECT_TRUE(saw_expiry);
}

TEST(Intensity, NonnegativeAlongPath)
{
    const auto c = characteristics_from_limit(mixed(), 10);
    SimOptions o;
    o.sample_grid = UniformGrid(10.0, 1000);
    const auto run = simulate_hawkes(c, 10.0, 6, 0, o);
    for (double v : run.path.values) EXPECT_GE(v, 0.0);
}

TEST(Rescale, UnitNIdentityAndInitialValue)
{
    const auto p = mixed();
    const auto c1 = characteristics_from_limit(LimitParams{}, 1);
    SimOptions o;
    o.sample_grid = UniformGrid(2.0, 40);
    const auto run = simulate_hawkes(c1, 2.0, 2, 0, o);
    const auto rp = rescale_path(run.path, 1, p.alpha, UniformGrid(2.0, 40));
    for (std::size_t i = 0; i < rp.values.size(); ++i) EXPECT_DOUBLE_EQ(rp.values[i], run.path.values[i]);
    for (long long n : {4, 50}) {
        const auto c = characteristics_from_limit(p, n);
        const auto r = simulate_hawkes(c, static_cast<double>(n), 2);
        const auto path = rescale_path(r.log, c, UniformGrid(1.0, 10));
        EXPECT_NEAR(path.values[0], p.v0 + p.a * std::pow(static_cast<double>(n), -p.alpha), 1e-12);
    }
}

TEST(Rescale, EnsembleMeanMatchesPrelimitMean)
{
    const auto p = mixed();
    const long long n = 8;
    const auto c = characteristics_from_limit(p, n);
    const UniformGrid out(1.0, 8);
    const auto R = volterra::solve_prelimit_resolvent(c, volterra::prelimit_grid(n, 1.0, 64));
    const auto I = volterra::prelimit_mean(c, R.R, out);
    const auto st = rescaled_ensemble(c, out, 4000, 12);
    for (long long i = 1; i <= out.N; ++i) {
        const auto k = static_cast<std::size_t>(i);
        EXPECT_NEAR(st.mean[k], I.values[k], 3.5 * st.stderr_[k]) << i;
    }
}

TEST(Rescale, EnsembleIndependentOfWorkers)
{
    const auto c = characteristics_from_limit(mixed(), 4);
    const UniformGrid out(1.0, 4);
    const auto a = rescaled_ensemble(c, out, 150, 9, 1);
    const auto b = rescaled_ensemble(c, out, 150, 9, 3);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.second_moment, b.second_moment);
}

TEST(Simulate, SameSeedSameLog)
{
    const auto c = characteristics_from_limit(mixed(), 6);
    EXPECT_EQ(simulate_hawkes(c, 6.0, 77, 3).log, simulate_hawkes(c, 6.0, 77, 3).log);
    EXPECT_FALSE(simulate_hawkes(c, 6.0, 77, 3).log == simulate_hawkes(c, 6.0, 78, 3).log);
}

TEST(Simulate, ExplosionGuardKeepsPartialLog)
{
    const auto c = characteristics_from_limit(mixed(), 20);
    SimOptions o;
    o.max_events = 5;
    try {
        simulate_hawkes(c, 20.0, 1, 0, o);
        FAIL();
    } catch (const ExplosionGuard& e) {
        EXPECT_EQ(e.partial.market.size() + e.partial.limit.size(), 5u);
    }
}

TEST(Price, ConstantWithoutMarketEvents)
{
    EventLog log;
    log.horizon = 1.0;
    const auto pp = simulate_price(log, MarkLaw{}, 1, 0, 3.0);
    EXPECT_DOUBLE_EQ(pp.at(0.5), 3.0);
    EXPECT_DOUBLE_EQ(pp.at(1.0), 3.0);
}

TEST(Price, SymmetricMarksAndWaldIdentity)
{
    const auto c = characteristics_from_limit(LimitParams{}, 4);
    for (auto kind : {MarkLaw::Kind::two_point, MarkLaw::Kind::gaussian}) {
        MarkLaw law{kind, 0.5};
        double s1 = 0.0, s2 = 0.0, s4 = 0.0, count = 0.0;
        const int paths = 4000;
        for (int k = 0; k < paths; ++k) {
            auto run = simulate_hawkes(c, 4.0, 21, static_cast<std::uint64_t>(k));
            const auto pp = simulate_price(run.log, law, 21, static_cast<std::uint64_t>(k));
            const double d = pp.at(4.0) - pp.p0;
            s1 += d;
            s2 += d * d;
            s4 += d * d * d * d;
            count += static_cast<double>(run.log.market.size());
        }
        const double m = s1 / paths, v = s2 / paths;
        EXPECT_NEAR(m, 0.0, 3.0 * std::sqrt(v / paths));
        const double se_v = std::sqrt((s4 / paths - v * v) / paths);
        EXPECT_NEAR(v, count / paths * law.second_moment(), 3.0 * se_v + 3.0 * law.second_moment() * std::sqrt(count) / paths);
    }
}
