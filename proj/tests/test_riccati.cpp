#include <spikevol/riccati.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace spikevol;
using namespace spikevol::riccati;

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

// lambda E V(T) + g int_0^T E V
double first_moment(const LimitParams& p, double lambda, double g, double T)
{
    const UniformGrid grid(T, 4096);
    const auto m = volterra::limit_mean(p, grid);
    double I = 0.0;
    for (std::size_t i = 0; i + 1 < m.values.size(); ++i) I += 0.5 * (m.values[i] + m.values[i + 1]) * grid.h();
    return lambda * m.values.back() + g * I;
}

} // namespace

TEST(Riccati, ZeroInputHasZeroSolution)
{
    const UniformGrid grid(1.0, 256);
    const auto in = RiccatiInput::constant(0.0, 0.0, 1.0);
    const auto sol = picard_solve(in, LimitParams{}, grid);
    for (double x : sol.u) EXPECT_EQ(x, 0.0);
    EXPECT_DOUBLE_EQ(laplace_functional(sol, in, LimitParams{}).value, 1.0);
}

TEST(Riccati, SolutionStaysInsideTheBracket)
{
    for (const auto& p : {LimitParams{}, spike_on()})
        for (double l : {0.0, 0.5, 2.0})
            for (double g : {0.0, 0.3}) {
                if (l == 0.0 && g == 0.0) continue;
                const auto in = RiccatiInput::constant(l, g, 1.0);
                const auto sol = picard_solve(in, p, UniformGrid(1.0, 512));
                for (std::size_t i = 0; i < sol.u.size(); ++i) {
                    EXPECT_GE(sol.u[i], 0.0);
                    EXPECT_LE(sol.u[i], sol.upper[i] + 1e-14);
                }
                EXPECT_LE(sol.residual, 1e-7) << l << " " << g;
            }
}

TEST(Riccati, WeightedValueAtOrigin)
{
    const auto p = LimitParams{};
    const double l = 0.8;
    const auto sol = picard_solve(RiccatiInput::constant(l, 0.2, 1.0), p, UniformGrid(1.0, 4096));
    ASSERT_TRUE(sol.weighted_space);
    const double limit = l * p.gamma() / std::tgamma(p.alpha);
    EXPECT_NEAR(sol.u[1], limit, 0.02 * limit);
}

TEST(Riccati, LinearRegimeForSmallInputs)
{
    for (const auto& p : {LimitParams{}, spike_on()}) {
        const double lin = first_moment(p, 1.0, 0.5, 1.0);
        for (double eps : {1e-2, 1e-3}) {
            const auto in = RiccatiInput::constant(eps, 0.5 * eps, 1.0);
            const auto lv = laplace_functional(picard_solve(in, p, UniformGrid(1.0, 1024)), in, p);
            EXPECT_NEAR(lv.exponent / eps, lin, 10.0 * eps + 2e-3 * lin) << eps;
        }
    }
}

TEST(Riccati, LaplaceDecreasesInLambdaAndG)
{
    const auto p = spike_on();
    const UniformGrid grid(1.0, 512);
    double prev = 1.0;
    for (double l : {0.1, 0.5, 1.0, 3.0}) {
        const auto in = RiccatiInput::constant(l, 0.1, 1.0);
        const double v = laplace_functional(picard_solve(in, p, grid), in, p).value;
        EXPECT_LT(v, prev);
        EXPECT_GT(v, 0.0);
        prev = v;
    }
    const auto lo = RiccatiInput::constant(0.5, 0.1, 1.0), hi = RiccatiInput::constant(0.5, 0.4, 1.0);
    EXPECT_GT(laplace_functional(picard_solve(lo, p, grid), lo, p).value,
              laplace_functional(picard_solve(hi, p, grid), hi, p).value);
}

TEST(Riccati, SampledInputMatchesConstant)
{
    const auto p = LimitParams{};
    const UniformGrid grid(1.0, 256);
    const auto a = RiccatiInput::constant(0.5, 0.3, 1.0);
    const auto b = RiccatiInput::sampled(0.5, GridFunction(grid, std::vector<double>(grid.size(), 0.3)));
    const auto va = laplace_functional(picard_solve(a, p, grid), a, p).value;
    const auto vb = laplace_functional(picard_solve(b, p, grid), b, p).value;
    EXPECT_NEAR(va, vb, 1e-12);
}

TEST(Riccati, StableAndDirectLkAgree)
{
    const auto p = spike_on();
    const auto in = RiccatiInput::constant(1.0, 0.2, 1.0);
    const auto sol = picard_solve(in, p, UniformGrid(1.0, 1024));
    EXPECT_NEAR(lk_psi_stable(sol, in, p).back(), lk_psi_direct(sol, p).back(), 1e-2);
}

TEST(Riccati, RefinedResidualShrinksWithTheGrid)
{
    const auto p = LimitParams{};
    const auto in = RiccatiInput::constant(1.0, 0.2, 1.0);
    const double a = refined_residual(picard_solve(in, p, UniformGrid(1.0, 256)), in, p);
    const double b = refined_residual(picard_solve(in, p, UniformGrid(1.0, 512)), in, p);
    EXPECT_GT(a / b, 1.4);
    EXPECT_LT(a / b, 2.6);
}

TEST(Riccati, IterationLimitRaises)
{
    SolverOptions opt;
    opt.max_iter = 1;
    opt.fallback_intervals = 1;
    EXPECT_THROW(picard_solve(RiccatiInput::constant(2.0, 0.5, 1.0), spike_on(), UniformGrid(1.0, 128), opt), ConvergenceError);
}

TEST(VOperator, ZeroAndNonnegative)
{
    const auto p = spike_on();
    const UniformGrid grid(1.0, 64);
    const GridFunction zero(grid, std::vector<double>(grid.size(), 0.0));
    for (double x : v_operator(zero, std::vector<double>(grid.size(), 0.0), p)) EXPECT_EQ(x, 0.0);
    std::vector<double> Psi(grid.size()), psi(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        psi[i] = 0.4 + 0.1 * std::sin(static_cast<double>(i));
        Psi[i] = p.c3() * 0.4 * grid.t(static_cast<long long>(i));
    }
    const auto v = v_operator(GridFunction(grid, Psi), psi, p);
    for (double x : v) EXPECT_GE(x, 0.0);
}

TEST(VOperator, QuadraticForSmallArguments)
{
    const auto p = spike_on();
    const UniformGrid grid(1.0, 64);
    auto at = [&](double s) {
        std::vector<double> Psi(grid.size()), psi(grid.size(), s);
        for (std::size_t i = 0; i < grid.size(); ++i) Psi[i] = p.c3() * s * grid.t(static_cast<long long>(i));
        return v_operator(GridFunction(grid, Psi), psi, p).back();
    };
    EXPECT_NEAR(at(5e-4) / at(1e-3), 0.25, 0.01);
}
