#pragma once

// Picard solver for the Volterra-Riccati equation
//   psi = lambda f + g*f - (c2^2/2) psi^2 * f - (V o psi) * f
// in the weighted coordinates u = t^{1-alpha} psi, and the Laplace
// functional it characterizes.

#include <spikevol/errors.hpp>
#include <spikevol/grid.hpp>
#include <spikevol/params.hpp>
#include <spikevol/specfun.hpp>
#include <spikevol/volterra.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace spikevol::riccati {

struct RiccatiInput {
    double lambda = 0.0;
    std::optional<double> g_constant = 0.0;
    std::optional<GridFunction> g_values; // used when g_constant is empty
    double T = 1.0;

    static RiccatiInput constant(double lambda, double g, double T) { return {lambda, g, std::nullopt, T}; }
    static RiccatiInput sampled(double lambda, GridFunction g)
    {
        const double T = g.grid.T;
        return {lambda, std::nullopt, std::move(g), T};
    }

    void validate() const
    {
        require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
        require(std::isfinite(T) && T > 0.0, "T must be > 0");
        if (g_constant) {
            require(std::isfinite(*g_constant) && *g_constant >= 0.0, "g must be >= 0 and bounded");
        } else {
            require(g_values.has_value(), "g is missing");
            require(!g_values->singular(), "g must be bounded");
            for (double x : g_values->values) require(std::isfinite(x) && x >= 0.0, "g must be >= 0 and bounded");
        }
    }
};

struct SolverOptions {
    double tol = 1e-8;
    int max_iter = 200;
    int fallback_intervals = 8;
};

struct RiccatiSolution {
    UniformGrid grid;
    double alpha = 0.75;
    bool weighted_space = true;      // false when lambda = 0 (bounded solution)
    std::vector<double> u;           // t^{1-alpha} psi (plain psi when !weighted_space)
    std::vector<double> Psi;         // int_0^t c3 psi
    std::vector<double> integral;    // int_0^t psi
    std::vector<double> upper;       // lambda f + g*f, same coordinates as u
    GridFunction phi;                // (c2^2/2) psi^2 + V o psi at the solution
    int iterations = 0;
    int stages = 1;                  // > 1 after the time-marching fallback
    double final_increment = 0.0;
    std::vector<double> increments;
    double residual = 0.0;
    double max_bracket_violation = 0.0;

    double psi(long long i) const
    {
        const auto k = static_cast<std::size_t>(i);
        if (!weighted_space) return u[k];
        if (i == 0) throw DomainError("psi is singular at t = 0; use the weighted value");
        return std::pow(grid.t(i), alpha - 1.0) * u[k];
    }

    GridFunction psi_function() const
    {
        std::vector<double> v(u.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = (weighted_space && i == 0) ? u[0] : psi(static_cast<long long>(i));
        return GridFunction(grid, std::move(v),
                            weighted_space ? std::optional<double>(alpha - 1.0) : std::nullopt);
    }
};

// Cells near 0 where singular factors are integrated exactly.
inline constexpr long long head_cells = 64;

namespace detail {

// e^{-z} - 1 + z
inline double G(double z)
{
    if (std::abs(z) < 1e-4) return z * z * (0.5 - z * (1.0 / 6.0 - z / 24.0));
    return std::expm1(-z) + z;
}

class Operator {
public:
    Operator(const LimitParams& p, const UniformGrid& g, const RiccatiInput& in)
        : p_(p), g_(g), ag_(p.alpha_gamma()), weighted_(in.lambda > 0.0)
    {
        const double alpha = p.alpha;
        const double h = g.h();
        const auto N = static_cast<std::size_t>(g.N);
        f_ = std::make_unique<volterra::MlDensityKernel>(ag_);
        rho_ = weighted_ ? 2.0 * alpha - 2.0 : 0.0;
        plan_ = volterra::make_plan(*f_, g, weighted_ ? std::optional<double>(rho_) : std::nullopt, head_cells);
        tw_.resize(N + 1);
        for (std::size_t i = 0; i <= N; ++i)
            tw_[i] = weighted_ ? std::pow(g.t(static_cast<long long>(i)), 1.0 - alpha) : 1.0;
        // lambda f + g*f
        upper_.assign(N + 1, 0.0);
        upper_[0] = weighted_ ? in.lambda * ag_.gamma * specfun::rgamma(alpha) : 0.0;
        std::vector<double> gf(N + 1, 0.0);
        if (in.g_constant) {
            for (std::size_t i = 1; i <= N; ++i)
                gf[i] = *in.g_constant * specfun::ml_cdf(ag_, g.t(static_cast<long long>(i)));
        } else {
            require_same_grid(g, in.g_values->grid, "riccati g");
            const auto plan0 = volterra::make_plan(*f_, g);
            gf = volterra::convolve(plan0, *in.g_values).values;
        }
        for (std::size_t i = 1; i <= N; ++i) {
            const double t = g.t(static_cast<long long>(i));
            upper_[i] = in.lambda * tw_[i] * specfun::ml_density(ag_, t) + tw_[i] * gf[i];
        }
        // y^{-alpha} cell moments for the body of V o psi
        const double e = 1.0 - alpha;
        const double scale = alpha * (1.0 + alpha);
        M0_.resize(N);
        M1_.resize(N);
        for (std::size_t m = 0; m < N; ++m) {
            const double a = static_cast<double>(m) * h, b = a + h;
            const double i0 = (std::pow(b, e) - std::pow(a, e)) / e;
            const double i1 = (std::pow(b, 1.0 + e) - std::pow(a, 1.0 + e)) / (1.0 + e);
            M0_[m] = scale * i0;
            M1_[m] = scale * (i1 - a * i0) / h;
        }
        J0_.resize(N);
        J1_.resize(N);
        for (std::size_t m = 0; m < N; ++m) {
            const double a = static_cast<double>(m) * h, b = a + h;
            const double j0 = (std::pow(b, alpha) - std::pow(a, alpha)) / alpha;
            const double j1 = (std::pow(b, alpha + 1.0) - std::pow(a, alpha + 1.0)) / (alpha + 1.0) - a * j0;
            J0_[m] = j0;
            J1_[m] = j1 / h;
        }
    }

    bool weighted() const { return weighted_; }
    const std::vector<double>& upper() const { return upper_; }
    const std::vector<double>& tw() const { return tw_; }

    // int_0^{t_i} psi for all i; psi = s^{alpha-1} times the linear interpolant of u.
    std::vector<double> cumulative(const std::vector<double>& u) const
    {
        const double h = g_.h();
        const auto N = static_cast<std::size_t>(g_.N);
        std::vector<double> I(N + 1, 0.0);
        for (std::size_t i = 1; i <= N; ++i) {
            const double cell = weighted_ ? J0_[i - 1] * u[i - 1] + J1_[i - 1] * (u[i] - u[i - 1])
                                          : 0.5 * h * (u[i - 1] + u[i]);
            I[i] = I[i - 1] + cell;
        }
        return I;
    }

    double psi(const std::vector<double>& u, std::size_t i) const { return weighted_ ? u[i] / tw_[i] : u[i]; }

    // V o psi at node i given the cumulative Psi = c3 int psi.
    double v_at(const std::vector<double>& Psi, double psi_i, std::size_t i) const
    {
        if (i == 0 || p_.c4() == 0.0 || p_.c3() == 0.0) return 0.0;
        const double alpha = p_.alpha;
        const double h = g_.h();
        const double x = g_.t(static_cast<long long>(i));
        const double c3 = p_.c3();
        double body = 0.0;
        // H(y) = G(z(y)) / y^2 is modeled linear on each y-cell
        double Hprev = 0.5 * c3 * c3 * psi_i * psi_i;
        for (std::size_t m = 1; m <= i; ++m) {
            const double y = static_cast<double>(m) * h;
            const double H = G(Psi[i] - Psi[i - m]) / (y * y);
            body += (M0_[m - 1] - M1_[m - 1]) * Hprev + M1_[m - 1] * H;
            Hprev = H;
        }
        const double tail = G(Psi[i]) * alpha * std::pow(x, -alpha - 1.0);
        return p_.c4() * (tail + body);
    }

    // phi_nl on nodes [0, last], in the plan's weighted coordinates.
    GridFunction phi(const std::vector<double>& u, const std::vector<double>& Psi, std::size_t last) const
    {
        const auto N = static_cast<std::size_t>(g_.N);
        std::vector<double> v(N + 1, 0.0);
        const double c2sq = p_.c2() * p_.c2();
        v[0] = weighted_ ? 0.5 * c2sq * u[0] * u[0] : 0.5 * c2sq * u[0] * u[0] + v_at(Psi, u[0], 0);
        for (std::size_t i = 1; i <= last; ++i) {
            const double ps = psi(u, i);
            v[i] = 0.5 * c2sq * ps * ps + v_at(Psi, ps, i);
        }
        return GridFunction(g_, std::move(v), weighted_ ? std::optional<double>(rho_) : std::nullopt);
    }

    // Picard map on nodes (first, last]; nodes <= first are kept.
    std::vector<double> apply(const std::vector<double>& u, std::size_t first, std::size_t last,
                              GridFunction* phi_out = nullptr) const
    {
        const auto I = cumulative(u);
        std::vector<double> Psi(I.size());
        for (std::size_t i = 0; i < I.size(); ++i) Psi[i] = p_.c3() * I[i];
        auto ph = phi(u, Psi, last);
        std::vector<double> out = u;
        out[0] = upper_[0];
        for (std::size_t i = std::max<std::size_t>(first + 1, 1); i <= last; ++i)
            out[i] = upper_[i] - tw_[i] * volterra::convolve_at_node(plan_, ph, static_cast<long long>(i));
        if (phi_out) *phi_out = std::move(ph);
        return out;
    }

private:
    LimitParams p_;
    UniformGrid g_;
    specfun::AlphaGamma ag_;
    bool weighted_;
    double rho_ = 0.0;
    std::unique_ptr<volterra::MlDensityKernel> f_;
    volterra::ConvolutionPlan plan_;
    std::vector<double> tw_, upper_, M0_, M1_, J0_, J1_;
};

inline double weighted_sup(const std::vector<double>& a, const std::vector<double>& b, std::size_t from,
                           std::size_t to)
{
    double m = 0.0;
    for (std::size_t i = from; i <= to && i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double project(std::vector<double>& u, const std::vector<double>& upper, std::size_t from, std::size_t to)
{
    double worst = 0.0;
    for (std::size_t i = from; i <= to; ++i) {
        if (u[i] < 0.0) {
            worst = std::max(worst, -u[i]);
            u[i] = 0.0;
        } else if (u[i] > upper[i]) {
            worst = std::max(worst, u[i] - upper[i]);
            u[i] = upper[i];
        }
    }
    return worst;
}

// Picard sweeps on the window (first, last]; returns true on convergence.
inline bool iterate(const Operator& op, std::vector<double>& u, std::size_t first, std::size_t last,
                    const SolverOptions& opt, RiccatiSolution& sol)
{
    for (int it = 0; it < opt.max_iter; ++it) {
        auto next = op.apply(u, first, last);
        sol.max_bracket_violation = std::max(sol.max_bracket_violation, project(next, op.upper(), 0, last));
        const double inc = weighted_sup(next, u, first, last);
        u = std::move(next);
        ++sol.iterations;
        sol.increments.push_back(inc);
        sol.final_increment = inc;
        if (inc <= opt.tol) return true;
        if (!std::isfinite(inc)) return false;
    }
    return false;
}

} // namespace detail

// Weighted sup over nodes i >= 2 of the defect of Eq. PSI at the stored solution.
inline double residual(const RiccatiSolution& sol, const RiccatiInput& in, const LimitParams& p)
{
    const detail::Operator op(p, sol.grid, in);
    const auto N = static_cast<std::size_t>(sol.grid.N);
    const auto next = op.apply(sol.u, 0, N);
    return detail::weighted_sup(next, sol.u, 2, N);
}

inline RiccatiSolution picard_solve(const RiccatiInput& in, const LimitParams& p, const UniformGrid& grid,
                                    const SolverOptions& opt = {})
{
    in.validate();
    p.validate();
    require(std::abs(grid.T - in.T) <= 1e-12 * in.T, "grid horizon must equal the input horizon T");
    require(opt.tol > 0.0 && opt.max_iter >= 1 && opt.fallback_intervals >= 1, "invalid solver options");
    const detail::Operator op(p, grid, in);
    const auto N = static_cast<std::size_t>(grid.N);

    RiccatiSolution sol;
    sol.grid = grid;
    sol.alpha = p.alpha;
    sol.weighted_space = op.weighted();
    sol.upper = op.upper();

    std::vector<double> u = op.upper();
    bool ok = detail::iterate(op, u, 0, N, opt, sol);
    if (!ok) {
        // local solutions on [0, k T / m], extended one window at a time
        sol.iterations = 0;
        sol.increments.clear();
        sol.stages = opt.fallback_intervals;
        u = op.upper();
        const auto m = static_cast<std::size_t>(opt.fallback_intervals);
        ok = true;
        for (std::size_t k = 1; k <= m && ok; ++k) {
            const std::size_t first = (k - 1) * N / m, last = k * N / m;
            ok = detail::iterate(op, u, first, last, opt, sol);
        }
        if (!ok)
            throw ConvergenceError("Riccati Picard iteration did not converge", sol.iterations, sol.final_increment);
    }
    sol.u = u;
    const auto I = op.cumulative(u);
    sol.integral = I;
    sol.Psi.resize(I.size());
    for (std::size_t i = 0; i < I.size(); ++i) sol.Psi[i] = p.c3() * I[i];
    op.apply(u, 0, N, &sol.phi);
    sol.residual = residual(sol, in, p);
    return sol;
}

// V o psi at the nodes for a given nondecreasing cumulative Psi (Psi(0) = 0)
// on the grid; psi_node holds the plain psi values used by the near-zero cell.
inline std::vector<double> v_operator(const GridFunction& Psi, const std::vector<double>& psi_node,
                                      const LimitParams& p)
{
    require(Psi.values.size() == psi_node.size(), "Psi and psi must share the grid");
    require(Psi.values.front() == 0.0, "Psi must vanish at 0");
    for (std::size_t i = 1; i < Psi.values.size(); ++i)
        require(Psi.values[i] >= Psi.values[i - 1], "Psi must be nondecreasing");
    RiccatiInput in = RiccatiInput::constant(0.0, 0.0, Psi.grid.T);
    const detail::Operator op(p, Psi.grid, in);
    std::vector<double> out(Psi.values.size(), 0.0);
    for (std::size_t i = 1; i < out.size(); ++i) out[i] = op.v_at(Psi.values, psi_node[i], i);
    return out;
}

// ------------------------------------------------------ Laplace functional --

struct LaplaceValue {
    double value = 1.0;
    double exponent = 0.0;
    double v0_part = 0.0;    // V0 (L_K * psi)(T)
    double drift_part = 0.0; // (a/b) int_0^T psi
    double lk_psi = 0.0;
};

// L_K * psi at the nodes by lambda (1-F) + (1-F)*(g - phi).
inline std::vector<double> lk_psi_stable(const RiccatiSolution& sol, const RiccatiInput& in, const LimitParams& p)
{
    const auto ag = p.alpha_gamma();
    const auto& g = sol.grid;
    const auto N = static_cast<std::size_t>(g.N);
    const volterra::MlSurvivalKernel S(ag);
    std::vector<double> out(N + 1, 0.0);
    const auto phi_conv = volterra::convolve(volterra::make_plan(S, g, sol.phi.singular_exponent, head_cells), sol.phi);
    std::vector<double> g_conv(N + 1, 0.0);
    if (in.g_constant) {
        for (std::size_t i = 0; i <= N; ++i) {
            const double t = g.t(static_cast<long long>(i));
            g_conv[i] = *in.g_constant * (t - specfun::ml_cdf_integral(ag, t));
        }
    } else {
        g_conv = volterra::convolve(volterra::make_plan(S, g), *in.g_values).values;
    }
    for (std::size_t i = 0; i <= N; ++i) {
        const double t = g.t(static_cast<long long>(i));
        out[i] = in.lambda * (1.0 - specfun::ml_cdf(ag, t)) + g_conv[i] - phi_conv.values[i];
    }
    return out;
}

// L_K * psi by direct product integration.
inline std::vector<double> lk_psi_direct(const RiccatiSolution& sol, const LimitParams& p)
{
    const auto LK = volterra::make_kernel_lk(p.alpha_gamma());
    const auto psi = sol.psi_function();
    auto c = volterra::convolve(volterra::make_plan(LK, sol.grid, psi.singular_exponent, head_cells), psi);
    return c.values;
}

inline LaplaceValue laplace_functional(const RiccatiSolution& sol, const RiccatiInput& in, const LimitParams& p)
{
    require(std::abs(sol.grid.T - in.T) <= 1e-12 * in.T, "solution horizon must equal T");
    LaplaceValue out;
    out.lk_psi = lk_psi_stable(sol, in, p).back();
    out.v0_part = p.v0 * out.lk_psi;
    out.drift_part = p.mean_level() * sol.integral.back();
    out.exponent = out.v0_part + out.drift_part;
    out.value = std::exp(-out.exponent);
    return out;
}

// Defect of the interpolated solution when the operator runs on the doubled grid,
// measured at the original nodes from i = 2 on.
inline double refined_residual(const RiccatiSolution& sol, const RiccatiInput& in, const LimitParams& p)
{
    const UniformGrid fine(sol.grid.T, 2 * sol.grid.N);
    RiccatiInput fin = in;
    if (!in.g_constant) {
        std::vector<double> gv(fine.size());
        for (long long i = 0; i <= fine.N; ++i) gv[static_cast<std::size_t>(i)] = (*in.g_values)(fine.t(i));
        fin.g_values = GridFunction(fine, std::move(gv));
    }
    const detail::Operator op(p, fine, fin);
    const auto Nf = static_cast<std::size_t>(fine.N);
    std::vector<double> u(Nf + 1);
    for (std::size_t i = 0; i <= Nf; ++i) {
        const std::size_t c = i / 2;
        u[i] = (i % 2 == 0) ? sol.u[c] : 0.5 * (sol.u[c] + sol.u[c + 1]);
    }
    const auto next = op.apply(u, 0, Nf);
    double m = 0.0;
    for (std::size_t i = 4; i <= Nf; i += 2) m = std::max(m, std::abs(next[i] - u[i]));
    return m;
}

} // namespace spikevol::riccati
