#pragma once

// Product-integration numerics for weakly singular Volterra convolutions:
// kernels with exact cell integrals, convolution, linear second-kind
// solves, the Hawkes resolvent and the derived prelimit/limit curves.

#include <spikevol/errors.hpp>
#include <spikevol/grid.hpp>
#include <spikevol/params.hpp>
#include <spikevol/specfun.hpp>

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace spikevol::volterra {

// Integrals of a kernel over the cells [m h, (m+1) h]:
//   m0[m] = int k(u) du,  m1[m] = int (u - m h)/h k(u) du.
// kv[m] = k(m h) for m >= 1 and a0 + a1 u models u^{-kappa} k(u) on the first cell.
struct CellMoments {
    UniformGrid grid;
    double kappa = 0.0;
    std::vector<double> m0, m1, kv;
    double a0 = 0.0, a1 = 0.0;
};

class Kernel {
public:
    virtual ~Kernel() = default;
    virtual double value(double u) const = 0; // u > 0
    virtual double exponent() const { return 0.0; }
    virtual double weighted(double u) const { return value(u); } // u^{-kappa} k(u), finite at 0
    virtual double integral(double a, double b) const = 0;
    virtual double origin_moment(double h) const = 0; // int_0^h u k(u) du
    virtual double shifted_moment(double a, double b) const
    {
        auto f = [&](double u) { return (u - a) * value(u); };
        return boost::math::quadrature::gauss<double, 10>::integrate(f, a, b);
    }

    virtual CellMoments cell_moments(const UniformGrid& g) const
    {
        const double h = g.h();
        const auto N = static_cast<std::size_t>(g.N);
        CellMoments cm;
        cm.grid = g;
        cm.kappa = exponent();
        cm.m0.resize(N);
        cm.m1.resize(N);
        cm.kv.resize(N + 1);
        cm.m0[0] = integral(0.0, h);
        cm.m1[0] = origin_moment(h) / h;
        for (std::size_t m = 1; m < N; ++m) {
            const double a = static_cast<double>(m) * h;
            cm.m0[m] = integral(a, a + h);
            cm.m1[m] = shifted_moment(a, a + h) / h;
        }
        fill_node_values(cm);
        return cm;
    }

protected:
    void fill_node_values(CellMoments& cm) const
    {
        const double h = cm.grid.h();
        cm.kv[0] = weighted(0.0);
        for (std::size_t m = 1; m < cm.kv.size(); ++m) cm.kv[m] = value(static_cast<double>(m) * h);
        cm.a0 = weighted(0.0);
        cm.a1 = (weighted(h) - cm.a0) / h;
    }
};

// c u^kappa; covers K and L_K.
class PowerKernel : public Kernel {
public:
    PowerKernel(double c, double kappa) : c_(c), kappa_(kappa)
    {
        require(kappa > -1.0 && kappa <= 0.0, "power kernel exponent must lie in (-1,0]");
    }
    double value(double u) const override { return c_ * std::pow(u, kappa_); }
    double exponent() const override { return kappa_; }
    double weighted(double) const override { return c_; }
    double integral(double a, double b) const override
    {
        return c_ * (std::pow(b, kappa_ + 1.0) - std::pow(a, kappa_ + 1.0)) / (kappa_ + 1.0);
    }
    double origin_moment(double h) const override { return c_ * std::pow(h, kappa_ + 2.0) / (kappa_ + 2.0); }

private:
    double c_, kappa_;
};

inline PowerKernel make_kernel_k(const specfun::AlphaGamma& p)
{
    return PowerKernel(p.gamma * specfun::rgamma(p.alpha), p.alpha - 1.0);
}

inline PowerKernel make_kernel_lk(const specfun::AlphaGamma& p)
{
    return PowerKernel(specfun::rgamma(1.0 - p.alpha) / p.gamma, -p.alpha);
}

// scale * alpha (1+u)^{-alpha-1}
class HawkesPhiKernel : public Kernel {
public:
    explicit HawkesPhiKernel(double alpha, double scale = 1.0) : alpha_(alpha), scale_(scale) {}
    double value(double u) const override { return scale_ * alpha_ * std::pow(1.0 + u, -alpha_ - 1.0); }
    double integral(double a, double b) const override
    {
        return scale_ * (std::pow(1.0 + a, -alpha_) - std::pow(1.0 + b, -alpha_));
    }
    double origin_moment(double h) const override
    {
        return scale_ * (-h * std::pow(1.0 + h, -alpha_) + (std::pow(1.0 + h, 1.0 - alpha_) - 1.0) / (1.0 - alpha_));
    }

private:
    double alpha_, scale_;
};

// scale * exp(-rate u)
class ExpKernel : public Kernel {
public:
    ExpKernel(double rate, double scale = 1.0) : rate_(rate), scale_(scale)
    {
        require(rate > 0.0, "exponential kernel rate must be > 0");
    }
    double value(double u) const override { return scale_ * std::exp(-rate_ * u); }
    double integral(double a, double b) const override
    {
        return scale_ * (std::exp(-rate_ * a) - std::exp(-rate_ * b)) / rate_;
    }
    double origin_moment(double h) const override
    {
        const double x = rate_ * h;
        return scale_ * (-std::expm1(-x) - x * std::exp(-x)) / (rate_ * rate_);
    }

private:
    double rate_, scale_;
};

// Baseline v (1+u)^{-alpha}.
class BaselineKernel : public Kernel {
public:
    BaselineKernel(double alpha, double v) : alpha_(alpha), v_(v) {}
    double value(double u) const override { return v_ * std::pow(1.0 + u, -alpha_); }
    double integral(double a, double b) const override
    {
        return v_ * (std::pow(1.0 + b, 1.0 - alpha_) - std::pow(1.0 + a, 1.0 - alpha_)) / (1.0 - alpha_);
    }
    double origin_moment(double h) const override
    {
        return v_ * ((std::pow(1.0 + h, 2.0 - alpha_) - 1.0) / (2.0 - alpha_) -
                     (std::pow(1.0 + h, 1.0 - alpha_) - 1.0) / (1.0 - alpha_));
    }

private:
    double alpha_, v_;
};

// Kernels built from the Mittag-Leffler law. Cell moments come from F and
// its first two antiderivatives evaluated once per node.
class MlKernelBase : public Kernel {
public:
    explicit MlKernelBase(specfun::AlphaGamma p, double scale) : p_(p), scale_(scale) {}

protected:
    struct Nodes {
        std::vector<double> F, G1, G2;
    };
    Nodes node_tables(const UniformGrid& g) const
    {
        Nodes n;
        n.F.resize(g.size());
        n.G1.resize(g.size());
        n.G2.resize(g.size());
        for (long long i = 0; i <= g.N; ++i) {
            const double t = g.t(i);
            const auto k = static_cast<std::size_t>(i);
            n.F[k] = specfun::ml_cdf(p_, t);
            n.G1[k] = specfun::ml_cdf_integral(p_, t);
            n.G2[k] = specfun::ml_cdf_integral2(p_, t);
        }
        return n;
    }
    specfun::AlphaGamma p_;
    double scale_;
};

// scale * f^{alpha,gamma}
class MlDensityKernel : public MlKernelBase {
public:
    explicit MlDensityKernel(specfun::AlphaGamma p, double scale = 1.0) : MlKernelBase(p, scale) {}
    double value(double u) const override { return scale_ * specfun::ml_density(p_, u); }
    double exponent() const override { return p_.alpha - 1.0; }
    double weighted(double u) const override { return scale_ * specfun::ml_density_weighted(p_, u); }
    double integral(double a, double b) const override
    {
        return scale_ * (specfun::ml_cdf(p_, b) - specfun::ml_cdf(p_, a));
    }
    double origin_moment(double h) const override
    {
        return scale_ * (h * specfun::ml_cdf(p_, h) - specfun::ml_cdf_integral(p_, h));
    }
    double shifted_moment(double a, double b) const override
    {
        return scale_ * ((b - a) * specfun::ml_cdf(p_, b) -
                         (specfun::ml_cdf_integral(p_, b) - specfun::ml_cdf_integral(p_, a)));
    }
    CellMoments cell_moments(const UniformGrid& g) const override
    {
        const auto t = node_tables(g);
        const double h = g.h();
        CellMoments cm;
        cm.grid = g;
        cm.kappa = exponent();
        const auto N = static_cast<std::size_t>(g.N);
        cm.m0.resize(N);
        cm.m1.resize(N);
        cm.kv.resize(N + 1);
        for (std::size_t m = 0; m < N; ++m) {
            cm.m0[m] = scale_ * (t.F[m + 1] - t.F[m]);
            cm.m1[m] = scale_ * (h * t.F[m + 1] - (t.G1[m + 1] - t.G1[m])) / h;
        }
        fill_node_values(cm);
        return cm;
    }
};

// 1 - F^{alpha,gamma}
class MlSurvivalKernel : public MlKernelBase {
public:
    explicit MlSurvivalKernel(specfun::AlphaGamma p, double scale = 1.0) : MlKernelBase(p, scale) {}
    double value(double u) const override { return scale_ * (1.0 - specfun::ml_cdf(p_, u)); }
    double weighted(double u) const override { return value(u); }
    double integral(double a, double b) const override
    {
        return scale_ * ((b - a) - (specfun::ml_cdf_integral(p_, b) - specfun::ml_cdf_integral(p_, a)));
    }
    double origin_moment(double h) const override
    {
        return scale_ * (0.5 * h * h - (h * specfun::ml_cdf_integral(p_, h) - specfun::ml_cdf_integral2(p_, h)));
    }
    CellMoments cell_moments(const UniformGrid& g) const override
    {
        const auto t = node_tables(g);
        const double h = g.h();
        CellMoments cm;
        cm.grid = g;
        cm.kappa = 0.0;
        const auto N = static_cast<std::size_t>(g.N);
        cm.m0.resize(N);
        cm.m1.resize(N);
        cm.kv.resize(N + 1);
        for (std::size_t m = 0; m < N; ++m) {
            cm.m0[m] = scale_ * (h - (t.G1[m + 1] - t.G1[m]));
            const double shifted = 0.5 * h * h - (h * t.G1[m + 1] - (t.G2[m + 1] - t.G2[m]));
            cm.m1[m] = scale_ * shifted / h;
        }
        cm.kv[0] = scale_;
        for (std::size_t m = 1; m <= N; ++m) cm.kv[m] = scale_ * (1.0 - t.F[m]);
        cm.a0 = scale_;
        cm.a1 = (cm.kv[1] - cm.a0) / h;
        return cm;
    }
};

namespace detail {

inline double beta_fn(double x, double y)
{
    return std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y));
}

// Gauss-Legendre rule on [0, 1].
struct UnitRule {
    std::vector<double> x, w;
};

inline const UnitRule& unit_rule()
{
    static const UnitRule rule = [] {
        using GL = boost::math::quadrature::gauss<double, 10>;
        UnitRule r;
        const auto& a = GL::abscissa();
        const auto& wt = GL::weights();
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (a[k] == 0.0) {
                r.x.push_back(0.5);
                r.w.push_back(0.5 * wt[k]);
                continue;
            }
            r.x.push_back(0.5 * (1.0 - a[k]));
            r.w.push_back(0.5 * wt[k]);
            r.x.push_back(0.5 * (1.0 + a[k]));
            r.w.push_back(0.5 * wt[k]);
        }
        return r;
    }();
    return rule;
}

} // namespace detail

// Precomputed data for convolving one kernel with functions carrying a
// fixed singular tag rho. For rho < 0 the first `head_cells` cells of f are
// modeled as s^rho times a linear function of the weighted values and
// integrated against the exact kernel by Gauss rules; the rest uses the
// piecewise-linear cell moments.
struct ConvolutionPlan {
    CellMoments cm;
    double rho = 0.0;
    long long head_cells = 0;
    long long near = 0;              // kernel tables cover j < near
    std::vector<double> k_first;     // k((j - y_q) h), y_q = v_q^{1/(rho+1)}
    std::vector<double> k_cell;      // k((j - x_q) h)
    std::vector<double> s_pow;       // ((m + x_q) h)^rho, m < head_cells
    std::vector<double> adj_weight;  // weighted kernel at u_q = h v_q^{1/(kappa+1)}
    std::vector<double> adj_pow;     // ((m+1) h - u_q)^rho, m < head_cells
    std::vector<double> adj_shift;   // (h - u_q) / h
    std::vector<double> y_first;
};

inline ConvolutionPlan make_plan(const Kernel& k, const UniformGrid& g, std::optional<double> rho_tag = std::nullopt,
                                 long long head_cells = 1)
{
    ConvolutionPlan p;
    p.cm = k.cell_moments(g);
    require(p.cm.kappa > -1.0 && p.cm.kappa <= 0.0, "kernel exponent must lie in (-1,0]");
    p.rho = rho_tag.value_or(0.0);
    require(p.rho > -1.0 && p.rho <= 0.0, "singular exponent must lie in (-1,0]");
    if (p.rho == 0.0) return p;
    const auto& rule = detail::unit_rule();
    const std::size_t Q = rule.x.size();
    const double h = g.h();
    const double kappa = p.cm.kappa;
    p.head_cells = std::min<long long>(std::max<long long>(head_cells, 1), g.N);
    p.near = std::min<long long>(128, g.N + 1);
    p.k_first.assign(static_cast<std::size_t>(p.near) * Q, 0.0);
    p.k_cell.assign(static_cast<std::size_t>(p.near) * Q, 0.0);
    p.y_first.resize(Q);
    for (std::size_t q = 0; q < Q; ++q) p.y_first[q] = std::pow(rule.x[q], 1.0 / (p.rho + 1.0));
    for (long long j = 2; j < p.near; ++j)
        for (std::size_t q = 0; q < Q; ++q) {
            const auto idx = static_cast<std::size_t>(j) * Q + q;
            p.k_first[idx] = k.value((static_cast<double>(j) - p.y_first[q]) * h);
            p.k_cell[idx] = k.value((static_cast<double>(j) - rule.x[q]) * h);
        }
    p.s_pow.resize(static_cast<std::size_t>(p.head_cells) * Q);
    p.adj_pow.resize(static_cast<std::size_t>(p.head_cells) * Q);
    p.adj_weight.resize(Q);
    p.adj_shift.resize(Q);
    for (std::size_t q = 0; q < Q; ++q) {
        const double u = h * std::pow(rule.x[q], 1.0 / (kappa + 1.0));
        p.adj_weight[q] = k.weighted(u);
        p.adj_shift[q] = (h - u) / h;
    }
    for (long long m = 0; m < p.head_cells; ++m)
        for (std::size_t q = 0; q < Q; ++q) {
            const auto idx = static_cast<std::size_t>(m) * Q + q;
            p.s_pow[idx] = std::pow((static_cast<double>(m) + rule.x[q]) * h, p.rho);
            p.adj_pow[idx] = std::pow((static_cast<double>(m) + p.adj_shift[q]) * h, p.rho);
        }
    return p;
}

namespace detail {

// Kernel at (j - x) h; exact table near the diagonal, linear in the node values beyond.
inline double kernel_near(const ConvolutionPlan& p, const std::vector<double>& table, long long j, std::size_t q,
                          double x)
{
    if (j < p.near) return table[static_cast<std::size_t>(j) * unit_rule().x.size() + q];
    const auto& kv = p.cm.kv;
    return kv[static_cast<std::size_t>(j)] * (1.0 - x) + kv[static_cast<std::size_t>(j - 1)] * x;
}

// int over the first min(head_cells, i) cells of k(t_i - s) f(s) ds for a singular f.
inline double singular_head(const ConvolutionPlan& p, const GridFunction& f, long long i)
{
    const auto& rule = unit_rule();
    const std::size_t Q = rule.x.size();
    const auto& cm = p.cm;
    const double h = cm.grid.h();
    const double rho = p.rho;
    const double kappa = cm.kappa;
    const long long cells = std::min(p.head_cells, i);
    double acc = 0.0;
    for (long long m = 0; m < cells; ++m) {
        const double wA = f.weighted(m);
        const double dw = f.weighted(m + 1) - wA;
        const long long j = i - m;
        double part = 0.0;
        if (j == 1 && m == 0) {
            const double base = std::pow(h, kappa + rho + 1.0);
            part = base * (cm.a0 * (wA * beta_fn(kappa + 1.0, rho + 1.0) + dw * beta_fn(kappa + 1.0, rho + 2.0)) +
                           cm.a1 * h * (wA * beta_fn(kappa + 2.0, rho + 1.0) + dw * beta_fn(kappa + 2.0, rho + 2.0)));
        } else if (j == 1) {
            for (std::size_t q = 0; q < Q; ++q) {
                const double x = p.adj_shift[q];
                part += rule.w[q] * p.adj_weight[q] * p.adj_pow[static_cast<std::size_t>(m) * Q + q] * (wA + dw * x);
            }
            part *= std::pow(h, kappa + 1.0) / (kappa + 1.0);
        } else if (m == 0) {
            for (std::size_t q = 0; q < Q; ++q) {
                const double y = p.y_first[q];
                part += rule.w[q] * kernel_near(p, p.k_first, j, q, y) * (wA + dw * y);
            }
            part *= std::pow(h, rho + 1.0) / (rho + 1.0);
        } else {
            for (std::size_t q = 0; q < Q; ++q) {
                const double x = rule.x[q];
                part += rule.w[q] * kernel_near(p, p.k_cell, j, q, x) * p.s_pow[static_cast<std::size_t>(m) * Q + q] *
                        (wA + dw * x);
            }
            part *= h;
        }
        acc += part;
    }
    return acc;
}

// Cell sum over f-cells [m h, (m+1) h] with m in [first, i).
inline double regular_tail(const CellMoments& cm, const std::vector<double>& v, long long i, long long first)
{
    const double* A0 = cm.m0.data();
    const double* A1 = cm.m1.data();
    const double* f = v.data();
    double acc = 0.0;
    const long long last = i - 1 - first;
    for (long long c = 0; c <= last; ++c) acc += (A0[c] - A1[c]) * f[i - c] + A1[c] * f[i - c - 1];
    return acc;
}

} // namespace detail

// (k * f)(t_i) for a bounded f.
inline double convolve_at_node(const CellMoments& cm, const GridFunction& f, long long i)
{
    require(!f.singular(), "convolve_at_node needs a bounded function; use a plan");
    if (i == 0) return 0.0;
    return detail::regular_tail(cm, f.values, i, 0);
}

inline double convolve_at_node(const ConvolutionPlan& p, const GridFunction& f, long long i)
{
    if (i == 0) return 0.0;
    if (!f.singular()) return detail::regular_tail(p.cm, f.values, i, 0);
    const long long head = std::min(p.head_cells, i);
    return detail::singular_head(p, f, i) + detail::regular_tail(p.cm, f.values, i, head);
}

inline GridFunction convolve(const ConvolutionPlan& p, const GridFunction& f)
{
    require_same_grid(p.cm.grid, f.grid, "convolve");
    if (f.singular() && f.rho() != p.rho)
        throw DomainError("convolution plan was built for a different singular exponent");
    const double sigma = p.cm.kappa + f.rho() + 1.0;
    std::vector<double> out(f.grid.size(), 0.0);
    for (long long i = 1; i <= f.grid.N; ++i) out[static_cast<std::size_t>(i)] = convolve_at_node(p, f, i);
    std::optional<double> tag;
    if (sigma <= 0.0) {
        out[0] = p.cm.a0 * f.values[0] * detail::beta_fn(p.cm.kappa + 1.0, f.rho() + 1.0);
        if (sigma < 0.0) tag = sigma;
    }
    return GridFunction(f.grid, std::move(out), tag);
}

inline GridFunction convolve(const Kernel& k, const GridFunction& f)
{
    return convolve(make_plan(k, f.grid, f.singular() ? f.singular_exponent : std::nullopt), f);
}

// Solves y = forcing + c (k * y) by forward substitution; y is bounded.
inline GridFunction solve_linear(const CellMoments& cm, const GridFunction& forcing, double c)
{
    require_same_grid(cm.grid, forcing.grid, "solve_linear");
    require(!forcing.singular(), "solve_linear needs a bounded forcing");
    const auto N = forcing.grid.N;
    std::vector<double> y(forcing.grid.size(), 0.0);
    y[0] = forcing.values[0];
    const double* A0 = cm.m0.data();
    const double* A1 = cm.m1.data();
    const double diag = 1.0 - c * (A0[0] - A1[0]);
    require(diag != 0.0, "solve_linear: singular diagonal");
    for (long long i = 1; i <= N; ++i) {
        double acc = A1[0] * y[static_cast<std::size_t>(i - 1)];
        const double* v = y.data();
        for (long long m = 1; m < i; ++m) acc += (A0[m] - A1[m]) * v[i - m] + A1[m] * v[i - m - 1];
        y[static_cast<std::size_t>(i)] = (forcing.values[static_cast<std::size_t>(i)] + c * acc) / diag;
    }
    return GridFunction(forcing.grid, std::move(y));
}

struct ResolventResult {
    GridFunction R;
    double residual = 0.0; // sup-node |R - beta phi - beta phi*R| of the discrete equations
};

// R = beta phi + beta phi * R.
inline ResolventResult solve_resolvent(double beta, const Kernel& phi, const UniformGrid& grid)
{
    if (!(beta < 1.0)) throw SupercriticalError("supercritical: branching ratio beta must be < 1");
    require(beta >= 0.0, "beta must be >= 0");
    require(phi.exponent() == 0.0, "solve_resolvent needs a bounded kernel");
    const auto cm = phi.cell_moments(grid);
    std::vector<double> forcing(grid.size());
    forcing[0] = beta * phi.weighted(0.0);
    for (long long i = 1; i <= grid.N; ++i) forcing[static_cast<std::size_t>(i)] = beta * cm.kv[static_cast<std::size_t>(i)];
    GridFunction source(grid, forcing);
    ResolventResult out{solve_linear(cm, source, beta), 0.0};
    if (beta > 0.0) {
        for (long long i = 0; i <= grid.N; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const double conv = convolve_at_node(cm, out.R, i);
            out.residual = std::max(out.residual, std::abs(out.R.values[k] - forcing[k] - beta * conv));
        }
    }
    return out;
}

// ------------------------------------------------------ prelimit scaling --

inline constexpr long long grid_node_cap = 1LL << 22;

// Grid on [0, nT] with n * n_base steps.
inline UniformGrid prelimit_grid(long long n, double T, long long n_base)
{
    require(n >= 1 && n_base >= 2, "prelimit grid needs n >= 1 and n_base >= 2");
    const long long steps = n * n_base;
    if (steps > grid_node_cap)
        throw GridCapExceeded("prelimit grid for n = " + std::to_string(n) + " needs " + std::to_string(steps) +
                                  " steps, above the cap of 2^22; shrink T or the base resolution",
                              n);
    return UniformGrid(static_cast<double>(n) * T, steps);
}

inline ResolventResult solve_prelimit_resolvent(const PrelimitCharacteristics& c, const UniformGrid& grid)
{
    c.validate();
    return solve_resolvent(c.beta_n(), HawkesPhiKernel(c.alpha), grid);
}

namespace detail {

inline long long stride_for(const UniformGrid& src, const UniformGrid& out, long long n)
{
    const double need = static_cast<double>(n) * out.T;
    if (src.T < need * (1.0 - 1e-12))
        throw InsufficientHorizon("source grid horizon " + std::to_string(src.T) + " is shorter than n*T = " +
                                  std::to_string(need));
    const double ratio = need / (static_cast<double>(out.N) * src.h());
    const auto stride = static_cast<long long>(std::llround(ratio));
    if (stride < 1 || std::abs(ratio - static_cast<double>(stride)) > 1e-9 * ratio)
        throw GridMismatch("output nodes do not fall on source nodes");
    return stride;
}

} // namespace detail

struct RescaledResolvent {
    GridFunction R;        // R^{(n)}(t) = n^{1-alpha} R_n(n t)
    GridFunction integral; // I(t) = int_0^t R^{(n)}
};

inline RescaledResolvent rescaled_resolvent(const GridFunction& Rn, long long n, double alpha, const UniformGrid& out)
{
    require(n >= 1, "n must be >= 1");
    const long long stride = detail::stride_for(Rn.grid, out, n);
    const double nd = static_cast<double>(n);
    const auto cum = running_integral(Rn.values, Rn.grid.h());
    std::vector<double> r(out.size()), I(out.size());
    const double amp = std::pow(nd, 1.0 - alpha);
    const double iamp = std::pow(nd, -alpha);
    for (long long i = 0; i <= out.N; ++i) {
        const auto k = static_cast<std::size_t>(i * stride);
        r[static_cast<std::size_t>(i)] = amp * Rn.values[k];
        I[static_cast<std::size_t>(i)] = iamp * cum[k];
    }
    return {GridFunction(out, std::move(r)), GridFunction(out, std::move(I))};
}

// Two-parameter function R(t, y) = 1{y > t} + int_{(t-y)^+}^t R, kept as the
// running integral of the piecewise-linear R.
class TwoParamResolvent {
public:
    explicit TwoParamResolvent(const GridFunction& R)
        : grid_(R.grid), r_(R.values), cum_(running_integral(R.values, R.grid.h()))
    {
        require(!R.singular(), "two-parameter function needs a bounded resolvent");
    }

    const UniformGrid& grid() const { return grid_; }
    double integral_of_r(double t) const { return integral_to(r_, cum_, grid_.h(), t); }
    const std::vector<double>& integral_nodes() const { return cum_; }

    double operator()(double t, double y) const
    {
        require(t >= 0.0 && t <= grid_.T * (1.0 + 1e-12), "two-parameter evaluation outside the grid");
        require(y >= 0.0, "two-parameter evaluation needs y >= 0");
        const double ind = y > t ? 1.0 : 0.0;
        return ind + integral_of_r(t) - integral_of_r(std::max(t - y, 0.0));
    }

private:
    UniformGrid grid_;
    std::vector<double> r_, cum_;
};

inline TwoParamResolvent two_param(const GridFunction& R) { return TwoParamResolvent(R); }

// I^{(n)}(t) = [mu_n (1 + int_0^{nt} R_n) + Lambda_n(nt) + (R_n * Lambda_n)(nt)] / n^{2 alpha - 1}
inline GridFunction prelimit_mean(const PrelimitCharacteristics& c, const GridFunction& Rn, const UniformGrid& out)
{
    c.validate();
    const long long stride = detail::stride_for(Rn.grid, out, c.n);
    const auto cum = running_integral(Rn.values, Rn.grid.h());
    const BaselineKernel lam(c.alpha, c.v0n);
    std::vector<double> res(out.size());
    const double scale = 1.0 / c.amplitude_scale();
    const bool need_conv = c.v0n > 0.0;
    const CellMoments cm = need_conv ? lam.cell_moments(Rn.grid) : CellMoments{};
    for (long long i = 0; i <= out.N; ++i) {
        const long long k = i * stride;
        const double t = Rn.grid.t(k);
        double v = c.mu_n * (1.0 + cum[static_cast<std::size_t>(k)]) + c.v0n * std::pow(1.0 + t, -c.alpha);
        if (need_conv) v += convolve_at_node(cm, Rn, k);
        res[static_cast<std::size_t>(i)] = v * scale;
    }
    return GridFunction(out, std::move(res));
}

// m(t) = V0 (1 - F(t)) + (a/b) F(t)
inline GridFunction limit_mean(const LimitParams& p, const UniformGrid& grid)
{
    p.validate();
    const auto ag = p.alpha_gamma();
    std::vector<double> v(grid.size());
    for (long long i = 0; i <= grid.N; ++i) {
        const double F = specfun::ml_cdf(ag, grid.t(i));
        v[static_cast<std::size_t>(i)] = p.v0 * (1.0 - F) + p.mean_level() * F;
    }
    return GridFunction(grid, std::move(v));
}

// Solves m = V0 + K*((a/b) - m) on the grid.
inline GridFunction limit_mean_volterra(const LimitParams& p, const UniformGrid& grid)
{
    p.validate();
    const auto ag = p.alpha_gamma();
    const auto K = make_kernel_k(ag);
    std::vector<double> forcing(grid.size());
    for (long long i = 0; i <= grid.N; ++i)
        forcing[static_cast<std::size_t>(i)] = p.v0 + p.mean_level() * K.integral(0.0, grid.t(i));
    return solve_linear(K.cell_moments(grid), GridFunction(grid, forcing), -1.0);
}

// ---------------------------------------------------- identity checks --

// Node residuals of L_K*K = 1 and t^{1-alpha} |K - f - f*K|.
struct IdentityResiduals {
    UniformGrid grid;
    std::vector<double> first_kind, second_kind;

    // sup over nodes with t_i > t_min
    static double sup_beyond(const std::vector<double>& r, const UniformGrid& g, double t_min)
    {
        double m = 0.0;
        for (long long i = 1; i <= g.N; ++i)
            if (g.t(i) > t_min * (1.0 + 1e-12)) m = std::max(m, r[static_cast<std::size_t>(i)]);
        return m;
    }
};

inline IdentityResiduals identity_residuals(const specfun::AlphaGamma& p, const UniformGrid& g,
                                            long long head_cells = 1)
{
    const auto K = make_kernel_k(p);
    const auto LK = make_kernel_lk(p);
    const MlDensityKernel f(p);
    const double rho = p.alpha - 1.0;
    std::vector<double> kv(g.size());
    kv[0] = K.weighted(0.0);
    for (long long i = 1; i <= g.N; ++i) kv[static_cast<std::size_t>(i)] = K.value(g.t(i));
    const GridFunction Kg(g, kv, rho);
    const auto lk = convolve(make_plan(LK, g, rho, head_cells), Kg);
    const auto fk = convolve(make_plan(f, g, rho, head_cells), Kg);
    IdentityResiduals r;
    r.grid = g;
    r.first_kind.assign(g.size(), 0.0);
    r.second_kind.assign(g.size(), 0.0);
    for (long long i = 1; i <= g.N; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double t = g.t(i);
        r.first_kind[k] = std::abs(lk.values[k] - 1.0);
        r.second_kind[k] = std::abs(kv[k] - specfun::ml_density(p, t) - fk.values[k]) * std::pow(t, 1.0 - p.alpha);
    }
    return r;
}

// ------------------------------------------------------- growth bounds --

struct GrowthMember {
    long long n;
    GridFunction Rn; // on [0, nT]
};

struct GrowthRow {
    long long n;
    double c_resolvent;  // max R_n(t) (1+t)^{1-alpha}
    double c_derivative; // max |R_n'(t)| (1+t)^{2-alpha}, central differences
    double c_lp;         // max L^p integral / (1+t)^{alpha(p-1)}
    double c_integral;   // max I_{R^{(n)}}(t) / t^alpha
};

struct GrowthReport {
    double p = 2.0;
    std::vector<GrowthRow> rows;
    double spread_resolvent = 1.0, spread_derivative = 1.0, spread_lp = 1.0, spread_integral = 1.0;
    bool finite = true;
    bool stable = true; // every constant within a factor 2 across the ladder
    std::string derivative_method = "central differences on the resolvent grid, interior nodes only";
};

namespace detail {

// int_0^t int_0^inf |n^{-alpha} R_n(ns, ny)|^p n^{alpha+1} nu(n dy) ds at the output nodes.
inline std::vector<double> lp_integral(const GridFunction& Rn, long long n, double alpha, double p,
                                        const UniformGrid& out)
{
    const TwoParamResolvent tp(Rn);
    const double nd = static_cast<double>(n);
    const double iamp = std::pow(nd, -alpha);
    auto I = [&](double s) { return iamp * tp.integral_of_r(nd * s); };
    using GL = boost::math::quadrature::gauss<double, 10>;
    auto inner = [&](double s) {
        const double Is = I(s);
        double acc = std::pow(iamp + Is, p) * std::pow(nd, alpha + 1.0) * std::pow(1.0 + nd * s, -alpha - 1.0);
        if (s <= 0.0) return acc;
        // body over w = n y in (0, n s), log-spaced panels
        const double W = nd * s;
        double lo = 0.0;
        double hi = std::min(W, 1e-3);
        while (lo < W) {
            auto g = [&](double w) {
                const double d = Is - I(std::max(s - w / nd, 0.0));
                return std::pow(std::max(d, 0.0), p) * std::pow(nd, alpha + 1.0) * (1.0 + alpha) *
                       std::pow(1.0 + w, -alpha - 2.0);
            };
            acc += GL::integrate(g, lo, hi);
            lo = hi;
            hi = std::min(W, hi * 2.0);
        }
        return acc;
    };
    std::vector<double> vals(out.size()), L(out.size(), 0.0);
    for (long long i = 0; i <= out.N; ++i) vals[static_cast<std::size_t>(i)] = inner(out.t(i));
    for (std::size_t i = 1; i < vals.size(); ++i) L[i] = L[i - 1] + 0.5 * out.h() * (vals[i - 1] + vals[i]);
    return L;
}

inline double spread(const std::vector<double>& v)
{
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    if (*mx == 0.0) return 1.0;
    return *mn > 0.0 ? *mx / *mn : std::numeric_limits<double>::infinity();
}

} // namespace detail

inline GrowthReport verify_growth_bounds(const std::vector<GrowthMember>& family, double alpha, double p,
                                         const UniformGrid& out)
{
    require(p > 1.0 + alpha, "growth bound exponent p must exceed 1 + alpha");
    require(!family.empty(), "growth bounds need at least one resolvent");
    GrowthReport rep;
    rep.p = p;
    std::vector<double> cr, cd, cl, ci;
    for (const auto& mem : family) {
        GrowthRow row{mem.n, 0.0, 0.0, 0.0, 0.0};
        const auto& g = mem.Rn.grid;
        const double h = g.h();
        const auto& v = mem.Rn.values;
        for (long long i = 0; i <= g.N; ++i) {
            const double t = g.t(i);
            row.c_resolvent = std::max(row.c_resolvent, v[static_cast<std::size_t>(i)] * std::pow(1.0 + t, 1.0 - alpha));
            if (i >= 1 && i < g.N) {
                const double d = (v[static_cast<std::size_t>(i + 1)] - v[static_cast<std::size_t>(i - 1)]) / (2.0 * h);
                row.c_derivative = std::max(row.c_derivative, std::abs(d) * std::pow(1.0 + t, 2.0 - alpha));
            }
        }
        const auto L = detail::lp_integral(mem.Rn, mem.n, alpha, p, out);
        const auto resc = rescaled_resolvent(mem.Rn, mem.n, alpha, out);
        for (long long i = 1; i <= out.N; ++i) {
            const double t = out.t(i);
            row.c_lp = std::max(row.c_lp, L[static_cast<std::size_t>(i)] / std::pow(1.0 + t, alpha * (p - 1.0)));
            row.c_integral = std::max(row.c_integral, resc.integral.values[static_cast<std::size_t>(i)] / std::pow(t, alpha));
        }
        for (double c : {row.c_resolvent, row.c_derivative, row.c_lp, row.c_integral})
            if (!std::isfinite(c)) rep.finite = false;
        cr.push_back(row.c_resolvent);
        cd.push_back(row.c_derivative);
        cl.push_back(row.c_lp);
        ci.push_back(row.c_integral);
        rep.rows.push_back(row);
    }
    rep.spread_resolvent = detail::spread(cr);
    rep.spread_derivative = detail::spread(cd);
    rep.spread_lp = detail::spread(cl);
    rep.spread_integral = detail::spread(ci);
    rep.stable = rep.spread_resolvent <= 2.0 && rep.spread_derivative <= 2.0 && rep.spread_lp <= 2.0 &&
                 rep.spread_integral <= 2.0;
    return rep;
}

} // namespace spikevol::volterra
