#pragma once

// Monte Carlo for the limiting stochastic Volterra equation in its two
// forms: the Mittag-Leffler form (eq1) and the K-kernel form with explicit
// mean reversion (eq2). Both forms share the noise of a given (seed, path).

#include <spikevol/ensemble.hpp>
#include <spikevol/errors.hpp>
#include <spikevol/grid.hpp>
#include <spikevol/params.hpp>
#include <spikevol/rng.hpp>
#include <spikevol/specfun.hpp>
#include <spikevol/volterra.hpp>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace spikevol::sve {

enum class ClipMode { truncate_at_zero };

struct SchemeConfig {
    double y_min = 0.0; // 0 selects 1e-3 T
    ClipMode clip_mode = ClipMode::truncate_at_zero;
    int compensator_points = 10; // Gauss points for the dropped-mark integral
    bool record_jumps = false;

    double effective_y_min(double T) const { return y_min > 0.0 ? y_min : 1e-3 * T; }
    void validate(double T) const
    {
        require(y_min >= 0.0 && std::isfinite(y_min), "y_min must be >= 0");
        require(effective_y_min(T) < T, "y_min must be < T");
        require(compensator_points >= 2, "compensator_points must be >= 2");
    }
};

struct Jump {
    double s;
    double y;
};

struct SvePath {
    UniformGrid grid;
    std::vector<double> values; // V(t_i)^+
    std::vector<double> raw;    // scheme state before truncation
    std::vector<Jump> jumps;    // only when SchemeConfig::record_jumps
    long long jump_count = 0;
    long long clip_count = 0;
    double dropped_variance = 0.0; // variance of the discarded y <= y_min martingale at T
    bool clip_warning = false;     // more than 10% of nodes clipped
};

// c3 (F(t-s) - F((t-s-y)^+))
inline double jump_amplitude(double t, double s, double y, const LimitParams& p)
{
    require(s <= t && s >= 0.0, "jump_amplitude needs 0 <= s <= t");
    require(y > 0.0, "jump_amplitude needs y > 0");
    if (t == s) return 0.0;
    const auto ag = p.alpha_gamma();
    const double r = t - s;
    const double lo = std::max(0.0, r - y);
    return p.c3() * (specfun::ml_cdf(ag, r) - specfun::ml_cdf(ag, lo));
}

namespace detail {

// Second antiderivative of q(x) = nu_*-tail at max(x, y_min), zero for x <= 0.
inline double q2(double x, double alpha, double ym)
{
    if (x <= 0.0) return 0.0;
    const double c = alpha * std::pow(ym, -alpha - 1.0);
    if (x <= ym) return 0.5 * c * x * x;
    return 0.5 * c * ym * ym + (1.0 + alpha) * std::pow(ym, -alpha) * (x - ym) -
           (std::pow(x, 1.0 - alpha) - std::pow(ym, 1.0 - alpha)) / (1.0 - alpha);
}

// int_0^{ym} W(r, y)^2 nu_*(dy) with W the f-window, y = ym w^{1/(1-alpha)}.
inline double dropped_window_moment(const specfun::AlphaGamma& ag, double r, double ym, int points)
{
    const double alpha = ag.alpha;
    const double pw = 1.0 / (1.0 - alpha);
    const double Fr = specfun::ml_cdf(ag, r);
    auto integrand = [&](double w) {
        if (w <= 0.0) return 0.0;
        const double y = ym * std::pow(w, pw);
        const double W = Fr - specfun::ml_cdf(ag, std::max(0.0, r - y));
        const double dq = W / y;
        return dq * dq;
    };
    auto gl = [&](double a, double b) {
        const auto& x = boost::math::quadrature::gauss<double, 10>::abscissa();
        const auto& wt = boost::math::quadrature::gauss<double, 10>::weights();
        const int panels = std::max(1, points / 10);
        double acc = 0.0;
        for (int k = 0; k < panels; ++k) {
            const double lo = a + (b - a) * k / panels, hi = a + (b - a) * (k + 1) / panels;
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            for (std::size_t i = 0; i < x.size(); ++i) {
                acc += wt[i] * half * integrand(mid + half * x[i]);
                if (x[i] != 0.0) acc += wt[i] * half * integrand(mid - half * x[i]);
            }
        }
        return acc;
    };
    double body;
    if (r < ym) {
        const double wr = std::pow(r / ym, 1.0 - alpha);
        body = gl(0.0, wr) + gl(wr, 1.0);
    } else {
        body = gl(0.0, 1.0);
    }
    return alpha * (1.0 + alpha) * pw * std::pow(ym, 1.0 - alpha) * body;
}

} // namespace detail

// Per-(params, grid, scheme) weight tables shared by all paths.
struct SchemeTables {
    LimitParams params;
    UniformGrid grid;
    SchemeConfig scheme;
    double y_min = 0.0;
    double mark_rate = 0.0;      // c4 h nu_*tail(y_min), per unit of V
    std::vector<double> mean;    // limit_mean at the nodes
    std::vector<double> f_mid;   // f((m - 1/2) h), m >= 1
    std::vector<double> f_cell;  // F(m h) - F((m-1) h)
    std::vector<double> k_mid;   // K((m - 1/2) h)
    std::vector<double> k_cell;  // int over the cell of K
    std::vector<double> q_cell;  // cell-averaged alive-count kernel
    std::vector<double> dropped; // dropped-mark window moment at r = (m - 1/2) h
};

inline std::shared_ptr<const SchemeTables> prepare(const LimitParams& p, const UniformGrid& grid,
                                                   const SchemeConfig& scheme = {})
{
    p.validate();
    scheme.validate(grid.T);
    auto t = std::make_shared<SchemeTables>();
    t->params = p;
    t->grid = grid;
    t->scheme = scheme;
    const double h = grid.h();
    const double alpha = p.alpha;
    const double ym = scheme.effective_y_min(grid.T);
    t->y_min = ym;
    t->mark_rate = p.c4() * h * specfun::limit_mark_tail(alpha, ym);
    t->mean = volterra::limit_mean(p, grid).values;
    const auto ag = p.alpha_gamma();
    const auto K = volterra::make_kernel_k(ag);
    const auto N = static_cast<std::size_t>(grid.N);
    t->f_mid.assign(N + 1, 0.0);
    t->f_cell.assign(N + 1, 0.0);
    t->k_mid.assign(N + 1, 0.0);
    t->k_cell.assign(N + 1, 0.0);
    t->q_cell.assign(N + 1, 0.0);
    double Fprev = 0.0;
    for (std::size_t m = 1; m <= N; ++m) {
        const double md = static_cast<double>(m);
        const double F = specfun::ml_cdf(ag, md * h);
        t->f_cell[m] = F - Fprev;
        Fprev = F;
        t->f_mid[m] = specfun::ml_density(ag, (md - 0.5) * h);
        t->k_mid[m] = K.value((md - 0.5) * h);
        t->k_cell[m] = K.integral((md - 1.0) * h, md * h);
    }
    if (p.c4() > 0.0) {
        t->q_cell[0] = detail::q2(h, alpha, ym) / h;
        for (std::size_t m = 1; m <= N; ++m) {
            const double md = static_cast<double>(m);
            if ((md - 1.0) * h >= ym) {
                const double e = 1.0 - alpha;
                t->q_cell[m] = -(std::pow(md + 1.0, e) - 2.0 * std::pow(md, e) + std::pow(md - 1.0, e)) *
                               std::pow(h, e) / (e * h);
            } else {
                t->q_cell[m] = (detail::q2((md + 1.0) * h, alpha, ym) - 2.0 * detail::q2(md * h, alpha, ym) +
                                detail::q2((md - 1.0) * h, alpha, ym)) /
                               h;
            }
        }
        t->dropped.assign(N + 1, 0.0);
        for (std::size_t m = 1; m <= N; ++m)
            t->dropped[m] = detail::dropped_window_moment(ag, (static_cast<double>(m) - 0.5) * h, ym,
                                                          scheme.compensator_points);
    }
    return t;
}

enum class Form { eq1, eq2 };

namespace detail {

// sum_{i < n} w[top - i] x[i]
inline double lagged_dot(const double* w, std::size_t top, const double* x, std::size_t n)
{
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 += w[top - i] * x[i];
        a1 += w[top - i - 1] * x[i + 1];
        a2 += w[top - i - 2] * x[i + 2];
        a3 += w[top - i - 3] * x[i + 3];
    }
    for (; i < n; ++i) a0 += w[top - i] * x[i];
    return (a0 + a1) + (a2 + a3);
}

inline SvePath simulate(const SchemeTables& tb, Form form, std::uint64_t seed, std::uint64_t path_index)
{
    const auto& p = tb.params;
    const UniformGrid& g = tb.grid;
    const long long N = g.N;
    const auto Nz = static_cast<std::size_t>(N);
    const double h = g.h();
    const double sqh = std::sqrt(h);
    const double c2 = p.c2(), c3 = p.c3(), c4 = p.c4();
    const double level = p.mean_level();
    const bool spikes = c3 > 0.0 && c4 > 0.0;
    const double ym = tb.y_min;
    const double inv_mark = -1.0 / (p.alpha + 1.0);

    SvePath out;
    out.grid = g;
    out.raw.assign(Nz + 1, 0.0);
    out.values.assign(Nz + 1, 0.0);
    std::vector<double> vplus(Nz + 1, 0.0); // V_j^+
    std::vector<double> d(Nz, 0.0);         // c2 sqrt(V_j^+) dB_j
    std::vector<double> e(Nz, 0.0);         // c3 (alive average - c4 compensator average)
    std::vector<double> drive(Nz, 0.0);     // eq2: a/b - V_j + e_j
    std::vector<double> partial, diff;
    if (spikes) {
        partial.assign(Nz + 1, 0.0);
        diff.assign(Nz + 2, 0.0);
    }
    double running = 0.0;
    rng::Stream brown(seed, path_index, rng::sve_brownian);

    const double v0 = p.v0;
    out.raw[0] = form == Form::eq1 ? tb.mean[0] : v0;
    for (long long k = 1; k <= N; ++k) {
        const long long j = k - 1;
        const auto jz = static_cast<std::size_t>(j);
        const double vj = std::max(0.0, out.raw[jz]);
        vplus[jz] = vj;
        d[jz] = c2 > 0.0 ? c2 * std::sqrt(vj) * sqh * brown.normal() : 0.0;
        if (spikes) {
            if (vj > 0.0 && tb.mark_rate > 0.0) {
                rng::Stream js(seed, path_index, rng::sve_jumps, static_cast<std::uint32_t>(j));
                const double t0 = static_cast<double>(j) * h;
                for (long long count = js.poisson(tb.mark_rate * vj); count > 0; --count) {
                    const double s = t0 + h * js.uniform();
                    const double y = ym * std::exp(inv_mark * std::log(js.uniform()));
                    ++out.jump_count;
                    if (tb.scheme.record_jumps) out.jumps.push_back({s, y});
                    const double end = s + y;
                    const double cell_end = t0 + h;
                    if (end <= cell_end) {
                        partial[jz] += y / h;
                    } else {
                        partial[jz] += (cell_end - s) / h;
                        const double le = std::floor(end / h);
                        if (le >= static_cast<double>(N)) {
                            diff[jz + 1] += 1.0;
                        } else {
                            const auto ie = static_cast<std::size_t>(le);
                            diff[jz + 1] += 1.0;
                            diff[ie] -= 1.0;
                            partial[ie] += (end - le * h) / h;
                        }
                    }
                }
            }
            running += diff[jz];
            const double comp = lagged_dot(tb.q_cell.data(), jz, vplus.data(), jz + 1);
            e[jz] = c3 * (partial[jz] + running - c4 * comp);
        }
        const auto kz = static_cast<std::size_t>(k);
        if (form == Form::eq1) {
            double acc = lagged_dot(tb.f_mid.data(), kz, d.data(), kz);
            if (spikes) acc += lagged_dot(tb.f_cell.data(), kz, e.data(), kz);
            out.raw[kz] = tb.mean[kz] + acc;
        } else {
            drive[jz] = level - out.raw[jz] + e[jz];
            out.raw[kz] = v0 + lagged_dot(tb.k_mid.data(), kz, d.data(), kz) +
                          lagged_dot(tb.k_cell.data(), kz, drive.data(), kz);
        }
    }
    vplus[Nz] = std::max(0.0, out.raw[Nz]);
    for (std::size_t i = 0; i <= Nz; ++i) {
        out.values[i] = vplus[i];
        if (out.raw[i] < 0.0) ++out.clip_count;
    }
    out.clip_warning = static_cast<double>(out.clip_count) > 0.1 * static_cast<double>(Nz + 1);
    if (spikes) {
        double dv = 0.0;
        for (std::size_t jz = 0; jz < Nz; ++jz) dv += vplus[jz] * h * tb.dropped[Nz - jz];
        out.dropped_variance = c3 * c3 * c4 * dv;
    }
    return out;
}

} // namespace detail

inline SvePath simulate_eq1(const SchemeTables& tb, std::uint64_t seed, std::uint64_t path_index = 0)
{
    return detail::simulate(tb, Form::eq1, seed, path_index);
}

inline SvePath simulate_eq2(const SchemeTables& tb, std::uint64_t seed, std::uint64_t path_index = 0)
{
    return detail::simulate(tb, Form::eq2, seed, path_index);
}

inline SvePath simulate_eq1(const LimitParams& p, const UniformGrid& grid, const SchemeConfig& scheme,
                            std::uint64_t seed, std::uint64_t path_index = 0)
{
    return simulate_eq1(*prepare(p, grid, scheme), seed, path_index);
}

inline SvePath simulate_eq2(const LimitParams& p, const UniformGrid& grid, const SchemeConfig& scheme,
                            std::uint64_t seed, std::uint64_t path_index = 0)
{
    return simulate_eq2(*prepare(p, grid, scheme), seed, path_index);
}

// ------------------------------------------------------------ ensembles --

enum class Observable { raw, clipped };

struct SveEnsemble {
    EnsembleStats stats;
    double clip_fraction = 0.0;
    double mean_jumps = 0.0;
    double mean_dropped_variance = 0.0;
};

inline SveEnsemble ensemble(const SchemeTables& tb, Form form, long long paths, std::uint64_t seed,
                            unsigned workers = 1, Observable obs = Observable::raw)
{
    require(paths >= 1, "paths must be >= 1");
    const auto times = grid_times(tb.grid);
    const std::size_t W = times.size();
    // slots W, W+1, W+2 of s1 carry clips, jumps and dropped variance
    auto acc = run_blocks(paths, W + 3, workers, [&](long long pi, spikevol::detail::Accum& a) {
        const auto path = detail::simulate(tb, form, seed, static_cast<std::uint64_t>(pi));
        const auto& v = obs == Observable::raw ? path.raw : path.values;
        for (std::size_t i = 0; i < W; ++i) {
            a.s1[i] += v[i];
            a.s2[i] += v[i] * v[i];
        }
        a.s1[W] += static_cast<double>(path.clip_count);
        a.s1[W + 1] += static_cast<double>(path.jump_count);
        a.s1[W + 2] += path.dropped_variance;
    });
    const double P = static_cast<double>(paths);
    SveEnsemble out;
    out.clip_fraction = acc.s1[W] / (P * static_cast<double>(W));
    out.mean_jumps = acc.s1[W + 1] / P;
    out.mean_dropped_variance = acc.s1[W + 2] / P;
    acc.s1.resize(W);
    acc.s2.resize(W);
    out.stats = spikevol::detail::finish(acc, times, paths);
    return out;
}

// int_0^T g(T - s) V(s) ds by the trapezoid rule on the path grid.
inline double weighted_integral(const std::vector<double>& v, const GridFunction& g)
{
    require(v.size() == g.values.size(), "g must live on the path grid");
    const std::size_t N = v.size() - 1;
    const double h = g.grid.h();
    double acc = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
        const double w = (i == 0 || i == N) ? 0.5 : 1.0;
        acc += w * g.values[N - i] * v[i];
    }
    return acc * h;
}

struct LaplaceEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0; // 95%
    long long paths = 0;
    double clip_fraction = 0.0;
    double mean_dropped_variance = 0.0;
};

// MC estimate of E[exp(-lambda V(T) - g*V(T))] along eq1 paths.
inline LaplaceEstimate laplace_mc(const SchemeTables& tb, double lambda, const GridFunction& g, long long paths,
                                  std::uint64_t seed, unsigned workers = 1)
{
    require(lambda >= 0.0, "lambda must be >= 0");
    require_same_grid(tb.grid, g.grid, "laplace_mc");
    require(!g.singular(), "g must be bounded");
    for (double x : g.values) require(x >= 0.0, "g must be >= 0");
    auto acc = run_blocks(paths, 3, workers, [&](long long pi, spikevol::detail::Accum& a) {
        const auto path = detail::simulate(tb, Form::eq1, seed, static_cast<std::uint64_t>(pi));
        const double x = std::exp(-lambda * path.values.back() - weighted_integral(path.values, g));
        a.s1[0] += x;
        a.s2[0] += x * x;
        a.s1[1] += static_cast<double>(path.clip_count);
        a.s1[2] += path.dropped_variance;
    });
    const double P = static_cast<double>(paths);
    LaplaceEstimate est;
    est.paths = paths;
    est.mean = acc.s1[0] / P;
    const double var = paths > 1 ? std::max(0.0, (acc.s2[0] / P - est.mean * est.mean) * P / (P - 1.0)) : 0.0;
    est.stderr_ = std::sqrt(var / P);
    est.ci_lo = est.mean - 1.959963984540054 * est.stderr_;
    est.ci_hi = est.mean + 1.959963984540054 * est.stderr_;
    est.clip_fraction = acc.s1[1] / (P * static_cast<double>(tb.grid.size()));
    est.mean_dropped_variance = acc.s1[2] / P;
    return est;
}

// ------------------------------------------------------------ diagnostics --

struct HolderEstimate {
    double exponent = 0.0;
    double half_width = 0.0; // 95%
    std::vector<long long> lags;
};

namespace detail {

inline void check_lags(const UniformGrid& g, const std::vector<long long>& lags)
{
    int ok = 0;
    for (long long l : lags) {
        require(l >= 1 && l <= g.N / 2, "lag out of range");
        const double dt = static_cast<double>(l) * g.h();
        if (dt > 2.0 * g.h() && dt < g.T / 10.0) ++ok;
    }
    require(ok >= 3, "need at least 3 lags within (2h, T/10)");
}

inline double median(std::vector<double> v)
{
    const std::size_t m = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
    if (v.size() % 2 == 1) return v[m];
    const double hi = v[m];
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
    return 0.5 * (lo + hi);
}

struct Fit {
    double slope, se;
};

inline Fit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - my - slope * (x[i] - mx);
        rss += r * r;
    }
    const double se = x.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
    return {slope, se};
}

inline double path_slope(const std::vector<double>& v, double h, const std::vector<long long>& lags, double* se)
{
    std::vector<double> lx, ly;
    for (long long l : lags) {
        std::vector<double> inc;
        const auto L = static_cast<std::size_t>(l);
        for (std::size_t i = 0; i + L < v.size(); ++i) inc.push_back(std::abs(v[i + L] - v[i]));
        const double med = median(std::move(inc));
        if (!(med > 0.0)) throw DomainError("degenerate path: zero median increment at lag " + std::to_string(l));
        lx.push_back(std::log(static_cast<double>(l) * h));
        ly.push_back(std::log(med));
    }
    const auto f = fit_line(lx, ly);
    if (se) *se = f.se;
    return f.slope;
}

} // namespace detail

// Log-log slope of the median absolute increment against the lag.
inline HolderEstimate holder_estimate(const SvePath& path, const std::vector<long long>& lags)
{
    detail::check_lags(path.grid, lags);
    HolderEstimate est;
    double se = 0.0;
    est.exponent = detail::path_slope(path.values, path.grid.h(), lags, &se);
    est.half_width = 1.959963984540054 * se;
    est.lags = lags;
    return est;
}

// Mean of the per-path slopes, half-width from their spread.
inline HolderEstimate holder_estimate(const std::vector<SvePath>& paths, const std::vector<long long>& lags)
{
    require(!paths.empty(), "holder_estimate needs at least one path");
    detail::check_lags(paths.front().grid, lags);
    std::vector<double> s;
    for (const auto& p : paths) s.push_back(detail::path_slope(p.values, p.grid.h(), lags, nullptr));
    double m = 0.0;
    for (double x : s) m += x;
    m /= static_cast<double>(s.size());
    double var = 0.0;
    for (double x : s) var += (x - m) * (x - m);
    var = s.size() > 1 ? var / static_cast<double>(s.size() - 1) : 0.0;
    HolderEstimate est;
    est.exponent = m;
    est.half_width = 1.959963984540054 * std::sqrt(var / static_cast<double>(s.size()));
    est.lags = lags;
    return est;
}

struct VarianceBudget {
    double t = 0.0;
    double f_part = 0.0; // window integrals of f^{alpha,gamma}
    double k_part = 0.0; // window integrals of K
    double value() const { return f_part + k_part; }
};

namespace detail {

// int_{y_lo}^inf W(r, y)^2 nu_*(dy) for a window function W(r, y) = A(r) - A((r - y)^+).
template <class A>
double window_moment(A&& antider, double alpha, double r, double y_lo)
{
    using boost::math::quadrature::gauss_kronrod;
    const double Ar = antider(r);
    double tail = 0.0;
    if (y_lo < r) tail = Ar * Ar * alpha * std::pow(r, -alpha - 1.0);
    else return Ar * Ar * alpha * std::pow(y_lo, -alpha - 1.0);
    // y = r w^{1/(1-alpha)} turns y^{-alpha} dy into a constant multiple of dw
    const double pw = 1.0 / (1.0 - alpha);
    const double w_lo = y_lo > 0.0 ? std::pow(y_lo / r, 1.0 - alpha) : 0.0;
    auto g = [&](double w) {
        if (w <= 0.0) {
            return 0.0;
        }
        const double y = r * std::pow(w, pw);
        const double dq = (Ar - antider(std::max(0.0, r - y))) / y;
        return dq * dq;
    };
    const double body = gauss_kronrod<double, 15>::integrate(g, w_lo, 1.0, 5, 1e-8);
    return tail + alpha * (1.0 + alpha) * pw * std::pow(r, 1.0 - alpha) * body;
}

template <class A>
double budget_part(A&& antider, double alpha, double t, double y_lo)
{
    using boost::math::quadrature::gauss_kronrod;
    // r = t v^{1/alpha} absorbs the r^{alpha-1} behaviour at 0
    auto outer = [&](double v) {
        if (v <= 0.0) return 0.0;
        const double r = t * std::pow(v, 1.0 / alpha);
        const double jac = (t / alpha) * std::pow(v, 1.0 / alpha - 1.0);
        return window_moment(antider, alpha, r, y_lo) * jac;
    };
    return gauss_kronrod<double, 15>::integrate(outer, 0.0, 1.0, 6, 1e-8);
}

} // namespace detail

// int_0^t int_{y_lo}^inf (window integral)^2 nu_*(dy) ds for the f and K kernels.
inline VarianceBudget variance_budget(const LimitParams& p, double t, double y_lo = 0.0)
{
    require(t > 0.0, "variance_budget needs t > 0");
    require(y_lo >= 0.0, "y_lo must be >= 0");
    const auto ag = p.alpha_gamma();
    const double alpha = p.alpha;
    const double cK = ag.gamma / std::tgamma(alpha + 1.0);
    VarianceBudget out;
    out.t = t;
    out.f_part = detail::budget_part([&](double r) { return specfun::ml_cdf(ag, r); }, alpha, t, y_lo);
    out.k_part = detail::budget_part([&](double r) { return cK * std::pow(r, alpha); }, alpha, t, y_lo);
    return out;
}

} // namespace spikevol::sve
