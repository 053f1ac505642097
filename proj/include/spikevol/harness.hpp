#pragma once

// Experiment campaigns: each study turns an ExperimentConfig into a
// RunReport whose tables and verdicts depend only on (config, seed).

#include <spikevol/errors.hpp>
#include <spikevol/grid.hpp>
#include <spikevol/hawkes.hpp>
#include <spikevol/io.hpp>
#include <spikevol/parallel.hpp>
#include <spikevol/params.hpp>
#include <spikevol/riccati.hpp>
#include <spikevol/sve.hpp>
#include <spikevol/volterra.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spikevol::harness {

enum class Kind { convergence, laplace, mean, equivalence, moments, holder };

inline std::string to_string(Kind k)
{
    switch (k) {
    case Kind::convergence: return "convergence";
    case Kind::laplace: return "laplace";
    case Kind::mean: return "mean";
    case Kind::equivalence: return "equivalence";
    case Kind::moments: return "moments";
    case Kind::holder: return "holder";
    }
    return "?";
}

inline Kind kind_from_string(const std::string& s)
{
    for (Kind k : {Kind::convergence, Kind::laplace, Kind::mean, Kind::equivalence, Kind::moments, Kind::holder})
        if (to_string(k) == s) return k;
    throw DomainError("unknown experiment kind '" + s +
                      "' (expected convergence, laplace, mean, equivalence, moments or holder)");
}

struct ExperimentConfig {
    Kind kind = Kind::mean;
    LimitParams model;
    std::vector<long long> n_ladder{10, 30, 100};
    double T = 1.0;
    std::vector<double> t_ladder{1.0, 2.0, 4.0};
    long long n_steps = 1024;
    std::vector<long long> n_steps_ladder{512, 1024, 2048};
    long long n_base = 64;        // prelimit resolvent nodes per unit of prelimit time
    long long paths = 1000;
    std::optional<std::uint64_t> seed;
    double y_min = 0.0;           // 0 selects 1e-3 T
    std::vector<double> y_min_ladder;
    std::vector<double> lambda_ladder{0.5};
    std::vector<double> g_ladder{0.2};
    double tol = 1e-8;
    long long mc_n_max = 100;     // MC columns of the convergence study only for n <= mc_n_max
    long long hawkes_n = 0;       // mean study: also check the Hawkes mean at this n
    long long checkpoints = 20;
    std::string out_dir = "out";
    unsigned workers = 1;

    // Keys that define the experiment; out_dir and workers are excluded.
    io::KeyValues to_key_values() const
    {
        auto list = [](const auto& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) s += ",";
                if constexpr (std::is_same_v<std::decay_t<decltype(v[0])>, double>) s += io::num(v[i]);
                else s += std::to_string(v[i]);
            }
            return s;
        };
        io::KeyValues kv;
        kv["kind"] = to_string(kind);
        kv["alpha"] = io::num(model.alpha);
        kv["a"] = io::num(model.a);
        kv["b"] = io::num(model.b);
        kv["v0"] = io::num(model.v0);
        kv["zeta_m_star"] = io::num(model.zeta_m_star);
        kv["lambda_m_star"] = io::num(model.lambda_m_star);
        kv["zeta_l_star"] = io::num(model.zeta_l_star);
        kv["lambda_l_star"] = io::num(model.lambda_l_star);
        kv["test_mode"] = model.test_mode ? "1" : "0";
        kv["n_ladder"] = list(n_ladder);
        kv["t"] = io::num(T);
        kv["t_ladder"] = list(t_ladder);
        kv["n_steps"] = std::to_string(n_steps);
        kv["n_steps_ladder"] = list(n_steps_ladder);
        kv["n_base"] = std::to_string(n_base);
        kv["paths"] = std::to_string(paths);
        kv["seed"] = seed ? std::to_string(*seed) : "";
        kv["y_min"] = io::num(y_min);
        kv["y_min_ladder"] = list(y_min_ladder);
        kv["lambda_ladder"] = list(lambda_ladder);
        kv["g_ladder"] = list(g_ladder);
        kv["tol"] = io::num(tol);
        kv["mc_n_max"] = std::to_string(mc_n_max);
        kv["hawkes_n"] = std::to_string(hawkes_n);
        kv["checkpoints"] = std::to_string(checkpoints);
        return kv;
    }

    // Applies the recognised keys of kv on top of the current values.
    void apply(const io::KeyValues& kv)
    {
        auto dlist = [](const std::string& k, const std::string& v) {
            std::vector<double> out;
            for (const auto& s : io::split_list(v)) out.push_back(io::to_double(k, s));
            return out;
        };
        auto ilist = [](const std::string& k, const std::string& v) {
            std::vector<long long> out;
            for (const auto& s : io::split_list(v)) out.push_back(io::to_int(k, s));
            return out;
        };
        for (const auto& [k, v] : kv) {
            if (k == "kind") kind = kind_from_string(v);
            else if (k == "alpha") model.alpha = io::to_double(k, v);
            else if (k == "a") model.a = io::to_double(k, v);
            else if (k == "b") model.b = io::to_double(k, v);
            else if (k == "v0") model.v0 = io::to_double(k, v);
            else if (k == "zeta_m_star") model.zeta_m_star = io::to_double(k, v);
            else if (k == "lambda_m_star") model.lambda_m_star = io::to_double(k, v);
            else if (k == "zeta_l_star") model.zeta_l_star = io::to_double(k, v);
            else if (k == "lambda_l_star") model.lambda_l_star = io::to_double(k, v);
            else if (k == "test_mode") model.test_mode = io::to_int(k, v) != 0;
            else if (k == "n_ladder") n_ladder = ilist(k, v);
            else if (k == "t") T = io::to_double(k, v);
            else if (k == "t_ladder") t_ladder = dlist(k, v);
            else if (k == "n_steps") n_steps = io::to_int(k, v);
            else if (k == "n_steps_ladder") n_steps_ladder = ilist(k, v);
            else if (k == "n_base") n_base = io::to_int(k, v);
            else if (k == "paths") paths = io::to_int(k, v);
            else if (k == "seed") seed = v.empty() ? std::nullopt : std::optional<std::uint64_t>(io::to_u64(k, v));
            else if (k == "y_min") y_min = io::to_double(k, v);
            else if (k == "y_min_ladder") y_min_ladder = dlist(k, v);
            else if (k == "lambda_ladder") lambda_ladder = dlist(k, v);
            else if (k == "g_ladder") g_ladder = dlist(k, v);
            else if (k == "tol") tol = io::to_double(k, v);
            else if (k == "mc_n_max") mc_n_max = io::to_int(k, v);
            else if (k == "hawkes_n") hawkes_n = io::to_int(k, v);
            else if (k == "checkpoints") checkpoints = io::to_int(k, v);
            else if (k == "out_dir") out_dir = v;
            else if (k == "workers") workers = static_cast<unsigned>(std::max(1LL, io::to_int(k, v)));
            else throw DomainError("unknown config key '" + k + "'");
        }
    }

    void validate() const
    {
        model.validate();
        require(seed.has_value(), "a seed is required for studies");
        auto increasing = [](const auto& v, const char* what) {
            for (std::size_t i = 1; i < v.size(); ++i)
                require(v[i] > v[i - 1], std::string(what) + " must be strictly increasing");
        };
        increasing(n_ladder, "n_ladder");
        increasing(t_ladder, "t_ladder");
        increasing(n_steps_ladder, "n_steps_ladder");
        require(paths >= 100, "paths must be >= 100");
        require(T > 0.0, "t must be > 0");
        require(n_steps >= 2, "n_steps must be >= 2");
        require(n_base >= 1, "n_base must be >= 1");
        require(tol > 0.0, "tol must be > 0");
        require(checkpoints >= 1 && checkpoints <= n_steps, "checkpoints must lie in [1, n_steps]");
        for (double y : y_min_ladder) require(y > 0.0 && y < T, "y_min_ladder entries must lie in (0, t)");
        for (double l : lambda_ladder) require(l >= 0.0, "lambda_ladder entries must be >= 0");
        for (double g : g_ladder) require(g >= 0.0, "g_ladder entries must be >= 0");
        for (long long n : n_ladder) require(n >= 1, "n_ladder entries must be >= 1");
    }
};

namespace detail {

inline io::RunReport start(const ExperimentConfig& cfg)
{
    cfg.validate();
    io::RunReport r;
    r.kind = to_string(cfg.kind);
    r.config = cfg.to_key_values();
    r.config_hash = io::config_hash(r.config);
    r.seed = *cfg.seed;
    return r;
}

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline std::string b(bool x) { return x ? "1" : "0"; }

// Node indices of `count` equally spaced checkpoints in (0, N].
inline std::vector<long long> checkpoint_nodes(long long N, long long count)
{
    std::vector<long long> out;
    for (long long c = 1; c <= count; ++c) out.push_back(c * N / count);
    return out;
}

inline double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Hawkes ensemble vs I^{(n)} on `count` checkpoints; appends rows, returns max |z|.
inline double hawkes_mean_rows(const ExperimentConfig& cfg, long long n, long long count, io::Table& t)
{
    while (count > 1 && (n * cfg.n_base) % count != 0) --count;
    const auto c = characteristics_from_limit(cfg.model, n);
    const UniformGrid out(cfg.T, count);
    const auto G = volterra::prelimit_grid(n, cfg.T, cfg.n_base);
    const auto R = volterra::solve_prelimit_resolvent(c, G);
    const auto I = volterra::prelimit_mean(c, R.R, out);
    const auto st = hawkes::rescaled_ensemble(c, out, cfg.paths, *cfg.seed, cfg.workers);
    double zmax = 0.0;
    for (long long i = 1; i <= out.N; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double z = st.stderr_[k] > 0.0 ? (st.mean[k] - I.values[k]) / st.stderr_[k] : 0.0;
        zmax = std::max(zmax, std::abs(z));
        t.add({std::to_string(n), io::num(out.t(i)), io::num(I.values[k]), io::num(st.mean[k]), io::num(st.stderr_[k]),
               io::num(z)});
    }
    return zmax;
}

} // namespace detail

// d_n = sup |I^{(n)} - limit_mean| over the n-ladder, with MC means of V^{(n)}.
inline io::RunReport run_convergence_study(const ExperimentConfig& cfg)
{
    const auto t0 = detail::Clock::now();
    auto r = detail::start(cfg);
    io::Table conv{"convergence", {"n", "beta_n", "d_n", "mc_max_abs_z"}, {}};
    io::Table mc{"mc_means", {"n", "t", "prelimit_mean", "mc_mean", "mc_stderr", "z"}, {}};
    const UniformGrid out(cfg.T, cfg.n_base);
    const auto m = volterra::limit_mean(cfg.model, out);
    std::vector<double> d;
    bool mc_ok = true;
    bool any_mc = false;
    for (long long n : cfg.n_ladder) {
        const auto c = characteristics_from_limit(cfg.model, n);
        const auto G = volterra::prelimit_grid(n, cfg.T, cfg.n_base);
        const auto R = volterra::solve_prelimit_resolvent(c, G);
        const auto I = volterra::prelimit_mean(c, R.R, out);
        double dn = 0.0;
        for (std::size_t i = 0; i < I.values.size(); ++i) dn = std::max(dn, std::abs(I.values[i] - m.values[i]));
        d.push_back(dn);
        std::string zcell = "";
        if (n <= cfg.mc_n_max) {
            const double z = detail::hawkes_mean_rows(cfg, n, 10, mc);
            zcell = io::num(z);
            mc_ok = mc_ok && z <= 3.0;
            any_mc = true;
        }
        conv.add({std::to_string(n), io::num(c.beta_n()), io::num(dn), zcell});
    }
    bool dec = true, strict = true;
    for (std::size_t i = 1; i < d.size(); ++i) {
        dec = dec && d[i] <= 1.1 * d[i - 1];
        strict = strict && d[i] < d[i - 1];
    }
    r.tables = {conv, mc};
    r.verdicts.push_back({5, "prelimit mean converges to the limit mean", dec, false,
                          std::string("d_n non-increasing within 10% slack; strictly decreasing: ") +
                              (strict ? "yes" : "no")});
    if (any_mc) {
        r.verdicts.push_back({4, "Hawkes MC mean matches I^(n)", mc_ok, false, "all checkpoints within 3 SE"});
        r.seed_manifest.push_back({"hawkes_events", *cfg.seed, cfg.paths});
    }
    r.wall_clock = detail::seconds_since(t0);
    return r;
}

// Riccati Laplace functional vs MC exp-functional along eq1 paths.
inline io::RunReport run_laplace_validation(const ExperimentConfig& cfg)
{
    const auto t0 = detail::Clock::now();
    auto r = detail::start(cfg);
    const UniformGrid grid(cfg.T, cfg.n_steps);
    const bool spikes = cfg.model.c3() > 0.0 && cfg.model.c4() > 0.0;
    std::vector<double> ladder = cfg.y_min_ladder;
    if (ladder.empty() || !spikes) ladder = {cfg.y_min};
    std::sort(ladder.begin(), ladder.end(), std::greater<>());
    io::Table t{"laplace",
                {"lambda", "g", "y_min", "riccati", "iterations", "residual", "mc_mean", "mc_stderr", "ci_lo", "ci_hi",
                 "inside", "dropped_variance", "clip_fraction"},
                {}};
    long long finest_total = 0, finest_inside = 0;
    riccati::SolverOptions opt;
    opt.tol = cfg.tol;
    for (double lam : cfg.lambda_ladder) {
        for (double gc : cfg.g_ladder) {
            const auto input = riccati::RiccatiInput::constant(lam, gc, cfg.T);
            std::optional<riccati::LaplaceValue> det;
            riccati::RiccatiSolution sol;
            try {
                sol = riccati::picard_solve(input, cfg.model, grid, opt);
                det = riccati::laplace_functional(sol, input, cfg.model);
            } catch (const ConvergenceError&) {
            }
            for (std::size_t k = 0; k < ladder.size(); ++k) {
                const bool finest = k + 1 == ladder.size();
                sve::SchemeConfig sc;
                sc.y_min = ladder[k];
                sve::LaplaceEstimate est;
                if (lam == 0.0 && gc == 0.0) {
                    est.mean = est.ci_lo = est.ci_hi = 1.0;
                    est.paths = cfg.paths;
                } else {
                    const auto tb = sve::prepare(cfg.model, grid, sc);
                    const GridFunction g(grid, std::vector<double>(grid.size(), gc));
                    est = sve::laplace_mc(*tb, lam, g, cfg.paths, *cfg.seed, cfg.workers);
                }
                const bool inside = det && det->value >= est.ci_lo && det->value <= est.ci_hi;
                if (finest) {
                    ++finest_total;
                    finest_inside += inside ? 1 : 0;
                }
                t.add({io::num(lam), io::num(gc), io::num(sc.effective_y_min(cfg.T)), det ? io::num(det->value) : "nan",
                       det ? std::to_string(sol.iterations) : "", det ? io::num(sol.residual) : "", io::num(est.mean),
                       io::num(est.stderr_), io::num(est.ci_lo), io::num(est.ci_hi), detail::b(inside),
                       io::num(est.mean_dropped_variance), io::num(est.clip_fraction)});
            }
        }
    }
    const bool ok = finest_total > 0 && static_cast<double>(finest_inside) >= 0.9 * static_cast<double>(finest_total);
    r.tables = {t};
    r.verdicts.push_back({9, "Laplace functional inside the 95% MC interval", ok, false,
                          std::to_string(finest_inside) + " of " + std::to_string(finest_total) +
                              " inputs inside at the finest y_min"});
    r.seed_manifest.push_back({"sve_brownian", *cfg.seed, cfg.paths});
    if (spikes) r.seed_manifest.push_back({"sve_jumps", *cfg.seed, cfg.paths});
    r.wall_clock = detail::seconds_since(t0);
    return r;
}

// Coupled eq1/eq2 paths under grid refinement.
inline io::RunReport run_equivalence_check(const ExperimentConfig& cfg)
{
    const auto t0 = detail::Clock::now();
    auto r = detail::start(cfg);
    io::Table t{"equivalence", {"n_steps", "median_sup_diff", "mean_sup_diff", "ratio"}, {}};
    double prev = 0.0;
    bool ok = cfg.n_steps_ladder.size() >= 2;
    for (long long N : cfg.n_steps_ladder) {
        const UniformGrid grid(cfg.T, N);
        sve::SchemeConfig sc;
        sc.y_min = cfg.y_min;
        const auto tb = sve::prepare(cfg.model, grid, sc);
        std::vector<double> diff(static_cast<std::size_t>(cfg.paths));
        parallel_for(diff.size(), cfg.workers, [&](std::size_t i) {
            const auto a = sve::simulate_eq1(*tb, *cfg.seed, i);
            const auto e = sve::simulate_eq2(*tb, *cfg.seed, i);
            double m = 0.0;
            for (std::size_t k = 0; k < a.raw.size(); ++k) m = std::max(m, std::abs(a.raw[k] - e.raw[k]));
            diff[i] = m;
        });
        double mean = 0.0;
        for (double x : diff) mean += x;
        mean /= static_cast<double>(diff.size());
        const double med = detail::median(diff);
        std::string ratio = "";
        if (prev > 0.0) {
            ratio = io::num(prev / med);
            ok = ok && prev / med >= 1.5;
        }
        t.add({std::to_string(N), io::num(med), io::num(mean), ratio});
        prev = med;
    }
    r.tables = {t};
    r.verdicts.push_back({7, "eq1 and eq2 coupled paths converge together", ok, false,
                          "median sup-difference shrinks by >= 1.5 per halving of h"});
    r.seed_manifest.push_back({"sve_brownian", *cfg.seed, cfg.paths});
    if (cfg.model.c4() > 0.0) r.seed_manifest.push_back({"sve_jumps", *cfg.seed, cfg.paths});
    r.wall_clock = detail::seconds_since(t0);
    return r;
}

// SVE ensemble mean vs limit_mean, optionally the Hawkes mean identity.
inline io::RunReport run_mean_study(const ExperimentConfig& cfg)
{
    const auto t0 = detail::Clock::now();
    auto r = detail::start(cfg);
    const UniformGrid grid(cfg.T, cfg.n_steps);
    sve::SchemeConfig sc;
    sc.y_min = cfg.y_min;
    const auto tb = sve::prepare(cfg.model, grid, sc);
    const auto ens = sve::ensemble(*tb, sve::Form::eq1, cfg.paths, *cfg.seed, cfg.workers);
    io::Table t{"sve_mean", {"t", "limit_mean", "mc_mean", "mc_stderr", "z"}, {}};
    double zmax = 0.0;
    for (long long i : detail::checkpoint_nodes(grid.N, cfg.checkpoints)) {
        const auto k = static_cast<std::size_t>(i);
        const double se = ens.stats.stderr_[k];
        const double z = se > 0.0 ? (ens.stats.mean[k] - tb->mean[k]) / se : 0.0;
        zmax = std::max(zmax, std::abs(z));
        t.add({io::num(grid.t(i)), io::num(tb->mean[k]), io::num(ens.stats.mean[k]), io::num(se), io::num(z)});
    }
    io::Table diag{"sve_diagnostics", {"clip_fraction", "mean_jumps", "mean_dropped_variance"}, {}};
    diag.add({io::num(ens.clip_fraction), io::num(ens.mean_jumps), io::num(ens.mean_dropped_variance)});
    r.tables = {t, diag};
    r.verdicts.push_back({6, "SVE ensemble mean matches limit_mean", zmax <= 3.0, false,
                          "max |z| = " + io::num(zmax) + " over " + std::to_string(cfg.checkpoints) + " checkpoints"});
    r.seed_manifest.push_back({"sve_brownian", *cfg.seed, cfg.paths});
    if (cfg.model.c4() > 0.0) r.seed_manifest.push_back({"sve_jumps", *cfg.seed, cfg.paths});
    if (cfg.hawkes_n > 0) {
        io::Table h{"hawkes_mean", {"n", "t", "prelimit_mean", "mc_mean", "mc_stderr", "z"}, {}};
        const double hz = detail::hawkes_mean_rows(cfg, cfg.hawkes_n, 10, h);
        r.tables.push_back(h);
        r.verdicts.push_back({4, "Hawkes MC mean matches I^(n)", hz <= 3.0, false,
                              "max |z| = " + io::num(hz) + " over 10 checkpoints"});
        r.seed_manifest.push_back({"hawkes_events", *cfg.seed, cfg.paths});
    }
    r.wall_clock = detail::seconds_since(t0);
    return r;
}

// Default lags: roughly geometric node lags inside (2h, T/10).
inline std::vector<long long> default_lags(const UniformGrid& g)
{
    std::vector<long long> lags;
    const long long hi = static_cast<long long>(std::ceil(static_cast<double>(g.N) / 10.0)) - 1;
    for (long long l = 3; l <= hi; l = std::max(l + 1, static_cast<long long>(std::llround(l * 1.5))))
        lags.push_back(l);
    return lags;
}

// Second-moment growth over the T-ladder, prelimit growth constants, the
// Hölder exponent and a modulus-of-continuity table.
inline io::RunReport run_moment_and_holder(const ExperimentConfig& cfg)
{
    const auto t0 = detail::Clock::now();
    auto r = detail::start(cfg);
    const double alpha = cfg.model.alpha;
    sve::SchemeConfig sc;
    sc.y_min = cfg.y_min;
    if (cfg.kind != Kind::holder) {
        require(cfg.t_ladder.size() >= 3, "t_ladder needs at least 3 points");
        io::Table m{"moments", {"T", "n_steps", "sup_second_moment", "fitted_c"}, {}};
        std::vector<double> lx, ly, sup2;
        for (double T : cfg.t_ladder) {
            const auto N = std::max<long long>(2, std::llround(static_cast<double>(cfg.n_steps) * T / cfg.T));
            const UniformGrid grid(T, N);
            const auto tb = sve::prepare(cfg.model, grid, sc);
            const auto ens = sve::ensemble(*tb, sve::Form::eq1, cfg.paths, *cfg.seed, cfg.workers);
            const double s2 = *std::max_element(ens.stats.second_moment.begin(), ens.stats.second_moment.end());
            sup2.push_back(s2);
            lx.push_back(std::log1p(T));
            ly.push_back(std::log(s2));
        }
        const auto fit = sve::detail::fit_line(lx, ly);
        std::vector<double> cs;
        for (std::size_t i = 0; i < sup2.size(); ++i) {
            const double c = sup2[i] / std::pow(1.0 + cfg.t_ladder[i], fit.slope);
            cs.push_back(c);
            const auto N = std::max<long long>(2, std::llround(static_cast<double>(cfg.n_steps) * cfg.t_ladder[i] / cfg.T));
            m.add({io::num(cfg.t_ladder[i]), std::to_string(N), io::num(sup2[i]), io::num(c)});
        }
        const double spread = volterra::detail::spread(cs);
        const bool ok = fit.slope <= 2.0 * alpha + 0.2 && spread <= 2.0;
        io::Table growth{"prelimit_growth", {"n", "c_resolvent", "c_derivative", "c_lp", "c_integral"}, {}};
        std::vector<volterra::GrowthMember> fam;
        for (long long n : cfg.n_ladder) {
            const auto c = characteristics_from_limit(cfg.model, n);
            const auto G = volterra::prelimit_grid(n, cfg.T, cfg.n_base);
            fam.push_back({n, volterra::solve_prelimit_resolvent(c, G).R});
        }
        std::string gdetail = "";
        if (!fam.empty()) {
            const auto rep = volterra::verify_growth_bounds(fam, alpha, 1.5 + alpha, UniformGrid(cfg.T, cfg.n_base));
            for (const auto& row : rep.rows)
                growth.add({std::to_string(row.n), io::num(row.c_resolvent), io::num(row.c_derivative),
                            io::num(row.c_lp), io::num(row.c_integral)});
            gdetail = std::string("; prelimit constants stable within factor 2: ") + (rep.stable ? "yes" : "no");
        }
        r.tables.push_back(m);
        r.tables.push_back(growth);
        r.verdicts.push_back({10, "moment growth", ok, true,
                              "log-slope " + io::num(fit.slope) + " (bound " + io::num(2.0 * alpha + 0.2) +
                                  "), fitted-constant spread " + io::num(spread) + gdetail});
    }
    if (cfg.kind != Kind::moments) {
        const UniformGrid grid(cfg.T, cfg.n_steps);
        const auto tb = sve::prepare(cfg.model, grid, sc);
        std::vector<sve::SvePath> paths(static_cast<std::size_t>(cfg.paths));
        parallel_for(paths.size(), cfg.workers, [&](std::size_t i) { paths[i] = sve::simulate_eq1(*tb, *cfg.seed, i); });
        const auto lags = default_lags(grid);
        const auto est = sve::holder_estimate(paths, lags);
        io::Table hold{"holder", {"exponent", "half_width", "lags"}, {}};
        std::string ls;
        for (std::size_t i = 0; i < lags.size(); ++i) ls += (i ? " " : "") + std::to_string(lags[i]);
        hold.add({io::num(est.exponent), io::num(est.half_width), ls});
        io::Table mod{"modulus", {"lag", "delta", "mean_max_increment"}, {}};
        for (long long l : lags) {
            double acc = 0.0;
            for (const auto& p : paths) {
                double mx = 0.0;
                for (std::size_t i = 0; i + static_cast<std::size_t>(l) < p.values.size(); ++i)
                    mx = std::max(mx, std::abs(p.values[i + static_cast<std::size_t>(l)] - p.values[i]));
                acc += mx;
            }
            mod.add({std::to_string(l), io::num(static_cast<double>(l) * grid.h()), io::num(acc / static_cast<double>(paths.size()))});
        }
        r.tables.push_back(hold);
        r.tables.push_back(mod);
        const bool ok = est.exponent >= 0.10 && est.exponent <= 0.40;
        r.verdicts.push_back({11, "Hölder exponent", ok, true,
                              "estimate " + io::num(est.exponent) + " +- " + io::num(est.half_width) +
                                  ", expected range [0.10, 0.40]"});
    }
    r.seed_manifest.push_back({"sve_brownian", *cfg.seed, cfg.paths});
    if (cfg.model.c4() > 0.0) r.seed_manifest.push_back({"sve_jumps", *cfg.seed, cfg.paths});
    r.wall_clock = detail::seconds_since(t0);
    return r;
}

inline io::RunReport run_study(const ExperimentConfig& cfg)
{
    switch (cfg.kind) {
    case Kind::convergence: return run_convergence_study(cfg);
    case Kind::laplace: return run_laplace_validation(cfg);
    case Kind::mean: return run_mean_study(cfg);
    case Kind::equivalence: return run_equivalence_check(cfg);
    case Kind::moments:
    case Kind::holder: return run_moment_and_holder(cfg);
    }
    throw DomainError("unknown experiment kind");
}

} // namespace spikevol::harness
