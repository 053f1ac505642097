#pragma once

// Command-line front end. Every flag --some-key has the config-file key
// some_key; values resolve as flag > file > default.

#include <spikevol/errors.hpp>
#include <spikevol/harness.hpp>
#include <spikevol/hawkes.hpp>
#include <spikevol/io.hpp>
#include <spikevol/riccati.hpp>
#include <spikevol/specfun.hpp>
#include <spikevol/sve.hpp>
#include <spikevol/volterra.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace spikevol::cli {

enum ExitCode { ok = 0, validation_error = 1, runtime_failure = 2 };

struct Key {
    std::string name;
    std::string fallback;
    std::string help;
};

// Keys that steer where and how a run executes but never enter the config hash.
inline bool is_execution_key(const std::string& k) { return k == "out_dir" || k == "workers"; }

inline std::string default_out_dir()
{
    const char* env = std::getenv("SPIKEVOL_OUT_DIR");
    return env && *env ? env : "out";
}

inline std::vector<Key> model_keys()
{
    return {{"alpha", "0.75", "kernel exponent in (1/2,1)"},
            {"a", "0.5", "mean-reversion level numerator"},
            {"b", "1", "mean-reversion speed"},
            {"v0", "1", "initial variance"},
            {"zeta_m_star", "1", "market mark scale"},
            {"lambda_m_star", "1", "market branching weight"},
            {"zeta_l_star", "0", "limit-order mark scale"},
            {"lambda_l_star", "0", "limit-order branching weight"},
            {"test_mode", "0", "1 skips the zeta/lambda normalisation check"}};
}

inline std::vector<Key> execution_keys()
{
    return {{"out_dir", default_out_dir(), "output directory (default from SPIKEVOL_OUT_DIR)"},
            {"workers", "1", "worker threads"}};
}

inline LimitParams model_from(const io::KeyValues& kv)
{
    LimitParams p;
    p.alpha = io::to_double("alpha", kv.at("alpha"));
    p.a = io::to_double("a", kv.at("a"));
    p.b = io::to_double("b", kv.at("b"));
    p.v0 = io::to_double("v0", kv.at("v0"));
    p.zeta_m_star = io::to_double("zeta_m_star", kv.at("zeta_m_star"));
    p.lambda_m_star = io::to_double("lambda_m_star", kv.at("lambda_m_star"));
    p.zeta_l_star = io::to_double("zeta_l_star", kv.at("zeta_l_star"));
    p.lambda_l_star = io::to_double("lambda_l_star", kv.at("lambda_l_star"));
    p.test_mode = io::to_int("test_mode", kv.at("test_mode")) != 0;
    p.validate();
    return p;
}

struct Context {
    io::KeyValues kv; // resolved values of every key of the subcommand
    std::filesystem::path out_dir;
    unsigned workers = 1;

    double d(const std::string& k) const { return io::to_double(k, kv.at(k)); }
    long long i(const std::string& k) const { return io::to_int(k, kv.at(k)); }
    std::uint64_t seed() const { return io::to_u64("seed", kv.at("seed")); }
    const std::string& s(const std::string& k) const { return kv.at(k); }
};

inline io::RunReport new_report(const std::string& kind, const Context& ctx, std::uint64_t seed)
{
    io::RunReport r;
    r.kind = kind;
    for (const auto& [k, v] : ctx.kv)
        if (!is_execution_key(k)) r.config[k] = v;
    r.config_hash = io::config_hash(r.config);
    r.seed = seed;
    return r;
}

// ---------------------------------------------------------- subcommands --

inline io::RunReport run_table(const Context& ctx)
{
    const double alpha = ctx.d("alpha");
    const specfun::AlphaGamma ag(alpha, ctx.d("gamma"));
    const double beta = ctx.d("beta");
    const std::string fn = ctx.s("function");
    std::function<double(double)> f;
    if (fn == "eval_ml") f = [&](double t) { return specfun::eval_ml(alpha, beta, t); };
    else if (fn == "ml_density") f = [&](double t) { return specfun::ml_density(ag, t); };
    else if (fn == "ml_density_weighted") f = [&](double t) { return specfun::ml_density_weighted(ag, t); };
    else if (fn == "ml_cdf") f = [&](double t) { return specfun::ml_cdf(ag, t); };
    else if (fn == "ml_cdf_integral") f = [&](double t) { return specfun::ml_cdf_integral(ag, t); };
    else if (fn == "kernel_k") f = [&](double t) { return specfun::kernel_k(ag, t); };
    else if (fn == "resolvent_first_kind") f = [&](double t) { return specfun::resolvent_first_kind(ag, t); };
    else if (fn == "hawkes_phi") f = [&](double t) { return specfun::hawkes_phi(alpha, t); };
    else if (fn == "hawkes_phi_integral") f = [&](double t) { return specfun::hawkes_phi_integral(alpha, t); };
    else if (fn == "lifetime_density") f = [&](double t) { return specfun::lifetime_density(alpha, t); };
    else if (fn == "lifetime_tail") f = [&](double t) { return specfun::lifetime_tail(alpha, t); };
    else if (fn == "limit_mark_density") f = [&](double t) { return specfun::limit_mark_density(alpha, t); };
    else if (fn == "limit_mark_tail") f = [&](double t) { return specfun::limit_mark_tail(alpha, t); };
    else throw DomainError("unknown function '" + fn + "'");
    const double t0 = ctx.d("t_min"), t1 = ctx.d("t");
    const long long N = ctx.i("n_steps");
    require(t1 > t0, "t must exceed t_min");
    require(N >= 1, "n_steps must be >= 1");
    auto r = new_report("table", ctx, 0);
    io::Table t{"table", {"t", "value"}, {}};
    long long skipped = 0;
    for (long long i = 0; i <= N; ++i) {
        const double x = i == N ? t1 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(N);
        try {
            t.add({io::num(x), io::num(f(x))});
        } catch (const DomainError&) {
            if (i != 0) throw;
            ++skipped; // singular at the left end
        }
    }
    r.tables = {t};
    r.summary = {{"function", fn}, {"skipped_points", std::to_string(skipped)}};
    return r;
}

inline io::RunReport run_resolvent(const Context& ctx)
{
    auto p = model_from(ctx.kv);
    const long long n = ctx.i("n");
    if (!ctx.s("beta").empty()) {
        const double beta = ctx.d("beta");
        require(beta >= 0.0 && beta < 1.0, "beta must lie in [0,1)");
        p.b = (1.0 - beta) * std::pow(static_cast<double>(n), p.alpha);
        p.validate();
    }
    const double T = ctx.d("t");
    const UniformGrid out(T, ctx.i("n_steps"));
    const auto c = characteristics_from_limit(p, n);
    const auto G = volterra::prelimit_grid(n, T, ctx.i("n_base"));
    const auto R = volterra::solve_prelimit_resolvent(c, G);
    const auto resc = volterra::rescaled_resolvent(R.R, n, p.alpha, out);
    const auto I = volterra::prelimit_mean(c, R.R, out);
    const auto m = volterra::limit_mean(p, out);
    const long long stride = volterra::detail::stride_for(G, out, n);
    auto r = new_report("resolvent", ctx, 0);
    io::Table t{"resolvent", {"t", "R_n", "R_scaled", "I_R_scaled", "I_n", "limit_mean"}, {}};
    double dn = 0.0;
    for (long long i = 0; i <= out.N; ++i) {
        const auto k = static_cast<std::size_t>(i);
        dn = std::max(dn, std::abs(I.values[k] - m.values[k]));
        t.add({io::num(out.t(i)), io::num(R.R.values[static_cast<std::size_t>(i * stride)]), io::num(resc.R.values[k]),
               io::num(resc.integral.values[k]), io::num(I.values[k]), io::num(m.values[k])});
    }
    r.tables = {t};
    r.summary = {{"beta_n", io::num(c.beta_n())},
                 {"resolvent_residual", io::num(R.residual)},
                 {"prelimit_grid_steps", std::to_string(G.N)},
                 {"sup_mean_gap", io::num(dn)}};
    return r;
}

inline io::RunReport run_hawkes(const Context& ctx)
{
    const auto p = model_from(ctx.kv);
    const long long n = ctx.i("n");
    const double T = ctx.d("t");
    const auto seed = ctx.seed();
    const UniformGrid out(T, ctx.i("n_steps"));
    const auto c = characteristics_from_limit(p, n);
    hawkes::MarkLaw law;
    const std::string mk = ctx.s("mark_law");
    if (mk == "gaussian") law.kind = hawkes::MarkLaw::Kind::gaussian;
    else if (mk != "two_point") throw DomainError("mark_law must be two_point or gaussian");
    law.scale = ctx.d("mark_scale");
    auto run = hawkes::simulate_hawkes(c, static_cast<double>(n) * T, seed, 0);
    hawkes::simulate_price(run.log, law, seed, 0);
    const auto path = hawkes::rescale_path(run.log, c, out);
    const auto st = hawkes::rescaled_ensemble(c, out, ctx.i("paths"), seed, ctx.workers);
    auto r = new_report("hawkes", ctx, seed);
    io::Table ev{"events", {"stream", "time", "mark"}, {}};
    for (const auto& e : run.log.market) ev.add({"market", io::num(e.time), io::num(e.mark)});
    for (const auto& e : run.log.limit) ev.add({"limit", io::num(e.time), io::num(e.life)});
    io::Table pt{"path", {"t", "V", "V_scaled"}, {}};
    for (std::size_t i = 0; i < path.times.size(); ++i)
        pt.add({io::num(path.times[i]), io::num(path.values[i] * c.amplitude_scale()), io::num(path.values[i])});
    io::Table en{"ensemble", {"t", "mean", "stderr"}, {}};
    for (std::size_t i = 0; i < st.times.size(); ++i)
        en.add({io::num(st.times[i]), io::num(st.mean[i]), io::num(st.stderr_[i])});
    r.tables = {ev, pt, en};
    r.seed_manifest = {{"hawkes_events", seed, ctx.i("paths")}, {"price_marks", seed, 1}};
    r.summary = {{"beta_n", io::num(c.beta_n())},
                 {"market_events", std::to_string(run.log.market.size())},
                 {"limit_events", std::to_string(run.log.limit.size())},
                 {"mean_market_events", io::num(st.mean_market_events)},
                 {"mean_limit_events", io::num(st.mean_limit_events)}};
    return r;
}

inline io::RunReport run_sve(const Context& ctx)
{
    const auto p = model_from(ctx.kv);
    const auto seed = ctx.seed();
    const UniformGrid grid(ctx.d("t"), ctx.i("n_steps"));
    sve::SchemeConfig sc;
    sc.y_min = ctx.d("y_min");
    sc.record_jumps = true;
    const std::string scheme = ctx.s("scheme");
    require(scheme == "eq1" || scheme == "eq2" || scheme == "both", "scheme must be eq1, eq2 or both");
    const auto tb = sve::prepare(p, grid, sc);
    const long long paths = ctx.i("paths");
    auto r = new_report("sve", ctx, seed);
    std::vector<std::pair<std::string, sve::Form>> forms;
    if (scheme != "eq2") forms.emplace_back("eq1", sve::Form::eq1);
    if (scheme != "eq1") forms.emplace_back("eq2", sve::Form::eq2);
    io::Table pt{"path", {"t"}, {}};
    std::vector<sve::SvePath> first;
    for (const auto& [name, form] : forms) {
        pt.header.push_back(forms.size() == 1 ? "V" : "V_" + name);
        first.push_back(sve::detail::simulate(*tb, form, seed, 0));
    }
    for (long long i = 0; i <= grid.N; ++i) {
        std::vector<std::string> row{io::num(grid.t(i))};
        for (const auto& fp : first) row.push_back(io::num(fp.values[static_cast<std::size_t>(i)]));
        pt.add(row);
    }
    io::Table jt{"jumps", {"s", "y"}, {}};
    for (const auto& j : first.front().jumps) jt.add({io::num(j.s), io::num(j.y)});
    r.tables = {pt, jt};
    for (std::size_t f = 0; f < forms.size(); ++f) {
        const auto ens = sve::ensemble(*tb, forms[f].second, paths, seed, ctx.workers);
        io::Table et{forms.size() == 1 ? "ensemble" : "ensemble_" + forms[f].first, {"t", "mean", "stderr", "m2"}, {}};
        for (std::size_t i = 0; i < ens.stats.times.size(); ++i)
            et.add({io::num(ens.stats.times[i]), io::num(ens.stats.mean[i]), io::num(ens.stats.stderr_[i]),
                    io::num(ens.stats.second_moment[i])});
        r.tables.push_back(et);
        const std::string pre = forms.size() == 1 ? "" : forms[f].first + "_";
        r.summary.emplace_back(pre + "clip_rate", io::num(ens.clip_fraction));
        r.summary.emplace_back(pre + "mean_jumps", io::num(ens.mean_jumps));
        r.summary.emplace_back(pre + "dropped_jump_variance", io::num(ens.mean_dropped_variance));
    }
    r.summary.emplace_back("y_min", io::num(tb->y_min));
    r.seed_manifest.push_back({"sve_brownian", seed, paths});
    if (p.c4() > 0.0) r.seed_manifest.push_back({"sve_jumps", seed, paths});
    return r;
}

// g is either a constant or a CSV file of (t, g) rows, linearly interpolated.
inline riccati::RiccatiInput riccati_input(const Context& ctx, const UniformGrid& grid)
{
    const double lambda = ctx.d("lambda");
    const std::string g = ctx.s("g");
    char* end = nullptr;
    const double gc = std::strtod(g.c_str(), &end);
    if (!g.empty() && end && *end == '\0') return riccati::RiccatiInput::constant(lambda, gc, grid.T);
    if (!std::filesystem::exists(g)) throw DomainError("g must be a number or an existing CSV file: " + g);
    const auto tab = io::from_csv("g", io::read_file(g));
    require(tab.rows.size() >= 2, "g file needs at least two rows");
    std::vector<double> ts, gs;
    for (const auto& row : tab.rows) {
        require(row.size() >= 2, "g file rows need t and g");
        ts.push_back(io::to_double("t", row[0]));
        gs.push_back(io::to_double("g", row[1]));
    }
    for (std::size_t i = 1; i < ts.size(); ++i) require(ts[i] > ts[i - 1], "g file times must increase");
    require(ts.front() <= 0.0 && ts.back() >= grid.T * (1.0 - 1e-12), "g file must cover [0, t]");
    std::vector<double> v(grid.size());
    for (long long i = 0; i <= grid.N; ++i) {
        const double t = grid.t(i);
        auto it = std::upper_bound(ts.begin(), ts.end(), t);
        std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - ts.begin(), 1)), ts.size() - 1);
        const double w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
        v[static_cast<std::size_t>(i)] = gs[k - 1] + std::clamp(w, 0.0, 1.0) * (gs[k] - gs[k - 1]);
    }
    return riccati::RiccatiInput::sampled(lambda, GridFunction(grid, std::move(v)));
}

inline io::RunReport run_riccati(const Context& ctx)
{
    const auto p = model_from(ctx.kv);
    const UniformGrid grid(ctx.d("t"), ctx.i("n_steps"));
    const auto in = riccati_input(ctx, grid);
    riccati::SolverOptions opt;
    opt.tol = ctx.d("tol");
    opt.max_iter = static_cast<int>(ctx.i("max_iter"));
    const auto sol = riccati::picard_solve(in, p, grid, opt);
    const auto lv = riccati::laplace_functional(sol, in, p);
    auto r = new_report("riccati", ctx, 0);
    io::Table t{"solution", {"t", "psi", "weighted_u", "Psi_cum"}, {}};
    for (long long i = 0; i <= grid.N; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const std::string psi = (i == 0 && sol.weighted_space) ? "inf" : io::num(sol.psi(i));
        const double w = sol.weighted_space ? sol.u[k] : std::pow(grid.t(i), 1.0 - p.alpha) * sol.u[k];
        t.add({io::num(grid.t(i)), psi, io::num(w), io::num(sol.Psi[k])});
    }
    r.tables = {t};
    r.summary = {{"iterations", std::to_string(sol.iterations)},
                 {"stages", std::to_string(sol.stages)},
                 {"final_increment", io::num(sol.final_increment)},
                 {"residual", io::num(sol.residual)},
                 {"max_bracket_violation", io::num(sol.max_bracket_violation)},
                 {"laplace_value", io::num(lv.value)},
                 {"exponent", io::num(lv.exponent)},
                 {"v0_part", io::num(lv.v0_part)},
                 {"drift_part", io::num(lv.drift_part)}};
    return r;
}

inline io::RunReport run_laplace(const Context& ctx)
{
    const auto p = model_from(ctx.kv);
    const auto seed = ctx.seed();
    const UniformGrid grid(ctx.d("t"), ctx.i("n_steps"));
    const auto in = riccati_input(ctx, grid);
    riccati::SolverOptions opt;
    opt.tol = ctx.d("tol");
    opt.max_iter = static_cast<int>(ctx.i("max_iter"));
    const auto sol = riccati::picard_solve(in, p, grid, opt);
    const auto lv = riccati::laplace_functional(sol, in, p);
    sve::SchemeConfig sc;
    sc.y_min = ctx.d("y_min");
    const auto tb = sve::prepare(p, grid, sc);
    const GridFunction g = in.g_constant ? GridFunction(grid, std::vector<double>(grid.size(), *in.g_constant))
                                         : *in.g_values;
    const long long paths = ctx.i("paths");
    const auto est = sve::laplace_mc(*tb, in.lambda, g, paths, seed, ctx.workers);
    auto r = new_report("laplace", ctx, seed);
    const bool inside = lv.value >= est.ci_lo && lv.value <= est.ci_hi;
    r.summary = {{"riccati_value", io::num(lv.value)},
                 {"iterations", std::to_string(sol.iterations)},
                 {"residual", io::num(sol.residual)},
                 {"mc_mean", io::num(est.mean)},
                 {"mc_stderr", io::num(est.stderr_)},
                 {"ci_lo", io::num(est.ci_lo)},
                 {"ci_hi", io::num(est.ci_hi)},
                 {"inside_ci", inside ? "1" : "0"},
                 {"clip_fraction", io::num(est.clip_fraction)},
                 {"dropped_jump_variance", io::num(est.mean_dropped_variance)},
                 {"y_min", io::num(tb->y_min)}};
    r.seed_manifest.push_back({"sve_brownian", seed, paths});
    if (p.c4() > 0.0) r.seed_manifest.push_back({"sve_jumps", seed, paths});
    return r;
}

inline io::RunReport run_study_command(const Context& ctx)
{
    harness::ExperimentConfig cfg;
    cfg.apply(ctx.kv);
    auto r = harness::run_study(cfg);
    return r;
}

// ------------------------------------------------------------- dispatch --

struct Command {
    std::string name;
    std::string description;
    std::vector<Key> keys;
    bool seeded = false; // seed drawn and recorded when absent
    std::function<io::RunReport(const Context&)> run;
};

inline std::vector<Command> commands()
{
    auto with = [](std::vector<Key> a, const std::vector<Key>& b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };
    const auto model = model_keys();
    const Key seed{"seed", "", "64-bit seed (drawn and recorded when absent)"};
    std::vector<Command> cs;
    cs.push_back({"table", "tabulate a special function to CSV (t, value)",
                  {{"function", "ml_cdf", "eval_ml, ml_density, ml_density_weighted, ml_cdf, ml_cdf_integral, kernel_k, "
                                          "resolvent_first_kind, hawkes_phi, hawkes_phi_integral, lifetime_density, "
                                          "lifetime_tail, limit_mark_density, limit_mark_tail"},
                   {"alpha", "0.75", "exponent"},
                   {"gamma", "1", "rate"},
                   {"beta", "1", "second Mittag-Leffler parameter (eval_ml)"},
                   {"t_min", "0", "left end"},
                   {"t", "10", "right end"},
                   {"n_steps", "1000", "intervals"}},
                  false, run_table});
    cs.push_back({"resolvent", "prelimit resolvent, its rescaling and the mean curves",
                  with(model, {{"beta", "", "branching ratio; overrides b"},
                               {"n", "10", "prelimit index"},
                               {"t", "1", "horizon"},
                               {"n_steps", "64", "output intervals (must divide n * n_base)"},
                               {"n_base", "64", "resolvent steps per unit prelimit time"}}),
                  false, run_resolvent});
    cs.push_back({"hawkes", "simulate the n-th Hawkes model",
                  with(model, {{"n", "10", "prelimit index"},
                               {"t", "1", "rescaled horizon"},
                               {"n_steps", "100", "sample-grid intervals"},
                               {"paths", "100", "ensemble size"},
                               {"mark_law", "two_point", "two_point or gaussian"},
                               {"mark_scale", "1", "price mark scale"},
                               seed}),
                  true, run_hawkes});
    cs.push_back({"sve", "simulate the stochastic Volterra equation",
                  with(model, {{"t", "1", "horizon"},
                               {"n_steps", "1024", "grid intervals"},
                               {"paths", "1000", "ensemble size"},
                               {"y_min", "0", "small-mark cutoff (0 selects 1e-3 t)"},
                               {"scheme", "eq1", "eq1, eq2 or both"},
                               seed}),
                  true, run_sve});
    cs.push_back({"riccati", "solve the Riccati-Volterra equation",
                  with(model, {{"lambda", "0.5", "terminal weight"},
                               {"g", "0.2", "running weight: constant or CSV file of (t, g)"},
                               {"t", "1", "horizon"},
                               {"n_steps", "1024", "grid intervals"},
                               {"tol", "1e-8", "Picard tolerance"},
                               {"max_iter", "200", "Picard iteration cap"}}),
                  false, run_riccati});
    cs.push_back({"laplace", "Laplace functional: Riccati value vs Monte Carlo",
                  with(model, {{"lambda", "0.5", "terminal weight"},
                               {"g", "0.2", "running weight: constant or CSV file of (t, g)"},
                               {"t", "1", "horizon"},
                               {"n_steps", "1024", "grid intervals"},
                               {"tol", "1e-8", "Picard tolerance"},
                               {"max_iter", "200", "Picard iteration cap"},
                               {"paths", "10000", "Monte Carlo paths"},
                               {"y_min", "0", "small-mark cutoff (0 selects 1e-3 t)"},
                               seed}),
                  true, run_laplace});
    const std::map<std::string, std::string> study_help{
        {"kind", "convergence, laplace, mean, equivalence, moments or holder"},
        {"n_ladder", "prelimit indices, strictly increasing"},
        {"t", "horizon"},
        {"t_ladder", "horizons for the moment study"},
        {"n_steps", "grid intervals"},
        {"n_steps_ladder", "grid intervals for the equivalence check"},
        {"n_base", "resolvent steps per unit prelimit time"},
        {"paths", "Monte Carlo paths (>= 100)"},
        {"seed", "64-bit seed (required)"},
        {"y_min", "small-mark cutoff (0 selects 1e-3 t)"},
        {"y_min_ladder", "cutoffs for the Laplace validation"},
        {"lambda_ladder", "terminal weights for the Laplace validation"},
        {"g_ladder", "constant running weights for the Laplace validation"},
        {"tol", "Picard tolerance"},
        {"mc_n_max", "largest n simulated in the convergence study"},
        {"hawkes_n", "mean study: also check the Hawkes mean at this n (0 skips)"},
        {"checkpoints", "checkpoint count for mean comparisons"}};
    std::vector<Key> study;
    for (const auto& [k, v] : harness::ExperimentConfig{}.to_key_values()) {
        std::string help;
        for (const auto& m : model_keys())
            if (m.name == k) help = m.help;
        if (auto it = study_help.find(k); it != study_help.end()) help = it->second;
        study.push_back({k, v, help});
    }
    cs.push_back({"study", "run an experiment campaign (seed required)", study, false, run_study_command});
    for (auto& c : cs) c.keys = with(c.keys, execution_keys());
    return cs;
}

inline std::string version_string()
{
    return std::string(io::code_version) + " (interface revision " + std::to_string(io::interface_revision) + ")";
}

inline std::string flag_of(const std::string& key)
{
    std::string f = key;
    std::replace(f.begin(), f.end(), '_', '-');
    return "--" + f;
}

// Writes a diagnostic JSON for a runtime failure and returns its path.
inline std::filesystem::path write_failure(const std::filesystem::path& out_dir, const std::string& kind,
                                           const io::KeyValues& kv, const std::string& what)
{
    io::KeyValues cfg;
    for (const auto& [k, v] : kv)
        if (!is_execution_key(k)) cfg[k] = v;
    nlohmann::ordered_json j;
    j["code_version"] = io::code_version;
    j["kind"] = kind;
    j["config_hash"] = io::config_hash(cfg);
    j["error"] = what;
    j["config"] = cfg;
    std::filesystem::create_directories(out_dir);
    const auto path = out_dir / ("failure-" + kind + "-" + io::config_hash(cfg) + ".json");
    std::ofstream(path, std::ios::binary) << j.dump(2) << "\n";
    return path;
}

inline int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                              std::ostream& err = std::cerr)
{
    CLI::App app{"spikevol: rough volatility with spikes"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);
    auto cs = commands();
    std::map<std::string, std::map<std::string, std::string>> store;
    std::map<std::string, std::map<std::string, CLI::Option*>> opts;
    std::map<std::string, std::string> config_files;
    for (const auto& c : cs) {
        auto* sub = app.add_subcommand(c.name, c.description);
        sub->add_option("--config", config_files[c.name], "key=value config file");
        for (const auto& k : c.keys) opts[c.name][k.name] = sub->add_option(flag_of(k.name), store[c.name][k.name], k.help);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return validation_error;
    }
    const Command* cmd = nullptr;
    for (const auto& c : cs)
        if (app.got_subcommand(c.name)) cmd = &c;

    Context ctx;
    try {
        io::KeyValues file;
        if (!config_files[cmd->name].empty()) file = io::load_key_values(config_files[cmd->name]);
        for (const auto& [k, v] : file) {
            const bool known = std::any_of(cmd->keys.begin(), cmd->keys.end(), [&](const Key& x) { return x.name == k; });
            if (!known) throw DomainError("unknown config key '" + k + "' for " + cmd->name);
        }
        for (const auto& k : cmd->keys) {
            std::string v = k.fallback;
            if (auto it = file.find(k.name); it != file.end()) v = it->second;
            if (opts[cmd->name][k.name]->count() > 0) v = store[cmd->name][k.name];
            ctx.kv[k.name] = v;
        }
        if (cmd->seeded && ctx.kv["seed"].empty()) {
            std::random_device rd;
            const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
            ctx.kv["seed"] = std::to_string(s);
            err << "seed " << s << " drawn and recorded\n";
        }
        ctx.out_dir = ctx.kv.at("out_dir");
        ctx.workers = static_cast<unsigned>(io::to_int("workers", ctx.kv.at("workers")));
        require(ctx.workers >= 1, "workers must be >= 1");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return validation_error;
    }
    try {
        const auto t0 = std::chrono::steady_clock::now();
        auto report = cmd->run(ctx);
        report.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const auto dir = io::persist(report, ctx.out_dir);
        out << dir.string() << "\n";
        for (const auto& v : report.verdicts)
            out << "criterion " << v.criterion << " " << (v.passed ? "PASS" : "FAIL") << (v.diagnostic ? " (diagnostic)" : "")
                << ": " << v.name << ": " << v.detail << "\n";
        return ok;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return validation_error;
    } catch (const std::exception& e) {
        std::filesystem::path where;
        try {
            where = write_failure(ctx.out_dir, cmd->name, ctx.kv, e.what());
        } catch (const std::exception&) {
        }
        err << "failure: " << e.what() << "\n";
        if (!where.empty()) err << "diagnostics: " << where.string() << "\n";
        return runtime_failure;
    }
}

} // namespace spikevol::cli
