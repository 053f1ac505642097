#pragma once

// Exact simulation of the marked Hawkes volatility model by thinning, the
// associated price process and the rescaled intensity.

#include <spikevol/ensemble.hpp>
#include <spikevol/errors.hpp>
#include <spikevol/grid.hpp>
#include <spikevol/parallel.hpp>
#include <spikevol/params.hpp>
#include <spikevol/rng.hpp>
#include <spikevol/specfun.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

namespace spikevol::hawkes {

struct MarketEvent {
    double time;
    double mark; // price mark, filled by simulate_price
};

struct LimitEvent {
    double time;
    double life;
};

struct EventLog {
    std::vector<MarketEvent> market;
    std::vector<LimitEvent> limit;
    double horizon = 0.0;

    bool operator==(const EventLog& o) const
    {
        if (horizon != o.horizon || market.size() != o.market.size() || limit.size() != o.limit.size()) return false;
        for (std::size_t i = 0; i < market.size(); ++i)
            if (market[i].time != o.market[i].time || market[i].mark != o.market[i].mark) return false;
        for (std::size_t i = 0; i < limit.size(); ++i)
            if (limit[i].time != o.limit[i].time || limit[i].life != o.limit[i].life) return false;
        return true;
    }
};

enum class StateChange { market, limit, expiry };

struct EventValue {
    double time;
    double left;
    double right;
    StateChange kind;
};

struct IntensityPath {
    std::vector<double> times;  // sample nodes
    std::vector<double> values; // V at the sample nodes
    std::vector<EventValue> events;
};

class ExplosionGuard : public RuntimeFailure {
public:
    ExplosionGuard(const std::string& what, EventLog partial) : RuntimeFailure(what), partial(std::move(partial)) {}
    EventLog partial;
};

struct SimOptions {
    long long max_events = 10'000'000;
    std::optional<UniformGrid> sample_grid;
    bool record_event_values = true;
};

struct HawkesRun {
    EventLog log;
    IntensityPath path;
    long long candidates = 0;
};

namespace detail {

// Intensity from the event log: sum over market events of zeta_m phi, plus
// zeta_l times the number of limit events alive. Left limit by default.
inline double intensity(const EventLog& log, const PrelimitCharacteristics& c, double t, bool right)
{
    double v = c.mu_n + c.v0n * std::pow(1.0 + t, -c.alpha);
    if (c.zeta_m > 0.0) {
        double s = 0.0;
        for (const auto& e : log.market) {
            if (e.time > t || (!right && e.time == t)) break;
            s += std::pow(1.0 + (t - e.time), -c.alpha - 1.0);
        }
        v += c.zeta_m * c.alpha * s;
    }
    if (c.zeta_l > 0.0) {
        long long alive = 0;
        for (const auto& e : log.limit) {
            if (e.time > t || (!right && e.time == t)) break;
            const double end = e.time + e.life;
            if (right ? end > t : end >= t) ++alive;
        }
        v += c.zeta_l * static_cast<double>(alive);
    }
    return v;
}

} // namespace detail

inline double intensity_at(const EventLog& log, const PrelimitCharacteristics& c, double t)
{
    require(t >= 0.0 && t <= log.horizon, "intensity_at: t outside the horizon");
    return detail::intensity(log, c, t, false);
}

inline double intensity_right(const EventLog& log, const PrelimitCharacteristics& c, double t)
{
    require(t >= 0.0 && t <= log.horizon, "intensity_right: t outside the horizon");
    return detail::intensity(log, c, t, true);
}

// Ogata thinning. Between state changes V only decreases, so the value
// right after the last change bounds it; a rejection at s tightens the
// bound to V(s); life expiries are processed as state changes.
inline HawkesRun simulate_hawkes(const PrelimitCharacteristics& c, double T, std::uint64_t seed,
                                 std::uint64_t path_index = 0, const SimOptions& opt = {})
{
    c.validate();
    require(std::isfinite(T) && T > 0.0, "simulate_hawkes: T must be > 0");
    rng::Stream rs(seed, path_index, rng::hawkes_events);
    HawkesRun run;
    run.log.horizon = T;
    const double lm = c.lambda_m;
    const double ll = c.alpha * c.lambda_l;
    const double rate_factor = lm + ll;
    const double p_market = rate_factor > 0.0 ? lm / rate_factor : 0.0;

    std::priority_queue<double, std::vector<double>, std::greater<>> expiries;
    long long alive = 0;
    const double phi_c = c.zeta_m * c.alpha;
    const double ex = -c.alpha - 1.0;

    auto market_sum = [&](double t) {
        double s = 0.0;
        for (const auto& e : run.log.market) s += std::pow(1.0 + (t - e.time), ex);
        return s;
    };
    auto value = [&](double t) {
        double v = c.mu_n + c.v0n * std::pow(1.0 + t, -c.alpha) + c.zeta_l * static_cast<double>(alive);
        if (phi_c > 0.0 && !run.log.market.empty()) v += phi_c * market_sum(t);
        return v;
    };

    double s = 0.0;
    double bound = value(0.0);
    long long events = 0;
    while (true) {
        if (!(bound > 0.0) || rate_factor <= 0.0) break;
        const double cand = s + rs.exponential() / (rate_factor * bound);
        const double next_exp = expiries.empty() ? std::numeric_limits<double>::infinity() : expiries.top();
        if (next_exp <= cand && next_exp <= T) {
            const double left = value(next_exp);
            s = next_exp;
            while (!expiries.empty() && expiries.top() <= s) {
                expiries.pop();
                --alive;
            }
            bound = value(s);
            if (opt.record_event_values) run.path.events.push_back({s, left, bound, StateChange::expiry});
            continue;
        }
        if (cand > T) break;
        s = cand;
        ++run.candidates;
        const double v = value(s);
        if (rs.uniform() * bound <= v) {
            if (++events > opt.max_events) throw ExplosionGuard("explosion guard: event cap exceeded", run.log);
            StateChange kind;
            if (rs.uniform() < p_market) {
                run.log.market.push_back({s, 0.0});
                kind = StateChange::market;
            } else {
                const double life = specfun::sample_lifetime(c.alpha, rs.uniform());
                run.log.limit.push_back({s, life});
                expiries.push(s + life);
                ++alive;
                kind = StateChange::limit;
            }
            bound = value(s);
            if (opt.record_event_values) run.path.events.push_back({s, v, bound, kind});
        } else {
            bound = v;
        }
    }

    if (opt.sample_grid) {
        const auto& g = *opt.sample_grid;
        require(g.T <= T * (1.0 + 1e-12), "sample grid extends beyond the horizon");
        run.path.times = grid_times(g);
        run.path.values.resize(run.path.times.size());
        for (std::size_t i = 0; i < run.path.times.size(); ++i)
            run.path.values[i] = detail::intensity(run.log, c, std::min(run.path.times[i], T), true);
    }
    return run;
}

// V^{(n)}(t) = V_n(n t) / n^{2 alpha - 1} on the output grid, reconstructed from the log.
inline IntensityPath rescale_path(const EventLog& log, const PrelimitCharacteristics& c, const UniformGrid& out)
{
    const double nd = static_cast<double>(c.n);
    if (log.horizon < nd * out.T * (1.0 - 1e-12))
        throw InsufficientHorizon("rescale_path: horizon shorter than n*T");
    IntensityPath p;
    p.times = grid_times(out);
    p.values.resize(p.times.size());
    const double scale = 1.0 / c.amplitude_scale();
    for (std::size_t i = 0; i < p.times.size(); ++i)
        p.values[i] = scale * detail::intensity(log, c, std::min(nd * p.times[i], log.horizon), true);
    return p;
}

// Same transform applied to an already sampled path whose nodes contain n t_i.
inline IntensityPath rescale_path(const IntensityPath& path, long long n, double alpha, const UniformGrid& out)
{
    require(n >= 1, "n must be >= 1");
    const double nd = static_cast<double>(n);
    if (path.times.empty() || path.times.back() < nd * out.T * (1.0 - 1e-12))
        throw InsufficientHorizon("rescale_path: sampled path does not cover n*T");
    IntensityPath p;
    p.times = grid_times(out);
    p.values.resize(p.times.size());
    const double scale = std::pow(nd, 1.0 - 2.0 * alpha);
    std::size_t j = 0;
    for (std::size_t i = 0; i < p.times.size(); ++i) {
        const double target = nd * p.times[i];
        while (j < path.times.size() && path.times[j] < target * (1.0 - 1e-12) - 1e-300) ++j;
        if (j >= path.times.size() || std::abs(path.times[j] - target) > 1e-9 * std::max(1.0, target))
            throw GridMismatch("rescale_path: sample grid does not contain n*t");
        p.values[i] = scale * path.values[j];
    }
    return p;
}

// ---------------------------------------------------------------- price --

struct MarkLaw {
    enum class Kind { two_point, gaussian } kind = Kind::two_point;
    double scale = 1.0; // delta for two_point, sigma for gaussian

    double second_moment() const { return scale * scale; }
};

struct PricePath {
    double p0 = 0.0;
    std::vector<double> times;
    std::vector<double> levels; // P just after each market event

    double at(double t) const
    {
        const auto it = std::upper_bound(times.begin(), times.end(), t);
        if (it == times.begin()) return p0;
        return levels[static_cast<std::size_t>(it - times.begin() - 1)];
    }
};

inline PricePath simulate_price(EventLog& log, const MarkLaw& law, std::uint64_t seed, std::uint64_t path_index = 0,
                                double p0 = 0.0)
{
    require(law.scale >= 0.0, "mark scale must be >= 0");
    rng::Stream rs(seed, path_index, rng::price_marks);
    PricePath p;
    p.p0 = p0;
    double level = p0;
    for (auto& e : log.market) {
        double xi;
        if (law.kind == MarkLaw::Kind::two_point)
            xi = rs.uniform() < 0.5 ? -law.scale : law.scale;
        else
            xi = law.scale * rs.normal();
        e.mark = xi;
        level += xi;
        p.times.push_back(e.time);
        p.levels.push_back(level);
    }
    return p;
}

// Ensemble of V^{(n)} on the output grid [0, T]; each path runs on [0, nT].
inline EnsembleStats rescaled_ensemble(const PrelimitCharacteristics& c, const UniformGrid& out, long long paths,
                                       std::uint64_t seed, unsigned workers = 1, const SimOptions& opt = {})
{
    require(paths >= 1, "paths must be >= 1");
    const auto times = grid_times(out);
    SimOptions o = opt;
    o.record_event_values = false;
    o.sample_grid.reset();
    const double horizon = static_cast<double>(c.n) * out.T;
    auto acc = run_blocks(paths, times.size(), workers, [&](long long p, spikevol::detail::Accum& a) {
        const auto run = simulate_hawkes(c, horizon, seed, static_cast<std::uint64_t>(p), o);
        const auto rp = rescale_path(run.log, c, out);
        for (std::size_t i = 0; i < times.size(); ++i) {
            a.s1[i] += rp.values[i];
            a.s2[i] += rp.values[i] * rp.values[i];
        }
        a.market += static_cast<double>(run.log.market.size());
        a.limit += static_cast<double>(run.log.limit.size());
    });
    return spikevol::detail::finish(acc, times, paths);
}

// ------------------------------------------------- cluster cross-check --

// Event counts from the Poisson cluster (branching) representation of the
// same model: immigrants at rate (lambda_m + alpha lambda_l)(mu + Lambda),
// each event spawning offspring along its own impact. Used as an
// independent check of the thinning sampler.
inline EventLog simulate_cluster(const PrelimitCharacteristics& c, double T, std::uint64_t seed,
                                 std::uint64_t path_index = 0, long long max_events = 10'000'000)
{
    c.validate();
    rng::Stream rs(seed, path_index, rng::branching);
    const double rate = c.lambda_m + c.alpha * c.lambda_l;
    const double p_market = rate > 0.0 ? c.lambda_m / rate : 0.0;
    const double a = c.alpha;
    EventLog log;
    log.horizon = T;
    std::vector<double> pending;
    // immigrants: homogeneous part and the decaying (1+t)^{-alpha} part
    for (long long k = rs.poisson(rate * c.mu_n * T); k > 0; --k) pending.push_back(rs.uniform() * T);
    const double cum_T = (std::pow(1.0 + T, 1.0 - a) - 1.0) / (1.0 - a);
    for (long long k = rs.poisson(rate * c.v0n * cum_T); k > 0; --k) {
        const double u = rs.uniform() * cum_T;
        pending.push_back(std::pow(1.0 + (1.0 - a) * u, 1.0 / (1.0 - a)) - 1.0);
    }
    long long events = 0;
    while (!pending.empty()) {
        const double t = pending.back();
        pending.pop_back();
        if (++events > max_events) throw ExplosionGuard("explosion guard: event cap exceeded", log);
        if (rs.uniform() < p_market) {
            log.market.push_back({t, 0.0});
            const double L = T - t;
            const double mass = 1.0 - std::pow(1.0 + L, -a);
            for (long long k = rs.poisson(rate * c.zeta_m * mass); k > 0; --k) {
                const double u = std::pow(1.0 - rs.uniform() * mass, -1.0 / a) - 1.0;
                pending.push_back(t + u);
            }
        } else {
            const double life = specfun::sample_lifetime(a, rs.uniform());
            log.limit.push_back({t, life});
            const double w = std::min(life, T - t);
            for (long long k = rs.poisson(rate * c.zeta_l * w); k > 0; --k) pending.push_back(t + rs.uniform() * w);
        }
    }
    auto by_time = [](const auto& x, const auto& y) { return x.time < y.time; };
    std::sort(log.market.begin(), log.market.end(), by_time);
    std::sort(log.limit.begin(), log.limit.end(), by_time);
    return log;
}

} // namespace spikevol::hawkes
