#pragma once

// Path-ensemble moments with a reduction order fixed by the path index.

#include <spikevol/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace spikevol {

struct EnsembleStats {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> stderr_;
    std::vector<double> second_moment;
    long long paths = 0;
    double mean_market_events = 0.0;
    double mean_limit_events = 0.0;
};

namespace detail {

struct Accum {
    std::vector<double> s1, s2;
    double market = 0.0, limit = 0.0;
    explicit Accum(std::size_t n = 0) : s1(n, 0.0), s2(n, 0.0) {}
    void add(const Accum& o)
    {
        for (std::size_t i = 0; i < s1.size(); ++i) {
            s1[i] += o.s1[i];
            s2[i] += o.s2[i];
        }
        market += o.market;
        limit += o.limit;
    }
};

inline EnsembleStats finish(const Accum& a, const std::vector<double>& times, long long paths)
{
    EnsembleStats st;
    st.times = times;
    st.paths = paths;
    const double P = static_cast<double>(paths);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double m = a.s1[i] / P;
        const double m2 = a.s2[i] / P;
        const double var = paths > 1 ? std::max(0.0, (m2 - m * m) * P / (P - 1.0)) : 0.0;
        st.mean.push_back(m);
        st.second_moment.push_back(m2);
        st.stderr_.push_back(std::sqrt(var / P));
    }
    st.mean_market_events = a.market / P;
    st.mean_limit_events = a.limit / P;
    return st;
}

} // namespace detail

inline constexpr long long ensemble_block = 64;

// Runs `paths` independent paths in fixed blocks and reduces the blocks in
// order, so the result does not depend on the worker count.
template <class PathFn>
detail::Accum run_blocks(long long paths, std::size_t width, unsigned workers, PathFn&& per_path)
{
    const long long blocks = (paths + ensemble_block - 1) / ensemble_block;
    std::vector<detail::Accum> parts(static_cast<std::size_t>(blocks), detail::Accum(width));
    parallel_for(static_cast<std::size_t>(blocks), workers, [&](std::size_t b) {
        auto& acc = parts[b];
        const long long lo = static_cast<long long>(b) * ensemble_block;
        const long long hi = std::min(paths, lo + ensemble_block);
        for (long long p = lo; p < hi; ++p) per_path(p, acc);
    });
    detail::Accum total(width);
    for (const auto& part : parts) total.add(part);
    return total;
}

} // namespace spikevol
