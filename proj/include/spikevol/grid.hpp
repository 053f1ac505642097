#pragma once

#include <spikevol/errors.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace spikevol {

struct UniformGrid {
    double T = 1.0;
    long long N = 2;

    UniformGrid() = default;
    UniformGrid(double horizon, long long steps) : T(horizon), N(steps)
    {
        require(std::isfinite(horizon) && horizon > 0.0, "grid horizon T must be > 0");
        require(steps >= 2, "grid needs at least 2 steps");
    }

    double h() const { return T / static_cast<double>(N); }
    double t(long long i) const { return i == N ? T : static_cast<double>(i) * h(); }
    std::size_t size() const { return static_cast<std::size_t>(N + 1); }
    bool operator==(const UniformGrid& o) const { return T == o.T && N == o.N; }
};

inline std::vector<double> grid_times(const UniformGrid& g)
{
    std::vector<double> t(g.size());
    for (long long i = 0; i <= g.N; ++i) t[static_cast<std::size_t>(i)] = g.t(i);
    return t;
}

// Function values on a grid. When `singular_exponent` rho < 0 is set the
// function behaves like t^rho near 0; values[0] then holds the finite limit
// of t^{-rho} f(t) and values[i], i >= 1, hold plain f(t_i).
struct GridFunction {
    UniformGrid grid;
    std::vector<double> values;
    std::optional<double> singular_exponent;

    GridFunction() = default;
    GridFunction(UniformGrid g, std::vector<double> v, std::optional<double> rho = std::nullopt)
        : grid(g), values(std::move(v)), singular_exponent(rho)
    {
        if (values.size() != grid.size())
            throw GridMismatch("grid function length " + std::to_string(values.size()) + " does not match grid size " +
                               std::to_string(grid.size()));
        if (rho) require(*rho > -1.0 && *rho <= 0.0, "singular exponent must lie in (-1,0]");
    }

    static GridFunction zeros(UniformGrid g) { return GridFunction(g, std::vector<double>(g.size(), 0.0)); }

    bool singular() const { return singular_exponent && *singular_exponent < 0.0; }
    double rho() const { return singular_exponent.value_or(0.0); }

    // t^{-rho} f(t) at node i.
    double weighted(long long i) const
    {
        if (!singular() || i == 0) return values[static_cast<std::size_t>(i)];
        return std::pow(grid.t(i), -rho()) * values[static_cast<std::size_t>(i)];
    }

    // Piecewise-linear interpolation; on the first cell of a singular
    // function the weighted values are interpolated instead.
    double operator()(double t) const
    {
        require(t >= 0.0 && t <= grid.T * (1.0 + 1e-12), "evaluation point outside the grid");
        const double h = grid.h();
        long long i = static_cast<long long>(std::floor(t / h));
        if (i >= grid.N) return values.back();
        const double s = t / h - static_cast<double>(i);
        if (i == 0 && singular()) {
            if (t == 0.0) throw DomainError("singular grid function has no value at t = 0");
            const double w = values[0] + (weighted(1) - values[0]) * s;
            return std::pow(t, rho()) * w;
        }
        const auto k = static_cast<std::size_t>(i);
        return values[k] + (values[k + 1] - values[k]) * s;
    }
};

inline void require_same_grid(const UniformGrid& a, const UniformGrid& b, const std::string& what)
{
    if (!(a == b)) throw GridMismatch(what + ": grids differ");
}

// Trapezoidal running integral of the piecewise-linear interpolant.
inline std::vector<double> running_integral(const std::vector<double>& v, double h)
{
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t i = 1; i < v.size(); ++i) out[i] = out[i - 1] + 0.5 * h * (v[i - 1] + v[i]);
    return out;
}

// Exact integral over [0, t] of the linear interpolant of v, given its
// running integral I at the nodes.
inline double integral_to(const std::vector<double>& v, const std::vector<double>& I, double h, double t)
{
    if (t <= 0.0) return 0.0;
    const long long last = static_cast<long long>(v.size()) - 1;
    long long i = static_cast<long long>(std::floor(t / h));
    if (i >= last) return I.back();
    const double tau = t - static_cast<double>(i) * h;
    const auto k = static_cast<std::size_t>(i);
    return I[k] + v[k] * tau + (v[k + 1] - v[k]) * tau * tau / (2.0 * h);
}

} // namespace spikevol
