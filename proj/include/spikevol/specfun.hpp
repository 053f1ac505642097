#pragma once

// Special functions and probability laws: Gamma, the two-parameter
// Mittag-Leffler function on the real axis, the Mittag-Leffler
// density/distribution, the fractional kernels K and L_K, the Hawkes
// kernel phi and the life-length laws nu and nu_*.

#include <spikevol/errors.hpp>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace spikevol::specfun {

// ---------------------------------------------------------------- Gamma --

namespace detail {

// Lanczos approximation, g = 7, nine coefficients.
inline constexpr double lanczos_g = 7.0;
inline constexpr std::array<double, 9> lanczos_coef = {
    0.99999999999980993,   676.5203681218851,     -1259.1392167224028,
    771.32342877765313,    -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,  9.9843695780195716e-6, 1.5056327351493116e-7};

inline double lanczos_sum(double xm1)
{
    double a = lanczos_coef[0];
    for (std::size_t i = 1; i < lanczos_coef.size(); ++i) a += lanczos_coef[i] / (xm1 + static_cast<double>(i));
    return a;
}

// sin(pi x) with exact zeros at the integers.
inline double sin_pi(double x)
{
    if (x == std::floor(x)) return 0.0;
    double r = std::fmod(x, 2.0);
    if (r < 0) r += 2.0;
    if (r == 1.0) return 0.0;
    return std::sin(std::numbers::pi * r);
}

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

} // namespace detail

inline double gamma_fn(double x)
{
    using std::numbers::pi;
    if (detail::is_nonpositive_integer(x)) return std::numeric_limits<double>::quiet_NaN();
    if (x < 0.5) return pi / (detail::sin_pi(x) * gamma_fn(1.0 - x));
    if (x > 171.7) return std::numeric_limits<double>::infinity();
    const double xm1 = x - 1.0;
    const double t = xm1 + detail::lanczos_g + 0.5;
    // split the power to postpone overflow near the top of the range
    const double p = std::pow(t, 0.5 * (xm1 + 0.5));
    return std::sqrt(2.0 * pi) * p * (p * std::exp(-t)) * detail::lanczos_sum(xm1);
}

// log|Gamma(x)| for x > 0.
inline double log_gamma(double x)
{
    using std::numbers::pi;
    require(x > 0.0, "log_gamma requires x > 0");
    if (x < 0.5) return std::log(std::abs(gamma_fn(x)));
    const double xm1 = x - 1.0;
    const double t = xm1 + detail::lanczos_g + 0.5;
    return 0.5 * std::log(2.0 * pi) + (xm1 + 0.5) * std::log(t) - t + std::log(detail::lanczos_sum(xm1));
}

// 1 / Gamma(x); zero at the poles.
inline double rgamma(double x)
{
    using std::numbers::pi;
    if (detail::is_nonpositive_integer(x)) return 0.0;
    if (x > 171.0) return std::exp(-log_gamma(x));
    if (x < 0.5) return detail::sin_pi(x) * gamma_fn(1.0 - x) / pi;
    return 1.0 / gamma_fn(x);
}

// ------------------------------------------------------ Mittag-Leffler --

struct EvalPolicy {
    double series_cutoff = 5.0;      // |x| at or below which the power series is tried
    double asymptotic_cutoff = 30.0; // -x at or above which the negative-axis expansion is tried
    double target_abs_tol = 1e-12;
    int max_terms = 800;
    int max_asymptotic_terms = 6;

    void validate() const
    {
        require(target_abs_tol > 0.0, "EvalPolicy: target_abs_tol must be > 0");
        require(max_terms >= 1, "EvalPolicy: max_terms must be >= 1");
        require(series_cutoff >= 0.0, "EvalPolicy: series_cutoff must be >= 0");
        require(max_asymptotic_terms >= 1, "EvalPolicy: max_asymptotic_terms must be >= 1");
    }
};

enum class MlMethod { constant, exponential, series, asymptotic, integral };

inline const char* to_string(MlMethod m)
{
    switch (m) {
    case MlMethod::constant: return "constant";
    case MlMethod::exponential: return "exponential";
    case MlMethod::series: return "series";
    case MlMethod::asymptotic: return "asymptotic";
    case MlMethod::integral: return "integral";
    }
    return "?";
}

struct MlResult {
    double value;
    double error_bound;
    MlMethod method;
};

namespace detail {

struct SeriesSum {
    double value;
    double error_bound;
    bool converged;
};

// sum_{n >= first} x^n / Gamma(alpha n + beta)
inline SeriesSum ml_power_series(double alpha, double beta, double x, int max_terms, int first = 0)
{
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (x == 0.0) return {first == 0 ? rgamma(beta) : 0.0, 0.0, true};
    const double lx = std::log(std::abs(x));
    long double sum = 0.0L;
    double abs_sum = 0.0;
    double prev_abs = std::numeric_limits<double>::infinity();
    double last_abs = 0.0;
    for (int n = first; n < first + max_terms; ++n) {
        const double arg = alpha * n + beta;
        double term;
        if (arg < 160.0 && n * lx < 600.0) {
            term = std::pow(x, n) * rgamma(arg);
        } else {
            const double mag = std::exp(n * lx - log_gamma(arg));
            term = (x < 0 && (n % 2)) ? -mag : mag;
        }
        sum += term;
        const double a = std::abs(term);
        abs_sum += a;
        last_abs = a;
        const bool decreasing = a <= prev_abs;
        prev_abs = a;
        if (decreasing && n > first + 2 && a <= 1e-18 * std::max(1.0, std::abs(static_cast<double>(sum)))) {
            const double err = 4.0 * eps * abs_sum + 2.0 * a + 8.0 * eps * std::abs(static_cast<double>(sum));
            return {static_cast<double>(sum), err, true};
        }
    }
    return {static_cast<double>(sum), 4.0 * eps * abs_sum + 10.0 * last_abs, false};
}

// -sum_{k=1}^{K} x^{-k} / Gamma(beta - alpha k), for large negative x.
// The error estimate is the larger of the next two omitted terms.
inline SeriesSum ml_asymptotic(double alpha, double beta, double x, int terms)
{
    double sum = 0.0;
    double xp = 1.0;
    for (int k = 1; k <= terms; ++k) {
        xp /= x;
        sum -= xp * rgamma(beta - alpha * k);
    }
    const double n1 = std::abs(xp / x * rgamma(beta - alpha * (terms + 1)));
    const double n2 = std::abs(xp / (x * x) * rgamma(beta - alpha * (terms + 2)));
    return {sum, std::max(n1, n2) + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(sum), true};
}

// Real-line integral representation, valid for 0 < alpha < 1,
// beta < 1 + alpha and x < 0 (|arg x| = pi > alpha pi). Written in the
// variable s = chi^{1/alpha}, which leaves an integrable s^{alpha-beta}
// endpoint factor for tanh-sinh.
inline SeriesSum ml_integral(double alpha, double beta, double x)
{
    using std::numbers::pi;
    const double s1 = sin_pi(1.0 - beta);
    const double s2 = sin_pi(1.0 - beta + alpha);
    const double c = std::cos(pi * alpha);

    auto integrand = [&](double s) {
        if (s <= 0.0) return 0.0;
        const double sa = std::pow(s, alpha);
        const double num = sa * s1 - x * s2;
        const double den = sa * sa - 2.0 * sa * x * c + x * x;
        return std::pow(s, alpha - beta) * std::exp(-s) * num / (pi * den);
    };

    constexpr double s_max = 60.0;
    const double peak = std::pow(std::abs(x) * std::max(0.0, -c), 1.0 / alpha);

    thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
    double total = 0.0;
    double err_total = 0.0;
    double prev = 0.0;
    for (double b : {peak, s_max}) {
        if (b <= prev || b > s_max) continue;
        double err = 0.0;
        const double lo = prev;
        const double hi = b;
        // two-argument form: xc is the signed distance to the nearer endpoint
        auto f2 = [&](double, double xc) { return integrand(xc < 0.0 ? lo - xc : hi - xc); };
        total += ts.integrate(f2, lo, hi, 1e-15, &err);
        err_total += err;
        prev = b;
    }
    return {total, err_total + 16.0 * std::numeric_limits<double>::epsilon() * std::abs(total), true};
}

} // namespace detail

// E_{alpha,beta}(x) = sum_n x^n / Gamma(alpha n + beta) with a reported
// error bound. Throws PrecisionUnreachable when no method meets the policy.
inline MlResult eval_ml_detailed(double alpha, double beta, double x, const EvalPolicy& policy = {})
{
    require(alpha > 0.0 && alpha <= 1.0, "eval_ml: alpha must lie in (0,1]");
    require(beta > 0.0, "eval_ml: beta must be > 0");
    require(std::isfinite(x), "eval_ml: x must be finite");
    policy.validate();
    const double tol = policy.target_abs_tol;

    if (x == 0.0) return {rgamma(beta), 0.0, MlMethod::constant};
    if (alpha == 1.0 && beta == 1.0) return {std::exp(x), 0.0, MlMethod::exponential};

    if (x > 0.0) {
        const auto s = detail::ml_power_series(alpha, beta, x, policy.max_terms);
        if (s.converged && s.error_bound <= tol * std::max(1.0, std::abs(s.value)))
            return {s.value, s.error_bound, MlMethod::series};
        throw PrecisionUnreachable("eval_ml: power series did not converge", s.value, s.error_bound);
    }

    double best = std::numeric_limits<double>::quiet_NaN();
    double best_err = std::numeric_limits<double>::infinity();
    auto consider = [&](const detail::SeriesSum& s) {
        if (s.error_bound < best_err) {
            best = s.value;
            best_err = s.error_bound;
        }
    };

    if (-x <= policy.series_cutoff) {
        const auto s = detail::ml_power_series(alpha, beta, x, policy.max_terms);
        if (s.converged && s.error_bound <= tol) return {s.value, s.error_bound, MlMethod::series};
        consider(s);
    }
    if (-x >= policy.asymptotic_cutoff) {
        for (int k = 1; k <= policy.max_asymptotic_terms; ++k) {
            const auto s = detail::ml_asymptotic(alpha, beta, x, k);
            if (s.error_bound <= tol) return {s.value, s.error_bound, MlMethod::asymptotic};
            consider(s);
        }
    }
    if (alpha < 1.0) {
        // lower beta into the representation's range: E_{a,b} = (E_{a,b-a} - 1/G(b-a)) / x
        int shifts = 0;
        double b = beta;
        while (b >= 1.0 + alpha) {
            b -= alpha;
            ++shifts;
        }
        auto s = detail::ml_integral(alpha, b, x);
        for (int k = shifts; k >= 1; --k) {
            const double bk = beta - alpha * (k - 1);
            s.value = (s.value - rgamma(bk - alpha)) / x;
            s.error_bound /= std::abs(x);
        }
        if (s.error_bound <= tol) return {s.value, s.error_bound, MlMethod::integral};
        consider(s);
    }
    if (std::isnan(best)) {
        const auto s = detail::ml_power_series(alpha, beta, x, policy.max_terms);
        consider(s);
    }
    throw PrecisionUnreachable("eval_ml: no evaluation method reached the requested tolerance", best, best_err);
}

inline double eval_ml(double alpha, double beta, double x, const EvalPolicy& policy = {})
{
    return eval_ml_detailed(alpha, beta, x, policy).value;
}

// sum_{n >= 1} x^n / Gamma(alpha n + beta) = E_{alpha,beta}(x) - 1/Gamma(beta),
// computed without cancellation for small |x|.
inline double ml_tail(double alpha, double beta, double x, const EvalPolicy& policy = {})
{
    if (std::abs(x) <= 1.0) {
        const auto s = detail::ml_power_series(alpha, beta, x, policy.max_terms, 1);
        if (s.converged) return s.value;
    }
    return eval_ml(alpha, beta, x, policy) - rgamma(beta);
}

// ------------------------------------------------ (alpha, gamma) laws --

enum class AlphaRange { model_valid, evaluation_only };

struct AlphaGamma {
    double alpha;
    double gamma;

    AlphaGamma(double alpha, double gamma, AlphaRange range = AlphaRange::model_valid)
        : alpha(alpha), gamma(gamma)
    {
        if (range == AlphaRange::model_valid)
            require(alpha > 0.5 && alpha < 1.0, "alpha must lie in (1/2,1)");
        else
            require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0,1]");
        require(gamma > 0.0, "gamma must be > 0");
    }
};

// f(t) = gamma t^{alpha-1} E_{alpha,alpha}(-gamma t^alpha)
inline double ml_density(const AlphaGamma& p, double t)
{
    require(t > 0.0, "ml_density requires t > 0");
    return p.gamma * std::pow(t, p.alpha - 1.0) * eval_ml(p.alpha, p.alpha, -p.gamma * std::pow(t, p.alpha));
}

// t^{1-alpha} f(t); finite at t = 0 where it equals gamma / Gamma(alpha).
inline double ml_density_weighted(const AlphaGamma& p, double t)
{
    require(t >= 0.0, "ml_density_weighted requires t >= 0");
    return p.gamma * eval_ml(p.alpha, p.alpha, -p.gamma * std::pow(t, p.alpha));
}

// F(t) = 1 - E_{alpha,1}(-gamma t^alpha)
inline double ml_cdf(const AlphaGamma& p, double t)
{
    require(t >= 0.0, "ml_cdf requires t >= 0");
    if (t == 0.0) return 0.0;
    const double F = -ml_tail(p.alpha, 1.0, -p.gamma * std::pow(t, p.alpha));
    return std::clamp(F, 0.0, 1.0);
}

// int_0^t F(s) ds = t (1 - E_{alpha,2}(-gamma t^alpha))
inline double ml_cdf_integral(const AlphaGamma& p, double t)
{
    require(t >= 0.0, "ml_cdf_integral requires t >= 0");
    if (t == 0.0) return 0.0;
    return -t * ml_tail(p.alpha, 2.0, -p.gamma * std::pow(t, p.alpha));
}

// int_0^t int_0^s F(r) dr ds = t^2 (1/2 - E_{alpha,3}(-gamma t^alpha))
inline double ml_cdf_integral2(const AlphaGamma& p, double t)
{
    require(t >= 0.0, "ml_cdf_integral2 requires t >= 0");
    if (t == 0.0) return 0.0;
    return -t * t * ml_tail(p.alpha, 3.0, -p.gamma * std::pow(t, p.alpha));
}

// K(t) = gamma t^{alpha-1} / Gamma(alpha)
inline double kernel_k(const AlphaGamma& p, double t)
{
    require(t > 0.0, "kernel_k requires t > 0");
    return p.gamma * std::pow(t, p.alpha - 1.0) * rgamma(p.alpha);
}

// L_K(t) = t^{-alpha} / (gamma Gamma(1-alpha)), the resolvent of the first kind of K.
inline double resolvent_first_kind(const AlphaGamma& p, double t)
{
    require(t > 0.0, "resolvent_first_kind requires t > 0");
    return std::pow(t, -p.alpha) * rgamma(1.0 - p.alpha) / p.gamma;
}

// ---------------------------------------------------- Hawkes-side laws --

// phi(t) = alpha (1+t)^{-alpha-1}
inline double hawkes_phi(double alpha, double t)
{
    require(t >= 0.0, "hawkes_phi requires t >= 0");
    return alpha * std::pow(1.0 + t, -alpha - 1.0);
}

// int_0^t phi = 1 - (1+t)^{-alpha}
inline double hawkes_phi_integral(double alpha, double t)
{
    require(t >= 0.0, "hawkes_phi_integral requires t >= 0");
    return -std::expm1(-alpha * std::log1p(t));
}

// nu(dy) = (1+alpha)(1+y)^{-alpha-2} dy
inline double lifetime_density(double alpha, double y)
{
    require(y >= 0.0, "lifetime_density requires y >= 0");
    return (1.0 + alpha) * std::pow(1.0 + y, -alpha - 2.0);
}

// nu((x, inf)) = (1+x)^{-alpha-1}
inline double lifetime_tail(double alpha, double x)
{
    require(x >= 0.0, "lifetime_tail requires x >= 0");
    return std::pow(1.0 + x, -alpha - 1.0);
}

// Inverse of the tail: y = u^{-1/(alpha+1)} - 1.
inline double sample_lifetime(double alpha, double u)
{
    require(u > 0.0 && u < 1.0, "sample_lifetime requires u in (0,1)");
    return std::expm1(-std::log(u) / (alpha + 1.0));
}

// nu_*([x, inf)) = alpha x^{-alpha-1}; nu_* has infinite mass at 0.
inline double limit_mark_tail(double alpha, double x)
{
    require(x > 0.0, "limit_mark_tail requires x > 0");
    return alpha * std::pow(x, -alpha - 1.0);
}

inline double limit_mark_density(double alpha, double y)
{
    require(y > 0.0, "limit_mark_density requires y > 0");
    return alpha * (1.0 + alpha) * std::pow(y, -alpha - 2.0);
}

// Draw from nu_* restricted to (y_min, inf): y = y_min u^{-1/(alpha+1)}.
inline double sample_limit_mark(double alpha, double y_min, double u)
{
    require(y_min > 0.0, "sample_limit_mark requires y_min > 0");
    require(u > 0.0 && u <= 1.0, "sample_limit_mark requires u in (0,1]");
    return y_min * std::pow(u, -1.0 / (alpha + 1.0));
}

} // namespace spikevol::specfun
