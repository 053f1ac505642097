#pragma once

#include <spikevol/errors.hpp>
#include <spikevol/specfun.hpp>

#include <cmath>
#include <string>

namespace spikevol {

// Parameters of the limiting model.
struct LimitParams {
    double alpha = 0.75;
    double a = 0.5;
    double b = 1.0;
    double v0 = 1.0;
    double zeta_m_star = 1.0;
    double lambda_m_star = 1.0;
    double zeta_l_star = 0.0;
    double lambda_l_star = 0.0;
    // Relaxes the normalization zeta_m lambda_m + zeta_l lambda_l = 1 so the
    // noise can be switched off in unit tests. Reported in every output.
    bool test_mode = false;

    double gamma() const { return b * specfun::rgamma(1.0 - alpha); }
    double c2() const { return zeta_m_star * std::sqrt(lambda_m_star) / b; }
    double c3() const { return zeta_l_star / b; }
    double c4() const { return lambda_l_star; }
    double normalization() const { return zeta_m_star * lambda_m_star + zeta_l_star * lambda_l_star; }
    double mean_level() const { return a / b; }
    specfun::AlphaGamma alpha_gamma() const { return {alpha, gamma()}; }

    void validate() const
    {
        require(std::isfinite(alpha) && alpha > 0.5 && alpha < 1.0, "alpha must lie in (1/2,1)");
        require(std::isfinite(a) && a >= 0.0, "a must be >= 0");
        require(std::isfinite(b) && b > 0.0, "b must be > 0");
        require(std::isfinite(v0) && v0 >= 0.0, "v0 must be >= 0");
        require(zeta_m_star >= 0.0 && lambda_m_star >= 0.0 && zeta_l_star >= 0.0 && lambda_l_star >= 0.0,
                "zeta/lambda limit constants must be >= 0");
        if (!test_mode)
            require(std::abs(normalization() - 1.0) <= 1e-12,
                    "zeta_m_star*lambda_m_star + zeta_l_star*lambda_l_star must equal 1");
    }
};

// Characteristics of the n-th Hawkes model. Lambda_n(t) = v0n (1+t)^{-alpha}.
struct PrelimitCharacteristics {
    double mu_n = 0.0;
    double v0n = 0.0;
    double zeta_m = 0.0;
    double lambda_m = 0.0;
    double zeta_l = 0.0;
    double lambda_l = 0.0;
    double alpha = 0.75;
    long long n = 1;

    double beta_n() const { return zeta_m * lambda_m + zeta_l * lambda_l; }
    double baseline(double t) const { return mu_n + v0n * std::pow(1.0 + t, -alpha); }
    double amplitude_scale() const { return std::pow(static_cast<double>(n), 2.0 * alpha - 1.0); }

    void validate() const
    {
        require(alpha > 0.5 && alpha < 1.0, "alpha must lie in (1/2,1)");
        require(n >= 1, "n must be >= 1");
        require(mu_n >= 0.0 && v0n >= 0.0 && zeta_m >= 0.0 && lambda_m >= 0.0 && zeta_l >= 0.0 && lambda_l >= 0.0,
                "Hawkes characteristics must be nonnegative");
        if (beta_n() >= 1.0) throw SupercriticalError("branching ratio beta_n must be < 1");
    }
};

// Scalings of the n-th model with the market pair lambda_n^m = lambda_m_star,
// zeta_n^m = (beta_n - zeta_n^l lambda_n^l) / lambda_n^m.
inline PrelimitCharacteristics characteristics_from_limit(const LimitParams& p, long long n)
{
    p.validate();
    require(n >= 1, "n must be >= 1");
    require(p.lambda_m_star > 0.0, "lambda_m_star must be > 0");
    const double nd = static_cast<double>(n);
    const double beta_n = 1.0 - p.b * std::pow(nd, -p.alpha);
    PrelimitCharacteristics c;
    c.alpha = p.alpha;
    c.n = n;
    c.zeta_l = p.zeta_l_star * std::pow(nd, p.alpha - 1.0);
    c.lambda_l = p.lambda_l_star * std::pow(nd, 1.0 - p.alpha);
    c.mu_n = p.a * std::pow(nd, p.alpha - 1.0);
    c.v0n = p.v0 * std::pow(nd, 2.0 * p.alpha - 1.0);
    c.lambda_m = p.lambda_m_star;
    c.zeta_m = (beta_n - c.zeta_l * c.lambda_l) / c.lambda_m;
    if (c.zeta_m < 0.0 || beta_n < 0.0)
        throw DomainError("n too small for this limit vector (n = " + std::to_string(n) + ")");
    return c;
}

} // namespace spikevol
