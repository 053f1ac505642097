#pragma once

// Counter-based random numbers. A stream is addressed by (seed, path,
// domain); draws depend only on that address and the draw index, never on
// which thread produced them.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace spikevol::rng {

// log k! for integer-valued k >= 0; Stirling series beyond the table.
inline double log_factorial(double k)
{
    static constexpr std::array<double, 10> table = {0.0,
                                                     0.0,
                                                     0.69314718055994530942,
                                                     1.79175946922805500081,
                                                     3.17805383034794561965,
                                                     4.78749174278204599425,
                                                     6.57925121201010099506,
                                                     8.52516136106541430017,
                                                     10.60460290274525022842,
                                                     12.80182748008146961121};
    if (k < 10.0) return table[static_cast<std::size_t>(k)];
    const double x = k + 1.0, r = 1.0 / (x * x);
    return (x - 0.5) * std::log(x) - x + 0.91893853320467274178 +
           (1.0 / 12.0 - r * (1.0 / 360.0 - r * (1.0 / 1260.0 - r / 1680.0))) / x;
}

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds.
inline Counter philox4x32_10(Counter c, Key k)
{
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += W0;
        k[1] += W1;
    }
    return c;
}

// Domains keep the streams of different random inputs apart.
enum Domain : std::uint32_t {
    hawkes_events = 1,
    price_marks = 2,
    sve_brownian = 3,
    sve_jumps = 4,
    lifetimes = 5,
    branching = 6,
    generic = 7,
};

class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t path, std::uint32_t domain, std::uint32_t sub = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          path_(static_cast<std::uint32_t>(path) ^ static_cast<std::uint32_t>(path >> 32) * 0x85EBCA6Bu),
          domain_(domain << 24 ^ sub)
    {
    }

    std::uint64_t next_u64()
    {
        if (have_ == 0) refill();
        const std::uint64_t v = (static_cast<std::uint64_t>(buf_[4 - have_]) << 32) | buf_[5 - have_];
        have_ -= 2;
        return v;
    }

    // Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double exponential() { return -std::log(uniform()); }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(th);
        has_spare_ = true;
        return r * std::cos(th);
    }

    // Counts unit-rate arrivals before mean; exact, O(mean).
    long long poisson(double mean)
    {
        if (mean <= 0.0) return 0;
        if (mean < 12.0) {
            const double L = std::exp(-mean);
            long long k = 0;
            double p = uniform();
            while (p > L) {
                ++k;
                p *= uniform();
            }
            return k;
        }
        // transformed rejection with squeeze (Hoermann's PTRS)
        const double slam = std::sqrt(mean), loglam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double U = uniform() - 0.5;
            const double V = uniform();
            const double us = 0.5 - std::abs(U);
            const double k = std::floor((2.0 * a / us + b) * U + mean + 0.43);
            if (us >= 0.07 && V <= vr) return static_cast<long long>(k);
            if (k < 0.0 || (us < 0.013 && V > us)) continue;
            if (std::log(V) + std::log(inv_alpha) - std::log(a / (us * us) + b) <= -mean + k * loglam - log_factorial(k))
                return static_cast<long long>(k);
        }
    }

    std::uint64_t draws() const { return index_; }

private:
    void refill()
    {
        const Counter c{static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32), path_, domain_};
        buf_ = philox4x32_10(c, key_);
        ++index_;
        have_ = 4;
    }

    Key key_;
    std::uint32_t path_;
    std::uint32_t domain_;
    std::uint64_t index_ = 0;
    Counter buf_{};
    int have_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace spikevol::rng
