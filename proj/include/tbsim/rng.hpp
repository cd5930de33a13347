#ifndef TBSIM_RNG_HPP
#define TBSIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>

namespace tbsim {

// SplitMix64 output function (Steele, Lea, Flood 2014).
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based per-trial random stream.
//
// The stream for trial k of a run seeded with s is fully determined by
// (s, k): the internal counter starts at mix(s ^ mix(k)) and each draw
// advances it by the SplitMix64 increment. Any partition of a batch into
// trial ranges therefore reproduces the serial run bit for bit.
class TrialRng {
public:
    TrialRng(std::uint64_t seed, std::uint64_t trial)
        : state_(splitmix64_mix(seed ^ splitmix64_mix(trial + 0x51a2b3c4d5e6f708ULL))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Inverse-transform exponential sample with the given rate.
    double exponential(double rate) {
        return -std::log1p(-uniform()) / rate;
    }

    // Basic Box-Muller; draws two uniforms per call, no caching.
    double gaussian(double mean, double sigma) {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return mean + sigma * std::sqrt(-2.0 * std::log(u1)) *
                          std::cos(2.0 * std::numbers::pi * u2);
    }

    // Index into a non-negative weight vector, proportional sampling.
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw std::invalid_argument("categorical: zero total weight");
        double x = uniform() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            x -= weights[i];
            if (x < 0.0) return i;
        }
        return weights.size() - 1;
    }

private:
    std::uint64_t state_;
};

} // namespace tbsim

#endif
