#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace sphmimo {

enum class RngStream : std::uint64_t {
    noise_sla = 1,
    noise_sma = 2,
    jitter_sla = 3,
    jitter_sma = 4,
    drive_noise = 5,
    mic_noise = 6,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Keyed counter generator: draw i of stream (seed, realization, bin, stream)
// is a pure function of those values, independent of evaluation order.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t realization, std::uint64_t bin, RngStream stream)
        : key_(splitmix64(splitmix64(splitmix64(splitmix64(seed) ^ realization) ^ bin) ^ static_cast<std::uint64_t>(stream))) {}

    std::uint64_t next_u64() { return splitmix64(key_ ^ splitmix64(counter_++)); }

    // Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform(), u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Circular complex Gaussian with E|z|^2 = variance.
    std::complex<double> circular_normal(double variance) {
        const double s = std::sqrt(0.5 * variance);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace sphmimo
