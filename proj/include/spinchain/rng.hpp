#pragma once

#include <cmath>
#include <cstdint>

namespace spinchain {

// Splittable counter-style random stream built on splitmix64
// (Steele, Lea, Flood 2014; same mixer as java.util.SplittableRandom).
// Every (realization, chain) work item derives its own stream from the
// master seed, so results do not depend on execution order or thread count.
//
// Algorithm name pinned in output headers: "splitmix64".
class RngStream {
  public:
    explicit RngStream(std::uint64_t state) : state_(state) {}

    // Injective derivation for realization < 2^22 and chain < 2^22.
    static RngStream derive(std::uint64_t seed, std::uint64_t realization, std::uint64_t chain) {
        std::uint64_t key = (realization << 22u) ^ chain;
        return RngStream(mix(mix(seed) ^ mix(key + 0x9E3779B97F4A7C15ull)));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11u) * 0x1.0p-53; }

    // uniform in (0, 1]
    double next_double_open_left() {
        return static_cast<double>((next_u64() >> 11u) + 1u) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; always consumes exactly two uniforms
    double next_gaussian() {
        const double u1 = next_double_open_left();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTau * u2);
    }

    // fair +1 / -1
    int next_sign() { return (next_u64() >> 63u) ? 1 : -1; }

    bool next_bernoulli(double p) { return next_double() < p; }

  private:
    static constexpr double kTau = 6.28318530717958647692528676655900577;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30u;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27u;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31u;
        return z;
    }

    std::uint64_t state_;
};

}  // namespace spinchain
