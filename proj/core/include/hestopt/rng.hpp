#pragma once

#include <cmath>
#include <cstdint>

namespace hestopt {

// Counter-based stream: draw n of stream (seed, path) is a bijective mix of
// a Weyl sequence, so any path's sequence is reproducible regardless of
// scheduling or worker count.
class CounterRng {
public:
    static CounterRng for_path(std::uint64_t seed, std::uint64_t path) {
        std::uint64_t base = mix(mix(seed + kGamma) ^ mix(path * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
        return CounterRng(base);
    }

    std::uint64_t next_u64() { return mix(base_ + (++counter_) * kGamma); }

    // uniform on (0, 1): 53 random bits, offset away from zero
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    // one standard normal per call; always consumes exactly two uniforms so
    // the stream alignment does not depend on caller history
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    explicit CounterRng(std::uint64_t base) : base_(base) {}

    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

// Marsaglia-Tsang gamma variate (unit scale); shape < 1 goes through the
// shape+1 boost. Consumes a variable number of draws from rng.
double gamma_draw(CounterRng& rng, double shape);

} // namespace hestopt
