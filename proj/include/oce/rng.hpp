#ifndef OCE_RNG_HPP
#define OCE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace oce {

/// SplitMix64 (Steele, Lea & Flood 2014): the j-th output is a fixed
/// avalanche of seed + j*GAMMA with GAMMA = 0x9e3779b97f4a7c15. The
/// generator is counter-based, so a run is fully determined by its seed,
/// and streams started from nearby seeds (base, base+1, ...) occupy
/// far-apart offsets of the single period-2^64 orbit. Replication r of
/// any study runs on seed base_seed + r.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal deviate, Marsaglia polar method. The spare deviate
    /// is cached, so draws come in deterministic pairs.
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_unit() - 1.0;
            v = 2.0 * next_unit() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    double next_normal(double mean, double stddev) { return mean + stddev * next_normal(); }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// 64-bit hash combiner for deriving independent sub-streams (per-arm,
/// per-oracle, ...) from a user seed without adjacent-seed collisions.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace oce

#endif
