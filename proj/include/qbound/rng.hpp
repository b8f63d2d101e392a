#ifndef QBOUND_RNG_HPP
#define QBOUND_RNG_HPP

#include <cmath>
#include <cstdint>

namespace qbound {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}

// Seeded, splittable random stream: xoshiro256++ with its state derived from
// (seed, stream id) through SplitMix64.  The same pair always reproduces the
// same sequence bit-exactly; distinct stream ids give decorrelated streams,
// which is how the simulators parallelize.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {
        std::uint64_t sm = seed;
        std::uint64_t a = detail::splitmix64(sm);
        sm ^= stream * 0xD2B74407B1CE6E93ULL + 0x9E3779B97F4A7C15ULL;
        s_[0] = detail::splitmix64(sm) ^ a;
        s_[1] = detail::splitmix64(sm);
        s_[2] = detail::splitmix64(sm);
        s_[3] = detail::splitmix64(sm);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl(s_[3], 45);
        return result;
    }

    // Uniform on the open interval (0,1); never returns 0 or 1.
    double u01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Strictly positive exponential variate.
    double exponential(double rate) {
        return -std::log(u01()) / rate;
    }

    // Geometric count on {1,2,...} with success probability q.
    std::uint64_t geometric(double q) {
        return 1 + static_cast<std::uint64_t>(
                       std::floor(std::log(u01()) / std::log1p(-q)));
    }

    // Standard normal via Box-Muller (second value cached).
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double r = std::sqrt(-2.0 * std::log(u01()));
        double a = 6.28318530717958647692 * u01();
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    // Gamma(shape, 1) for shape >= 1, Marsaglia-Tsang squeeze method.
    double gamma(double shape) {
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / (3.0 * std::sqrt(d));
        for (;;) {
            double x = normal();
            double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            double v = t * t * t;
            double u = u01();
            double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    std::uint64_t s_[4];
    std::uint64_t seed_, stream_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}

#endif
