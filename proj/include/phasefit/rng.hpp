#pragma once

// Seeded sampling with a fully pinned algorithm so reruns are byte-identical:
// mt19937_64 engine, 53-bit uniforms, Box-Muller normals. The id string is
// written into run metadata.

#include <cmath>
#include <cstdint>
#include <random>

namespace phasefit::rng {

inline constexpr const char* kPrngId = "mt19937_64/uniform53/box-muller";

/// splitmix64 finalizer, used as the stated seed-mixing function.
inline uint64_t splitmix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Per-replication seed: seed ^ hash(n, degree, rep), hashed stagewise so
/// sweep cells are independent of evaluation order.
inline uint64_t mix_seed(uint64_t seed, uint64_t n, uint64_t degree, uint64_t rep) {
    uint64_t h = seed;
    h = splitmix64(h ^ splitmix64(n));
    h = splitmix64(h ^ splitmix64(degree));
    h = splitmix64(h ^ splitmix64(rep));
    return h;
}

class Sampler {
public:
    explicit Sampler(uint64_t seed) : eng_(seed) {}

    /// Uniform on [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; both branch values are consumed.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0,1], keeps log finite
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Random sign in {-1.0, +1.0}.
    double sign() { return (eng_() & 1ULL) ? 1.0 : -1.0; }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace phasefit::rng
