#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random number generation. Every variate is a pure function
// of (seed, stream_id, counter, lane), so paths are reproducible and
// parallelizable without shared state: stream_id separates paths, counter
// separates steps within a path, lane separates variates within a step.

namespace ksde {

// Stafford mix13 finalizer (the splitmix64 output mixer).
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30; z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27; z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t counter, std::uint64_t lane) {
    std::uint64_t z = mix64(seed + 0x9e3779b97f4a7c15ULL);
    z = mix64(z ^ (stream + 0xbf58476d1ce4e5b9ULL));
    z = mix64(z ^ (counter + 0x94d049bb133111ebULL));
    z = mix64(z ^ lane);
    return z;
}

// Uniform in (0, 1]; the +1 keeps log() finite.
inline double uniform_open(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

// Uniform in [0, 1).
inline double uniform_half_open(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

struct NormalPair {
    double z0;
    double z1;
};

// Two independent standard normals via Box-Muller on hashed counters.
inline NormalPair normal_pair(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t counter, std::uint64_t lane_base = 0) {
    const double u1 = uniform_open(counter_hash(seed, stream, counter, lane_base));
    const double u2 = uniform_half_open(counter_hash(seed, stream, counter, lane_base + 1));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    return NormalPair{r * std::cos(a), r * std::sin(a)};
}

inline double normal_single(std::uint64_t seed, std::uint64_t stream,
                            std::uint64_t counter, std::uint64_t lane_base) {
    return normal_pair(seed, stream, counter, lane_base).z0;
}

}  // namespace ksde
