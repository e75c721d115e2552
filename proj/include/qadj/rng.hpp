#pragma once

#include <cstdint>

#include "qadj/rotations.hpp"

namespace qadj {

// xoshiro256++ with SplitMix64 seeding.  Fixed here (rather than <random>)
// so that identical seeds reproduce identical streams across platforms and
// language ports.  Per-trial streams derive as
//   Rng(seed ^ (trial_index + 1) * 0x9E3779B97F4A7C15).
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    static Rng for_trial(std::uint64_t seed, std::uint64_t trial_index);

    std::uint64_t next_u64();

    // uniform in [0, 1) with 53-bit resolution
    double uniform01();

    // uniform in [-half_width, half_width]
    double uniform_sym(double half_width);

    // standard normal via Box-Muller; computed in pairs, one value cached
    double normal();

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Uniform on S^3: four standard normals, normalized.
Quaternion random_unit_quaternion(Rng& rng);

} // namespace qadj
