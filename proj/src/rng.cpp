#include "qadj/rng.hpp"

#include <cmath>

namespace qadj {

namespace {

std::uint64_t splitmix64(std::uint64_t& state)
{
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k)
{
    return (x << k) | (x >> (64 - k));
}

} // namespace

Rng::Rng(std::uint64_t seed)
{
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1; // all-zero state is invalid
}

Rng Rng::for_trial(std::uint64_t seed, std::uint64_t trial_index)
{
    return Rng(seed ^ ((trial_index + 1) * 0x9E3779B97F4A7C15ULL));
}

std::uint64_t Rng::next_u64()
{
    std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform01()
{
    return double(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_sym(double half_width)
{
    return half_width * (2.0 * uniform01() - 1.0);
}

double Rng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform01(), u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01(); // log(0) guard; astronomically rare
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

Quaternion random_unit_quaternion(Rng& rng)
{
    while (true) {
        Quaternion q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
        double n = q.norm();
        if (n > 1e-12) return {q.q0 / n, q.q1 / n, q.q2 / n, q.q3 / n};
    }
}

} // namespace qadj
