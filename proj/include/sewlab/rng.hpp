#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace sewlab::rng {

// splitmix64, used both as a stand-alone mixer and to expand seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with a fully specified seeding chain. Streams are derived
// counter-style from (master, i0, i1, i2), so path-parallel workers can each
// own an independent stream without coordination.
class Stream {
public:
    Stream() : Stream(0, 0) {}

    Stream(std::uint64_t master, std::uint64_t i0, std::uint64_t i1 = 0, std::uint64_t i2 = 0) {
        std::uint64_t chain = master;
        chain = splitmix64(chain) ^ (i0 * 0x9e3779b97f4a7c15ULL);
        chain = splitmix64(chain) ^ (i1 * 0xc2b2ae3d27d4eb4fULL);
        chain = splitmix64(chain) ^ (i2 * 0x165667b19e3779f9ULL);
        for (auto& word : state_) word = splitmix64(chain);
        have_cached_normal_ = false;
    }

    std::uint64_t next_u64() {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on the open interval (0,1); safe as an argument of log/tan.
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    // Box-Muller with the usual pair cache. Explicit algorithm rather than
    // std::normal_distribution so that streams are reproducible across
    // standard libraries.
    double normal() {
        if (have_cached_normal_) {
            have_cached_normal_ = false;
            return cached_normal_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform_open();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_normal_ = r * std::sin(a);
        have_cached_normal_ = true;
        return r * std::cos(a);
    }

    double exponential() { return -std::log(uniform_open()); }

private:
    std::array<std::uint64_t, 4> state_{};
    double cached_normal_ = 0.0;
    bool have_cached_normal_ = false;
};

} // namespace sewlab::rng
