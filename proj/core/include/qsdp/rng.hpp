#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>

namespace qsdp {

// Splittable seeded generator: xoshiro256++ with per-stream state derived
// from (seed, stream) through splitmix64.  Streams are cheap to create and
// statistically independent, which is what makes replica-level parallelism
// deterministic: replica k always consumes stream k regardless of how many
// workers run.
//
// Draw accounting (relied on for bit-reproducibility):
//   uniform()        one 64-bit output
//   uniform_below(n) one 64-bit output (Lemire multiply-shift)
//   exponential(r)   one uniform
//   normal()         exactly two uniforms (Box-Muller, sine branch discarded)
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        // Distinct streams perturb the seed by stream-indexed multiples of
        // the golden-ratio constant before splitmix64 whitening.
        std::uint64_t sm = seed ^ (0x9E3779B97F4A7C15ull * (stream + 1));
        for (auto& word : state_) word = splitmix64(sm);
        // xoshiro state must not be all zero.
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0)
            state_[0] = 0x9E3779B97F4A7C15ull;
    }

    std::uint64_t next_u64() {
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

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n); n > 0.  Bias is O(n / 2^64), negligible for
    // ensemble-sized n.
    std::uint64_t uniform_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    double exponential(double rate) {
        return -std::log1p(-uniform()) / rate;
    }

    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log1p(-u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    static std::uint64_t splitmix64(std::uint64_t& s) {
        std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4];
};

// Replica k of an experiment seeded with `seed` draws from this stream and
// nothing else.
inline Rng derive_rng_stream(std::uint64_t seed, std::uint64_t replica_index) {
    return Rng(seed, replica_index);
}

// Anything the kernels and the particle engine draw randomness from.  Tests
// substitute scripted sources to pin down geometric edge cases.
template <typename R>
concept RandomSource = requires(R r, double rate, std::uint64_t n) {
    { r.uniform() } -> std::convertible_to<double>;
    { r.uniform_below(n) } -> std::convertible_to<std::uint64_t>;
    { r.exponential(rate) } -> std::convertible_to<double>;
    { r.normal() } -> std::convertible_to<double>;
};

} // namespace qsdp
