#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace lpfno {

// Every random draw in the project goes through this class so that results are
// reproducible bit-for-bit from a seed on any platform. The raw engine is
// std::mt19937_64 (its output sequence is fixed by the C++ standard); the
// mappings from raw 64-bit words to doubles/ints are implemented here because
// the std:: distributions are implementation-defined.
//
// Stream derivation (split) mixes (seed, stream) through SplitMix64, so
// independent substreams can be handed to data generation, weight init and
// batch shuffling without coupling their draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream), eng_(derive(seed, stream)) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0,1) with 53 random bits.
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    /// Uniform integer in [0, n). Rejection on the raw word keeps it unbiased.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// Independent generator for a named substream of the same seed.
    Rng split(std::uint64_t substream) const { return Rng(seed_, splitmix(stream_ * 0x9E3779B97F4A7C15ull + substream + 1)); }

    /// Fisher-Yates; std::shuffle is not portable across standard libraries.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        return splitmix(splitmix(seed) ^ splitmix(stream * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull));
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 eng_;
};

}  // namespace lpfno
