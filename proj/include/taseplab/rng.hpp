#ifndef TASEPLAB_RNG_HPP
#define TASEPLAB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>

// Counter-based random numbers. Every sample is a pure function of
// (seed, counter...), so any site/cell/replica can be regenerated in any
// order, on any thread, with bit-identical results. The mixer is the
// splitmix64 finalizer (Steele, Lea & Flood), applied twice for
// multi-word inputs.

namespace taseplab {

constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t mix2(std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(a) ^ (b + 0x9e3779b97f4a7c15ULL));
}

constexpr std::uint64_t mix3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix64(mix2(a, b) ^ (c + 0x632be59bd9b4e019ULL));
}

// Uniform in (0,1]: 53 mantissa bits, zero excluded so -log() is finite.
constexpr double bits_to_unit_open(std::uint64_t bits) {
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

inline double exp_from_bits(std::uint64_t bits) {
    return -std::log(bits_to_unit_open(bits));
}

// FNV-1a over the label, then mixed with the master seed and stream index.
// Used to carve independent substreams out of one master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : label) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return mix3(master, h, index);
}

// Sequential stream on top of the counter construction, for simulators
// that just need "the next draw".
class CounterStream {
public:
    explicit CounterStream(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_bits() { return mix2(seed_, counter_++); }
    double next_unit_open() { return bits_to_unit_open(next_bits()); }
    double next_exp() { return -std::log(next_unit_open()); }

    // index in [0, n)
    std::uint64_t next_index(std::uint64_t n) {
        // multiply-shift; bias is < 2^-53 for the n used here
        return static_cast<std::uint64_t>(next_unit_open() * static_cast<double>(n)) % n;
    }

    double next_normal() {
        // Box-Muller, one value per call (the pair's partner is discarded;
        // clarity beats the factor of two here)
        const double u1 = next_unit_open();
        const double u2 = next_unit_open();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

} // namespace taseplab

#endif
