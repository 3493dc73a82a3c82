#pragma once

#include <cstdint>
#include <random>

namespace motorlab {

/// SplitMix64 finalizer; mixes structured (seed, stream, index) tuples into seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
    return mix64(mix64(mix64(seed) ^ stream) ^ index);
}

/// mt19937_64 with a platform-independent uniform double conversion.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 engine_;
};

// Stream tags keep independent generators from sharing sequences.
namespace stream {
inline constexpr std::uint64_t kTrainPoints = 0x7472'6169'6e50ULL;
inline constexpr std::uint64_t kEvalPoints = 0x6576'616c'50ULL;
inline constexpr std::uint64_t kInitialState = 0x696e'6974ULL;
inline constexpr std::uint64_t kTorque = 0x746f'7271ULL;
inline constexpr std::uint64_t kRnnInit = 0x726e'6eULL;
inline constexpr std::uint64_t kGeneric = 0x6765'6eULL;
}  // namespace stream

}  // namespace motorlab
