#pragma once

#include <cstdint>
#include <initializer_list>

namespace fpph {

// SplitMix64 finalizer. Used as the mixing step of the counter-based
// generator below: every random quantity in the library is a pure
// function of (seed, stream label, key words), so environments are
// windowless and reproducible across box sizes and thread counts.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream labels keep substreams (edge weights, level atoms, replicas, ...)
// disjoint under a shared root seed.
enum class Stream : std::uint64_t {
    Edge = 0xe5d3,
    Level = 0x1e7e,
    Replica = 0x4e91,
    Probe = 0x9b0b,
    Space = 0x5ace,
};

class KeyHash {
  public:
    KeyHash(std::uint64_t seed, Stream stream)
        : h_(mix64(seed ^ mix64(static_cast<std::uint64_t>(stream)))) {}

    KeyHash& word(std::uint64_t w) {
        h_ = mix64(h_ ^ (w + 0x9e3779b97f4a7c15ULL + (h_ << 6) + (h_ >> 2)));
        return *this;
    }
    KeyHash& word(std::int64_t w) { return word(static_cast<std::uint64_t>(w)); }
    KeyHash& word(int w) { return word(static_cast<std::int64_t>(w)); }

    std::uint64_t value() const { return h_; }

    // Uniform double in [0, 1) with 53 random bits.
    double u01() const { return static_cast<double>(h_ >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t h_;
};

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index) {
    return KeyHash(seed, stream).word(index).value();
}

}  // namespace fpph
