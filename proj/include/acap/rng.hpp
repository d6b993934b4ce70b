#pragma once

#include <cstdint>
#include <vector>

namespace acap {

// SplitMix64 (Steele, Lea, Flood 2014). Counter-based: output i is a pure
// function of (seed, i), so streams are reproducible across platforms and
// cheap to fork. This is the only random source in the toolkit.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t x = (state_ += 0x9E3779B97F4A7C15ULL);
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    // Uniform in [0, 1), 53 bits of mantissa.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Integer in [0, n). n must be nonzero. Rejection-free modulo is fine
    // here: n is always tiny compared to 2^64 and exact uniformity is not
    // load-bearing, determinism is.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    // Decorrelated child stream, e.g. one per epoch or per file.
    SplitMix64 fork(std::uint64_t stream) {
        SplitMix64 mixer(state_ ^ (0x632BE59BD9B4E019ULL * (stream + 1)));
        return SplitMix64(mixer.next_u64());
    }

private:
    std::uint64_t state_;
};

// Deterministic Fisher-Yates.
template <typename T>
void shuffle(std::vector<T>& items, SplitMix64& rng) {
    if (items.size() < 2) return;
    for (std::size_t i = items.size() - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i + 1));
        std::swap(items[i], items[j]);
    }
}

}  // namespace acap
