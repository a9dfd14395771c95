#pragma once

#include <cstdint>
#include <limits>

namespace psusp {

/// Counter-mode generator: output i is a keyed SplitMix64 finalizer applied
/// to the counter, so any position in any stream is reachable in O(1).
/// Satisfies UniformRandomBitGenerator.
class CounterEngine {
public:
    using result_type = std::uint64_t;

    explicit CounterEngine(std::uint64_t key, std::uint64_t counter = 0) noexcept : key_(key), counter_(counter) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix(key_ + (++counter_) * kGolden); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    void discard(std::uint64_t n) noexcept { counter_ += n; }
    std::uint64_t position() const noexcept { return counter_; }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t counter_;
};

/// Reproducible (seed, stream) pair. Identical pairs yield identical draws.
struct SeededSampler {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    /// Independent child stream, e.g. one per trial index.
    SeededSampler substream(std::uint64_t index) const noexcept {
        return {seed, CounterEngine::mix(stream * 0x2545f4914f6cdd1dULL + index + 0x632be59bd9b4e019ULL)};
    }

    CounterEngine engine() const noexcept {
        return CounterEngine(CounterEngine::mix(seed ^ CounterEngine::mix(stream + 0x9e3779b97f4a7c15ULL)));
    }

    friend bool operator==(const SeededSampler&, const SeededSampler&) = default;
};

}  // namespace psusp
