#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace sgval {

/// Named random streams. Each pipeline stage draws from its own stream so
/// that changing one stage's consumption never shifts another's values.
enum class Stream : std::uint64_t {
    embeddings = 1,
    labels = 2,
    features = 3,
    mixing = 4,
    noise = 5,
    val_init = 6,
    val_shuffle = 7,
    clf_init = 8,
    clf_shuffle = 9,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Portable generator: std::mt19937_64 (its output sequence is fixed by the
/// C++ standard) seeded with splitmix64(seed ^ splitmix64(stream + sub)).
/// Distributions are implemented here rather than with <random>'s
/// distribution classes, whose algorithms vary between standard libraries.
class Rng {
public:
    Rng(std::uint64_t seed, Stream stream, std::uint64_t substream = 0);

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n); n must be > 0. Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n);
    /// Standard normal via Box-Muller, one value per call (the pair's second
    /// value is cached).
    double normal();

    template <class T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sgval
