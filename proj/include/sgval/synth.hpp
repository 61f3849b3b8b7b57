#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sgval/data_model.hpp"

namespace sgval {

/// Synthetic multi-label data with known clean labels.
///
/// Random streams (see rng.hpp) derive from `seed`: embeddings and the
/// feature mixing matrix depend on the seed only, so datasets drawn with
/// different `sample_stream` values share one generator (use this for
/// train/test splits). Labels, feature noise and label noise additionally
/// mix in `sample_stream`.
struct SynthConfig {
    std::size_t n = 2000;
    std::size_t c = 13;
    std::size_t z = 32;
    std::size_t d = 64;
    std::size_t max_positives = 5;
    double noise_rate = 0.3;     // fraction of samples corrupted
    double flip_prob = 0.3;      // per-label flip probability inside a corrupted sample
    double feature_noise = 0.05;
    std::uint64_t seed = 1;
    std::uint64_t sample_stream = 0;

    void validate() const;
};

struct SynthOutput {
    Dataset clean;
    Dataset noisy;
    EmbeddingMatrix embeddings;
    std::vector<std::size_t> corrupted_indices;  // sorted
};

/// Gaussian rows, L2-normalized.
EmbeddingMatrix gen_embeddings(std::size_t c, std::size_t z, std::uint64_t seed);

/// Largest |cosine| between two distinct rows.
double max_abs_cosine(const EmbeddingMatrix& embeddings);

/// d x z matrix with N(0, 1/d) entries, so E||B u||^2 = ||u||^2.
Matrix mixing_matrix(std::size_t d, std::size_t z, std::uint64_t seed);

/// Each sample: k ~ U{1..max_positives} distinct positive classes, and
/// feature = B * mean(positive embeddings) + feature_noise * N(0, I).
Dataset gen_clean(const SynthConfig& config, const EmbeddingMatrix& embeddings);

struct NoisyLabels {
    LabelMatrix labels;
    std::vector<std::size_t> corrupted_indices;
};

/// Selects each sample with probability noise_rate; a selected sample has
/// each bit flipped with probability flip_prob, redrawn until at least one
/// bit flips.
NoisyLabels inject_noise(const LabelMatrix& clean, double noise_rate, double flip_prob, std::uint64_t seed,
                         std::uint64_t sample_stream = 0);

SynthOutput generate(const SynthConfig& config);

}  // namespace sgval
