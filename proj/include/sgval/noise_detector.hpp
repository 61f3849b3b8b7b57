#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sgval/data_model.hpp"
#include "sgval/val_learner.hpp"

namespace sgval {

struct CleanNoisySplit {
    std::vector<std::size_t> clean_indices;  // sorted
    std::vector<std::size_t> noisy_indices;  // sorted
};

/// Class indices ordered by descending score; equal scores keep the lower
/// class index first.
std::vector<std::size_t> rank_by_score(std::span<const double> scores);

/// Class indices ordered by max-over-attributes score.
std::vector<std::size_t> rank_labels(const Matrix& attributes, const EmbeddingMatrix& embeddings);

/// True iff the top-P ranked classes are exactly the P annotated positives.
/// Samples without positives count as clean.
bool is_clean(std::span<const std::size_t> ranking, std::span<const double> y);
bool is_clean(const Matrix& attributes, const EmbeddingMatrix& embeddings, std::span<const double> y);

struct Detection {
    CleanNoisySplit split;
    std::vector<std::vector<std::size_t>> rankings;  // one per sample
};

/// Classifies every sample; work is spread over threads, output order is
/// by sample index.
Detection detect_noisy(const Dataset& data, const AttributeProjector& projector, const EmbeddingMatrix& embeddings);

CleanNoisySplit split_clean_noisy(const Dataset& data, const AttributeProjector& projector,
                                  const EmbeddingMatrix& embeddings);

}  // namespace sgval
