#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sgval/attribute_graph.hpp"
#include "sgval/data_model.hpp"
#include "sgval/noise_detector.hpp"
#include "sgval/val_learner.hpp"

namespace sgval {

struct RelabelConfig {
    double lambda = 0.7;
    std::size_t k = 50;

    void validate() const;
};

/// min(1, sum of neighbor label vectors), elementwise.
std::vector<double> aggregate_neighbor_labels(std::span<const std::span<const double>> neighbor_labels);

/// lambda * y + (1 - lambda) * aggregate.
std::vector<double> relabel_sample(std::span<const double> y, std::span<const double> aggregate, double lambda);

struct RelabelResult {
    Dataset relabeled;  // soft labels, original sample order
    CleanNoisySplit split;
    std::vector<std::vector<std::size_t>> rankings;        // per sample, from detection
    std::vector<std::vector<std::size_t>> neighbor_sets;  // per sample; empty for clean samples
};

/// Detects noisy samples, then rewrites their labels from the top-K
/// attribute-graph neighbors. Clean samples keep their labels bit for bit.
RelabelResult a2s(const Dataset& data, const AttributeProjector& projector, const EmbeddingMatrix& embeddings,
                  const RelabelConfig& config);

/// Label smoothing baseline: positives become 1 - epsilon, negatives epsilon.
LabelMatrix smooth_labels(const LabelMatrix& labels, double epsilon);

}  // namespace sgval
