#include "sgval/noise_detector.hpp"

#include <algorithm>
#include <numeric>

#include "sgval/parallel.hpp"

namespace sgval {

std::vector<std::size_t> rank_by_score(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

std::vector<std::size_t> rank_labels(const Matrix& attributes, const EmbeddingMatrix& embeddings) {
    return rank_by_score(class_scores(attributes, embeddings));
}

bool is_clean(std::span<const std::size_t> ranking, std::span<const double> y) {
    if (ranking.size() != y.size()) throw DataError("ranking and label vector differ in length");
    const std::size_t positives = count_positives(y);
    for (std::size_t r = 0; r < positives; ++r) {
        if (y[ranking[r]] != 1.0) return false;
    }
    return true;
}

bool is_clean(const Matrix& attributes, const EmbeddingMatrix& embeddings, std::span<const double> y) {
    return is_clean(rank_labels(attributes, embeddings), y);
}

Detection detect_noisy(const Dataset& data, const AttributeProjector& projector, const EmbeddingMatrix& embeddings) {
    if (data.classes() != embeddings.classes()) throw DataError("dimension mismatch: dataset vs embedding classes");
    const std::size_t n = data.samples();
    Detection out;
    out.rankings.resize(n);
    std::vector<char> clean(n, 0);
    parallel_for(
        n,
        [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                out.rankings[i] = rank_labels(project_attributes(projector, data.features.row(i)), embeddings);
                clean[i] = is_clean(out.rankings[i], data.labels.row(i)) ? 1 : 0;
            }
        },
        64);
    for (std::size_t i = 0; i < n; ++i) {
        (clean[i] ? out.split.clean_indices : out.split.noisy_indices).push_back(i);
    }
    return out;
}

CleanNoisySplit split_clean_noisy(const Dataset& data, const AttributeProjector& projector,
                                  const EmbeddingMatrix& embeddings) {
    return detect_noisy(data, projector, embeddings).split;
}

}  // namespace sgval
