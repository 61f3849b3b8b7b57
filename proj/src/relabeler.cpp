#include "sgval/relabeler.hpp"

#include <algorithm>
#include <cmath>

#include "sgval/parallel.hpp"

namespace sgval {

void RelabelConfig::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
    if (k < 1) throw ConfigError("K must be >= 1");
}

std::vector<double> aggregate_neighbor_labels(std::span<const std::span<const double>> neighbor_labels) {
    if (neighbor_labels.empty()) throw DataError("cannot aggregate an empty neighbor set");
    const std::size_t c = neighbor_labels.front().size();
    std::vector<double> sum(c, 0.0);
    for (const auto& y : neighbor_labels) {
        if (y.size() != c) throw DataError("neighbor label vectors differ in length");
        for (std::size_t j = 0; j < c; ++j) sum[j] += y[j];
    }
    for (double& v : sum) v = std::min(1.0, v);
    return sum;
}

std::vector<double> relabel_sample(std::span<const double> y, std::span<const double> aggregate, double lambda) {
    if (y.size() != aggregate.size()) throw DataError("label and aggregate differ in length");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
    std::vector<double> out(y.size());
    for (std::size_t c = 0; c < y.size(); ++c) out[c] = lambda * y[c] + (1.0 - lambda) * aggregate[c];
    return out;
}

RelabelResult a2s(const Dataset& data, const AttributeProjector& projector, const EmbeddingMatrix& embeddings,
                  const RelabelConfig& config) {
    config.validate();
    if (data.labels.kind() != LabelKind::binary) throw DataError("relabeling expects binary input labels");
    if (data.samples() < 2) throw DataError("relabeling needs at least 2 samples");

    RelabelResult out;
    Detection detection = detect_noisy(data, projector, embeddings);
    out.split = std::move(detection.split);
    out.rankings = std::move(detection.rankings);
    out.neighbor_sets.resize(data.samples());

    Matrix labels = data.labels.values();
    if (!out.split.noisy_indices.empty()) {
        const AttributeGraph graph = build_graph(data, projector);
        auto neighbors = batch_knn(graph, config.k, out.split.noisy_indices);
        parallel_for(
            out.split.noisy_indices.size(),
            [&](std::size_t begin, std::size_t end) {
                std::vector<std::span<const double>> rows;
                for (std::size_t q = begin; q < end; ++q) {
                    const std::size_t i = out.split.noisy_indices[q];
                    rows.clear();
                    for (std::size_t j : neighbors[q]) rows.push_back(data.labels.row(j));
                    const auto aggregate = aggregate_neighbor_labels(rows);
                    const auto relabeled = relabel_sample(data.labels.row(i), aggregate, config.lambda);
                    std::copy(relabeled.begin(), relabeled.end(), labels.row(i).begin());
                }
            },
            64);
        for (std::size_t q = 0; q < neighbors.size(); ++q) {
            out.neighbor_sets[out.split.noisy_indices[q]] = std::move(neighbors[q]);
        }
    }
    out.relabeled = Dataset{data.features, LabelMatrix(std::move(labels), LabelKind::soft), data.class_names};
    return out;
}

LabelMatrix smooth_labels(const LabelMatrix& labels, double epsilon) {
    if (!(epsilon >= 0.0 && epsilon < 0.5)) throw ConfigError("epsilon must lie in [0, 0.5)");
    if (labels.kind() != LabelKind::binary) throw DataError("label smoothing expects binary labels");
    Matrix out = labels.values();
    for (double& v : out.values()) v = v == 1.0 ? 1.0 - epsilon : epsilon;
    return LabelMatrix(std::move(out), LabelKind::soft);
}

}  // namespace sgval
