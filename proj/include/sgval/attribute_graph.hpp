#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sgval/data_model.hpp"
#include "sgval/val_learner.hpp"

namespace sgval {

/// All N*M virtual attributes as graph nodes. Node i*M + m is attribute m
/// of image i. Edges are implicit: e(a, b) = 1 / ||a - b||.
class AttributeGraph {
public:
    AttributeGraph() = default;
    /// Throws DataError if the row count is not a multiple of `attributes`
    /// or a node is non-finite.
    AttributeGraph(Matrix nodes, std::size_t attributes);

    const Matrix& nodes() const noexcept { return nodes_; }
    std::size_t attributes() const noexcept { return attributes_; }
    std::size_t images() const noexcept { return attributes_ == 0 ? 0 : nodes_.rows() / attributes_; }
    std::size_t node_count() const noexcept { return nodes_.rows(); }
    std::size_t owner(std::size_t node) const noexcept { return node / attributes_; }
    std::span<const double> node(std::size_t i) const { return nodes_.row(i); }

private:
    Matrix nodes_;
    std::size_t attributes_ = 0;
};

AttributeGraph build_graph(const Dataset& data, const AttributeProjector& projector);

/// Smallest distance used for edge weights; coincident nodes get 1e12.
inline constexpr double min_edge_distance = 1e-12;

double edge_weight(std::span<const double> a, std::span<const double> b);

/// Unique owners (ascending) of the K highest-weight (query attribute, node)
/// pairs, over nodes not owned by the query image. Ties order by owner,
/// then node, then query attribute.
std::vector<std::size_t> knn_images(const AttributeGraph& graph, std::size_t query_image, std::size_t k);

/// knn_images for every image, computed in cache-sized blocks on all
/// worker threads. Output does not depend on the thread count.
std::vector<std::vector<std::size_t>> batch_knn(const AttributeGraph& graph, std::size_t k);

/// Neighbor sets for the listed query images, in the order given.
std::vector<std::vector<std::size_t>> batch_knn(const AttributeGraph& graph, std::size_t k,
                                                std::span<const std::size_t> queries);

/// Checks 1 <= k <= (N - 1) * M; throws ConfigError otherwise.
void check_neighbor_count(const AttributeGraph& graph, std::size_t k);

}  // namespace sgval
