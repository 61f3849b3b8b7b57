#include "sgval/attribute_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgval/parallel.hpp"

namespace sgval {

AttributeGraph::AttributeGraph(Matrix nodes, std::size_t attributes)
    : nodes_(std::move(nodes)), attributes_(attributes) {
    if (attributes_ < 1) throw DataError("attribute graph needs M >= 1");
    if (nodes_.rows() % attributes_ != 0) {
        throw DataError("attribute graph has " + std::to_string(nodes_.rows()) + " nodes, not a multiple of M = " +
                        std::to_string(attributes_));
    }
    if (!nodes_.all_finite()) throw DataError("attribute graph has a non-finite node");
}

AttributeGraph build_graph(const Dataset& data, const AttributeProjector& projector) {
    const std::size_t m_count = projector.attributes();
    Matrix nodes(data.samples() * m_count, projector.embed_dim());
    parallel_for(
        data.samples(),
        [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const Matrix v = project_attributes(projector, data.features.row(i));
                for (std::size_t m = 0; m < m_count; ++m) {
                    std::copy(v.row(m).begin(), v.row(m).end(), nodes.row(i * m_count + m).begin());
                }
            }
        },
        64);
    return AttributeGraph(std::move(nodes), m_count);
}

double edge_weight(std::span<const double> a, std::span<const double> b) {
    double ss = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) ss += (a[k] - b[k]) * (a[k] - b[k]);
    return 1.0 / std::max(std::sqrt(ss), min_edge_distance);
}

void check_neighbor_count(const AttributeGraph& graph, std::size_t k) {
    if (graph.images() < 2) throw ConfigError("neighbor search needs at least 2 images");
    const std::size_t limit = (graph.images() - 1) * graph.attributes();
    if (k < 1 || k > limit) {
        throw ConfigError("K = " + std::to_string(k) + " out of range [1, " + std::to_string(limit) + "]");
    }
}

namespace {

constexpr double min_squared_distance = min_edge_distance * min_edge_distance;

// Eight independent partial sums in a fixed combination order: vectorizes
// without -ffast-math and gives the same value on every call.
inline double squared_distance(const double* a, const double* b, std::size_t z) {
    double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    std::size_t k = 0;
    for (; k + 8 <= z; k += 8) {
        for (std::size_t l = 0; l < 8; ++l) {
            const double d = a[k + l] - b[k + l];
            acc[l] += d * d;
        }
    }
    double tail = 0.0;
    for (; k < z; ++k) tail += (a[k] - b[k]) * (a[k] - b[k]);
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

// The search first estimates distances in single precision and only
// computes the exact value when the estimate, widened by a bound on its
// error, could still enter the top K. With unit roundoff u, rounding the
// coordinates, the squares and a sequential sum over z terms perturbs the
// squared distance by at most about (8 + 2z) u (|a|^2 + |b|^2); the margin
// below is four times that, so results match an all-double search exactly.
constexpr double float_roundoff = 0x1p-24;
constexpr double prefilter_floor = 1e-30;

inline double prefilter_scale(std::size_t z) {
    return 4.0 * (8.0 + 2.0 * static_cast<double>(z)) * float_roundoff;
}

struct Candidate {
    double key;  // squared distance, clamped below
    std::size_t node;
    std::size_t query_attribute;
};

// Strict weak order: best candidate first.
inline bool better(const Candidate& a, const Candidate& b) {
    if (a.key != b.key) return a.key < b.key;
    if (a.node != b.node) return a.node < b.node;  // owner order is implied by node order
    return a.query_attribute < b.query_attribute;
}

// Bounded max-heap holding the K best candidates; the worst sits on top.
class TopK {
public:
    explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k); }

    double worst_key() const { return heap_.size() < k_ ? INFINITY : heap_.front().key; }

    void offer(const Candidate& c) {
        if (heap_.size() < k_) {
            heap_.push_back(c);
            std::push_heap(heap_.begin(), heap_.end(), better);
        } else if (better(c, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), better);
            heap_.back() = c;
            std::push_heap(heap_.begin(), heap_.end(), better);
        }
    }

    std::vector<std::size_t> owners(std::size_t attributes) const {
        std::vector<std::size_t> out;
        out.reserve(heap_.size());
        for (const auto& c : heap_) out.push_back(c.node / attributes);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

private:
    std::size_t k_;
    std::vector<Candidate> heap_;
};

constexpr std::size_t query_block = 16;
constexpr std::size_t node_tile = 256;
constexpr std::size_t query_group = 8;

// Single-precision copy of the nodes, stored tile by tile with dimensions
// outermost (element [k * node_tile + j] of a tile is coordinate k of its
// node j), so that one query is compared against a whole tile with the
// node index as the vector lane. Also holds the exact squared norms.
struct SearchIndex {
    std::vector<float> tiles;
    std::vector<float> queries;  // row-major single-precision nodes
    std::vector<double> norms;
    std::vector<double> slack;  // error-bound contribution of each node
    double scale = 0.0;
    bool usable = true;  // false if some coordinate does not fit in a float

    explicit SearchIndex(const AttributeGraph& graph) {
        const std::size_t total = graph.node_count();
        const std::size_t z = graph.nodes().cols();
        const std::size_t tile_count = (total + node_tile - 1) / node_tile;
        tiles.assign(tile_count * node_tile * z, 0.0f);
        queries.resize(total * z);
        norms.resize(total);
        slack.resize(total);
        scale = prefilter_scale(z);
        for (std::size_t n = 0; n < total; ++n) {
            const auto row = graph.node(n);
            float* tile = tiles.data() + (n / node_tile) * node_tile * z;
            for (std::size_t k = 0; k < z; ++k) {
                const float v = static_cast<float>(row[k]);
                usable = usable && std::isfinite(v);
                tile[k * node_tile + n % node_tile] = v;
                queries[n * z + k] = v;
            }
            norms[n] = dot(row, row);
            slack[n] = scale * norms[n];
            usable = usable && std::isfinite(norms[n]);
        }
    }

    // out[r * node_tile + j] = single-precision squared distance from q[r]
    // to node j of the tile, for query_group queries at once. Each lane
    // still sums over k in order; the blocking only keeps an 8 x 32 patch of
    // sums in registers while the tile streams through.
    void estimate(std::size_t tile, const float* const* q, std::size_t z, float* out) const {
        constexpr std::size_t lanes = 32;
        const float* t = tiles.data() + tile * node_tile * z;
        for (std::size_t jc = 0; jc < node_tile; jc += lanes) {
            float acc[query_group][lanes] = {};
            for (std::size_t k = 0; k < z; ++k) {
                const float* col = t + k * node_tile + jc;
                for (std::size_t r = 0; r < query_group; ++r) {
                    const float qk = q[r][k];
                    for (std::size_t l = 0; l < lanes; ++l) {
                        const float d = qk - col[l];
                        acc[r][l] += d * d;
                    }
                }
            }
            for (std::size_t r = 0; r < query_group; ++r) {
                std::copy(acc[r], acc[r] + lanes, out + r * node_tile + jc);
            }
        }
    }
};

// Neighbor sets for queries[first, last), written to out[first, last).
void search_block(const AttributeGraph& graph, const SearchIndex& index, std::size_t k,
                  std::span<const std::size_t> queries, std::size_t first, std::size_t last,
                  std::vector<std::vector<std::size_t>>& out) {
    const std::size_t m_count = graph.attributes();
    const std::size_t z = graph.nodes().cols();
    const std::size_t total = graph.node_count();
    const double* base = graph.nodes().values().data();

    std::vector<TopK> tops(last - first, TopK(k));
    const std::size_t qcount = (last - first) * m_count;
    const std::size_t padded = (qcount + query_group - 1) / query_group * query_group;
    std::vector<const float*> qptr(padded);
    for (std::size_t r = 0; r < padded; ++r) {
        const std::size_t slot = std::min(r, qcount - 1);
        qptr[r] = index.queries.data() + (queries[first + slot / m_count] * m_count + slot % m_count) * z;
    }
    std::vector<float> estimates(padded * node_tile);
    for (std::size_t tile = 0; tile * node_tile < total; ++tile) {
        const std::size_t tile_begin = tile * node_tile;
        const std::size_t tile_end = std::min(total, tile_begin + node_tile);
        if (index.usable) {
            for (std::size_t r = 0; r < padded; r += query_group) {
                index.estimate(tile, qptr.data() + r, z, estimates.data() + r * node_tile);
            }
        }
        for (std::size_t qi = first; qi < last; ++qi) {
            TopK& top = tops[qi - first];
            const std::size_t self_begin = queries[qi] * m_count;
            const std::size_t self_end = self_begin + m_count;
            for (std::size_t qa = 0; qa < m_count; ++qa) {
                const std::size_t qnode = self_begin + qa;
                const double* q = base + qnode * z;
                if (!index.usable || top.worst_key() == INFINITY) {
                    for (std::size_t node = tile_begin; node < tile_end; ++node) {
                        if (node >= self_begin && node < self_end) continue;
                        const double key = std::max(squared_distance(q, base + node * z, z), min_squared_distance);
                        if (key <= top.worst_key()) top.offer({key, node, qa});
                    }
                    continue;
                }
                const float* estimate = estimates.data() + ((qi - first) * m_count + qa) * node_tile;
                // the worst key only shrinks, so a limit taken now stays conservative
                const double limit = top.worst_key() + index.slack[qnode] + prefilter_floor;
                const double* slack = index.slack.data() + tile_begin;
                const std::size_t width = tile_end - tile_begin;
                bool any = false;
                for (std::size_t j = 0; j < width; ++j) {
                    any |= static_cast<double>(estimate[j]) - slack[j] <= limit;
                }
                if (!any) continue;
                for (std::size_t j = 0; j < width; ++j) {
                    if (static_cast<double>(estimate[j]) - slack[j] > limit) continue;
                    const std::size_t node = tile_begin + j;
                    if (node >= self_begin && node < self_end) continue;
                    const double key = std::max(squared_distance(q, base + node * z, z), min_squared_distance);
                    if (key <= top.worst_key()) top.offer({key, node, qa});
                }
            }
        }
    }
    for (std::size_t qi = first; qi < last; ++qi) out[qi] = tops[qi - first].owners(m_count);
}

}  // namespace

std::vector<std::size_t> knn_images(const AttributeGraph& graph, std::size_t query_image, std::size_t k) {
    check_neighbor_count(graph, k);
    if (query_image >= graph.images()) {
        throw ConfigError("query image " + std::to_string(query_image) + " out of range");
    }
    std::vector<std::vector<std::size_t>> out(1);
    const std::size_t queries[] = {query_image};
    search_block(graph, SearchIndex(graph), k, queries, 0, 1, out);
    return std::move(out[0]);
}

std::vector<std::vector<std::size_t>> batch_knn(const AttributeGraph& graph, std::size_t k,
                                                std::span<const std::size_t> queries) {
    check_neighbor_count(graph, k);
    for (std::size_t q : queries) {
        if (q >= graph.images()) throw ConfigError("query image " + std::to_string(q) + " out of range");
    }
    const std::size_t n = queries.size();
    std::vector<std::vector<std::size_t>> out(n);
    const SearchIndex index(graph);
    const std::size_t blocks = (n + query_block - 1) / query_block;
    parallel_for(blocks, [&](std::size_t begin, std::size_t end) {
        for (std::size_t b = begin; b < end; ++b) {
            search_block(graph, index, k, queries, b * query_block, std::min(n, (b + 1) * query_block), out);
        }
    });
    return out;
}

std::vector<std::vector<std::size_t>> batch_knn(const AttributeGraph& graph, std::size_t k) {
    std::vector<std::size_t> all(graph.images());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return batch_knn(graph, k, all);
}

}  // namespace sgval
