#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sgval/core.hpp"
#include "sgval/data_model.hpp"

namespace sgval {

/// M independent affine heads, each mapping a D-dim feature vector to a
/// Z-dim virtual attribute: v(m) = A_m x + b_m.
///
/// Parameters live in one flat vector, head after head; each head stores
/// A_m row-major (Z x D) followed by b_m (Z). Gradients use the same layout.
class AttributeProjector {
public:
    AttributeProjector() = default;
    AttributeProjector(std::size_t attributes, std::size_t input_dim, std::size_t embed_dim);
    AttributeProjector(std::size_t attributes, std::size_t input_dim, std::size_t embed_dim,
                       std::vector<double> params);

    /// Weights uniform in [-1/sqrt(D), 1/sqrt(D)], biases zero.
    static AttributeProjector random_init(std::size_t attributes, std::size_t input_dim, std::size_t embed_dim,
                                          std::uint64_t seed);

    std::size_t attributes() const noexcept { return attributes_; }
    std::size_t input_dim() const noexcept { return input_dim_; }
    std::size_t embed_dim() const noexcept { return embed_dim_; }
    std::size_t head_size() const noexcept { return embed_dim_ * (input_dim_ + 1); }

    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }
    std::span<double> weights(std::size_t m) { return {params_.data() + m * head_size(), embed_dim_ * input_dim_}; }
    std::span<const double> weights(std::size_t m) const {
        return {params_.data() + m * head_size(), embed_dim_ * input_dim_};
    }
    std::span<double> bias(std::size_t m) {
        return {params_.data() + m * head_size() + embed_dim_ * input_dim_, embed_dim_};
    }
    std::span<const double> bias(std::size_t m) const {
        return {params_.data() + m * head_size() + embed_dim_ * input_dim_, embed_dim_};
    }

    friend bool operator==(const AttributeProjector&, const AttributeProjector&) = default;

private:
    std::size_t attributes_ = 0;
    std::size_t input_dim_ = 0;
    std::size_t embed_dim_ = 0;
    std::vector<double> params_;
};

enum class LrSchedule { constant, cosine };

struct ValConfig {
    std::size_t attributes = 3;
    double beta = 0.01;
    double learning_rate = 1e-4;
    std::size_t epochs = 30;
    std::size_t batch_size = 16;
    std::uint64_t seed = 0;
    LrSchedule lr_schedule = LrSchedule::cosine;

    /// Throws ConfigError on the first violated range.
    void validate() const;
};

/// V = f(x), an M x Z matrix.
Matrix project_attributes(const AttributeProjector& projector, std::span<const double> x);

/// s_c = max over attribute rows of <v, w(c)>. When `argmax` is non-null it
/// receives the lowest attribute index attaining each maximum.
std::vector<double> class_scores(const Matrix& attributes, const EmbeddingMatrix& embeddings,
                                 std::vector<std::size_t>* argmax = nullptr);

/// 1 / (#positives * #negatives), or 0 when either count is zero.
double rank_weight(std::span<const double> y);

/// Pairwise softplus ranking loss summed over positive/negative pairs.
double val_loss(const Matrix& attributes, const EmbeddingMatrix& embeddings, std::span<const double> y);

/// Sum over attribute rows of the unbiased sample variance of the row's entries.
double reg_loss(const Matrix& attributes);

/// Mean over `batch` of rank_weight * val_loss + beta * reg_loss.
double batch_objective(const AttributeProjector& projector, const Dataset& data, std::span<const std::size_t> batch,
                       const EmbeddingMatrix& embeddings, double beta);

/// Analytic gradient of batch_objective in the projector's parameter layout.
/// Ties in the max over attributes route the gradient to the lowest index.
std::vector<double> grad_batch_objective(const AttributeProjector& projector, const Dataset& data,
                                         std::span<const std::size_t> batch, const EmbeddingMatrix& embeddings,
                                         double beta);

struct ValTrainResult {
    AttributeProjector projector;
    std::vector<double> epoch_loss;  // mean per-sample objective seen during each epoch
};

ValTrainResult train_val(const Dataset& data, const EmbeddingMatrix& embeddings, const ValConfig& config);

}  // namespace sgval
