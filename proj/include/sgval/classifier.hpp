#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sgval/core.hpp"
#include "sgval/data_model.hpp"

namespace sgval {

/// Linear-sigmoid multi-label classifier: y_hat = sigmoid(W x + b).
struct MultiLabelClassifier {
    Matrix weights;            // C x D
    std::vector<double> bias;  // C

    MultiLabelClassifier() = default;
    MultiLabelClassifier(std::size_t classes, std::size_t input_dim)
        : weights(classes, input_dim), bias(classes, 0.0) {}

    std::size_t classes() const noexcept { return weights.rows(); }
    std::size_t input_dim() const noexcept { return weights.cols(); }

    friend bool operator==(const MultiLabelClassifier&, const MultiLabelClassifier&) = default;
};

struct ClfConfig {
    double learning_rate = 0.05;
    std::size_t epochs = 30;
    std::size_t batch_size = 16;
    std::vector<std::size_t> milestones = {23, 27};
    double decay = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
    /// Step-decayed rate for a 0-based epoch: base * decay^(milestones passed).
    double rate_at(std::size_t epoch) const;
};

std::vector<double> logits(const MultiLabelClassifier& clf, std::span<const double> x);
std::vector<double> predict(const MultiLabelClassifier& clf, std::span<const double> x);

/// Binary cross-entropy summed over classes, with predictions given as
/// probabilities in (0, 1).
double bce_loss(std::span<const double> y_tilde, std::span<const double> y_hat);

/// Same loss from logits: sum_c softplus(s_c) - y_c * s_c.
double bce_loss_from_logits(std::span<const double> y_tilde, std::span<const double> scores);

/// Mean BCE over `batch`.
double clf_objective(const MultiLabelClassifier& clf, const Dataset& data, std::span<const std::size_t> batch);

/// Gradient of clf_objective; layout is weights (row-major) then bias.
std::vector<double> grad_clf_objective(const MultiLabelClassifier& clf, const Dataset& data,
                                       std::span<const std::size_t> batch);

struct ClfTrainResult {
    MultiLabelClassifier classifier;
    std::vector<double> epoch_loss;
};

/// Weights uniform in [-1/sqrt(D), 1/sqrt(D)] from the seed, biases zero.
MultiLabelClassifier init_classifier(std::size_t classes, std::size_t input_dim, std::uint64_t seed);

ClfTrainResult train_classifier(const Dataset& data, const ClfConfig& config);

}  // namespace sgval
