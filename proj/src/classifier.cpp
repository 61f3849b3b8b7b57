#include "sgval/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgval/adam.hpp"
#include "sgval/parallel.hpp"
#include "sgval/rng.hpp"

namespace sgval {

void ClfConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be positive");
    if (batch_size < 1) throw ConfigError("batch size must be positive");
    if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("decay must lie in (0, 1]");
    if (epochs > 0) {
        for (std::size_t m : milestones) {
            if (m >= epochs) {
                throw ConfigError("milestone " + std::to_string(m) + " must be below the epoch count " +
                                  std::to_string(epochs));
            }
        }
    }
}

double ClfConfig::rate_at(std::size_t epoch) const {
    double lr = learning_rate;
    for (std::size_t m : milestones) {
        if (epoch >= m) lr *= decay;
    }
    return lr;
}

std::vector<double> logits(const MultiLabelClassifier& clf, std::span<const double> x) {
    if (x.size() != clf.input_dim()) {
        throw DataError("dimension mismatch: feature has " + std::to_string(x.size()) + " entries, classifier expects " +
                        std::to_string(clf.input_dim()));
    }
    std::vector<double> s(clf.classes());
    for (std::size_t c = 0; c < clf.classes(); ++c) s[c] = dot(clf.weights.row(c), x) + clf.bias[c];
    return s;
}

std::vector<double> predict(const MultiLabelClassifier& clf, std::span<const double> x) {
    auto s = logits(clf, x);
    for (double& v : s) v = sigmoid(v);
    return s;
}

double bce_loss(std::span<const double> y_tilde, std::span<const double> y_hat) {
    if (y_tilde.size() != y_hat.size()) throw DataError("target and prediction differ in length");
    double loss = 0.0;
    for (std::size_t c = 0; c < y_hat.size(); ++c) {
        loss -= y_tilde[c] * std::log(y_hat[c]) + (1.0 - y_tilde[c]) * std::log1p(-y_hat[c]);
    }
    return loss;
}

double bce_loss_from_logits(std::span<const double> y_tilde, std::span<const double> scores) {
    if (y_tilde.size() != scores.size()) throw DataError("target and logits differ in length");
    double loss = 0.0;
    // -[y log sigma(s) + (1-y) log(1 - sigma(s))] = softplus(s) - y s
    for (std::size_t c = 0; c < scores.size(); ++c) loss += softplus(scores[c]) - y_tilde[c] * scores[c];
    return loss;
}

namespace {

void check_data(const MultiLabelClassifier& clf, const Dataset& data, std::span<const std::size_t> batch) {
    if (batch.empty()) throw ConfigError("batch must be nonempty");
    if (data.classes() != clf.classes() || data.feature_dim() != clf.input_dim()) {
        throw DataError("dimension mismatch between classifier and dataset");
    }
    for (std::size_t i : batch) {
        if (i >= data.samples()) throw DataError("batch index " + std::to_string(i) + " out of range");
    }
}

// Per-sample residuals sigma(s) - y run in parallel; accumulation is in
// batch order.
double accumulate_batch(const MultiLabelClassifier& clf, const Dataset& data, std::span<const std::size_t> batch,
                        std::vector<double>& grad) {
    const std::size_t classes = clf.classes();
    const std::size_t d = clf.input_dim();
    std::vector<double> residuals(batch.size() * classes);
    std::vector<double> losses(batch.size());
    parallel_for(
        batch.size(),
        [&](std::size_t begin, std::size_t end) {
            for (std::size_t b = begin; b < end; ++b) {
                const std::size_t i = batch[b];
                const auto s = logits(clf, data.features.row(i));
                const auto y = data.labels.row(i);
                losses[b] = bce_loss_from_logits(y, s);
                for (std::size_t c = 0; c < classes; ++c) residuals[b * classes + c] = sigmoid(s[c]) - y[c];
            }
        },
        16);

    grad.assign(classes * (d + 1), 0.0);
    const double inv = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        total += losses[b];
        const auto x = data.features.row(batch[b]);
        for (std::size_t c = 0; c < classes; ++c) {
            const double r = residuals[b * classes + c] * inv;
            double* row = grad.data() + c * d;
            for (std::size_t k = 0; k < d; ++k) row[k] += r * x[k];
            grad[classes * d + c] += r;
        }
    }
    return total;
}

}  // namespace

double clf_objective(const MultiLabelClassifier& clf, const Dataset& data, std::span<const std::size_t> batch) {
    check_data(clf, data, batch);
    double total = 0.0;
    for (std::size_t i : batch) total += bce_loss_from_logits(data.labels.row(i), logits(clf, data.features.row(i)));
    return total / static_cast<double>(batch.size());
}

std::vector<double> grad_clf_objective(const MultiLabelClassifier& clf, const Dataset& data,
                                       std::span<const std::size_t> batch) {
    check_data(clf, data, batch);
    std::vector<double> grad;
    accumulate_batch(clf, data, batch, grad);
    return grad;
}

MultiLabelClassifier init_classifier(std::size_t classes, std::size_t input_dim, std::uint64_t seed) {
    MultiLabelClassifier clf(classes, input_dim);
    Rng rng(seed, Stream::clf_init);
    const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
    for (double& w : clf.weights.values()) w = rng.uniform(-bound, bound);
    return clf;
}

ClfTrainResult train_classifier(const Dataset& data, const ClfConfig& config) {
    config.validate();
    ClfTrainResult result{init_classifier(data.classes(), data.feature_dim(), config.seed), {}};
    auto& clf = result.classifier;

    const std::size_t classes = clf.classes();
    const std::size_t d = clf.input_dim();
    std::vector<double> params(classes * (d + 1));
    auto pack = [&] {
        std::copy(clf.weights.values().begin(), clf.weights.values().end(), params.begin());
        std::copy(clf.bias.begin(), clf.bias.end(), params.begin() + static_cast<std::ptrdiff_t>(classes * d));
    };
    auto unpack = [&] {
        std::copy(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(classes * d),
                  clf.weights.values().begin());
        std::copy(params.begin() + static_cast<std::ptrdiff_t>(classes * d), params.end(), clf.bias.begin());
    };
    pack();

    Adam adam(params.size());
    Rng shuffle_rng(config.seed, Stream::clf_shuffle);
    std::vector<std::size_t> order(data.samples());
    std::vector<double> grad;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle_rng.shuffle(std::span<std::size_t>(order));
        const double lr = config.rate_at(epoch);
        double epoch_total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            // members come from the shuffle; the reduction runs in ascending sample index
            std::sort(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
            const std::span<const std::size_t> batch(order.data() + start, end - start);
            const double batch_total = accumulate_batch(clf, data, batch, grad);
            if (!std::isfinite(batch_total)) {
                throw DivergenceError("classifier training diverged: non-finite loss in epoch " +
                                      std::to_string(epoch));
            }
            epoch_total += batch_total;
            adam.step(params, grad, lr);
            if (!parameters_in_range(params)) {
                throw DivergenceError("classifier training diverged: parameters out of range in epoch " +
                                      std::to_string(epoch));
            }
            unpack();
        }
        result.epoch_loss.push_back(epoch_total / static_cast<double>(order.size()));
    }
    return result;
}

}  // namespace sgval
