#include "sgval/val_learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgval/adam.hpp"
#include "sgval/parallel.hpp"
#include "sgval/rng.hpp"

namespace sgval {

AttributeProjector::AttributeProjector(std::size_t attributes, std::size_t input_dim, std::size_t embed_dim)
    : attributes_(attributes),
      input_dim_(input_dim),
      embed_dim_(embed_dim),
      params_(attributes * embed_dim * (input_dim + 1), 0.0) {
    if (attributes < 1 || input_dim < 1 || embed_dim < 1) {
        throw ConfigError("projector needs M >= 1, D >= 1 and Z >= 1");
    }
}

AttributeProjector::AttributeProjector(std::size_t attributes, std::size_t input_dim, std::size_t embed_dim,
                                       std::vector<double> params)
    : AttributeProjector(attributes, input_dim, embed_dim) {
    if (params.size() != params_.size()) {
        throw DataError("projector payload has " + std::to_string(params.size()) + " values, expected " +
                        std::to_string(params_.size()));
    }
    for (double v : params) {
        if (!std::isfinite(v)) throw DataError("projector parameter is not finite");
    }
    params_ = std::move(params);
}

AttributeProjector AttributeProjector::random_init(std::size_t attributes, std::size_t input_dim,
                                                   std::size_t embed_dim, std::uint64_t seed) {
    AttributeProjector p(attributes, input_dim, embed_dim);
    Rng rng(seed, Stream::val_init);
    const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
    for (std::size_t m = 0; m < attributes; ++m) {
        for (double& w : p.weights(m)) w = rng.uniform(-bound, bound);
    }
    return p;
}

void ValConfig::validate() const {
    if (attributes < 1) throw ConfigError("attributes (M) must be >= 1");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be a finite value >= 0");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be positive");
    if (batch_size < 1) throw ConfigError("batch size must be positive");
}

Matrix project_attributes(const AttributeProjector& projector, std::span<const double> x) {
    const std::size_t d = projector.input_dim();
    const std::size_t z = projector.embed_dim();
    if (x.size() != d) {
        throw DataError("dimension mismatch: feature has " + std::to_string(x.size()) + " entries, projector expects " +
                        std::to_string(d));
    }
    Matrix v(projector.attributes(), z);
    for (std::size_t m = 0; m < projector.attributes(); ++m) {
        const auto a = projector.weights(m);
        const auto b = projector.bias(m);
        for (std::size_t r = 0; r < z; ++r) {
            v(m, r) = dot(a.subspan(r * d, d), x) + b[r];
        }
    }
    return v;
}

std::vector<double> class_scores(const Matrix& attributes, const EmbeddingMatrix& embeddings,
                                 std::vector<std::size_t>* argmax) {
    if (attributes.cols() != embeddings.dim()) {
        throw DataError("dimension mismatch: attributes have width " + std::to_string(attributes.cols()) +
                        ", embeddings " + std::to_string(embeddings.dim()));
    }
    const std::size_t classes = embeddings.classes();
    std::vector<double> scores(classes);
    if (argmax) argmax->assign(classes, 0);
    for (std::size_t c = 0; c < classes; ++c) {
        double best = dot(attributes.row(0), embeddings.row(c));
        std::size_t best_m = 0;
        for (std::size_t m = 1; m < attributes.rows(); ++m) {
            const double s = dot(attributes.row(m), embeddings.row(c));
            if (s > best) {
                best = s;
                best_m = m;
            }
        }
        scores[c] = best;
        if (argmax) (*argmax)[c] = best_m;
    }
    return scores;
}

double rank_weight(std::span<const double> y) {
    std::size_t pos = 0;
    std::size_t neg = 0;
    for (double v : y) {
        pos += (v == 1.0);
        neg += (v == 0.0);
    }
    if (pos == 0 || neg == 0) return 0.0;
    return 1.0 / (static_cast<double>(pos) * static_cast<double>(neg));
}

namespace {

void check_label_width(std::span<const double> y, const EmbeddingMatrix& embeddings) {
    if (y.size() != embeddings.classes()) {
        throw DataError("dimension mismatch: label vector has " + std::to_string(y.size()) + " entries for " +
                        std::to_string(embeddings.classes()) + " classes");
    }
}

double ranking_loss_from_scores(std::span<const double> scores, std::span<const double> y) {
    double loss = 0.0;
    for (std::size_t p = 0; p < y.size(); ++p) {
        if (y[p] != 1.0) continue;
        for (std::size_t n = 0; n < y.size(); ++n) {
            if (y[n] != 0.0) continue;
            loss += softplus(scores[n] - scores[p]);
        }
    }
    return loss;
}

struct SampleTerms {
    double objective = 0.0;
    Matrix grad_attributes;  // d objective / d V, M x Z
};

// Objective of one sample and its gradient with respect to V.
SampleTerms sample_terms(const Matrix& v, const EmbeddingMatrix& embeddings, std::span<const double> y, double beta,
                         bool want_grad) {
    SampleTerms out;
    const std::size_t z = v.cols();
    if (want_grad) out.grad_attributes = Matrix(v.rows(), z);

    const double omega = rank_weight(y);
    if (omega > 0.0) {
        std::vector<std::size_t> argmax;
        const auto scores = class_scores(v, embeddings, want_grad ? &argmax : nullptr);
        out.objective += omega * ranking_loss_from_scores(scores, y);
        if (want_grad) {
            std::vector<double> d_scores(scores.size(), 0.0);
            for (std::size_t p = 0; p < y.size(); ++p) {
                if (y[p] != 1.0) continue;
                for (std::size_t n = 0; n < y.size(); ++n) {
                    if (y[n] != 0.0) continue;
                    const double g = sigmoid(scores[n] - scores[p]);
                    d_scores[n] += g;
                    d_scores[p] -= g;
                }
            }
            for (std::size_t c = 0; c < scores.size(); ++c) {
                const double g = omega * d_scores[c];
                auto row = out.grad_attributes.row(argmax[c]);
                const auto w = embeddings.row(c);
                for (std::size_t k = 0; k < z; ++k) row[k] += g * w[k];
            }
        }
    }

    if (beta != 0.0) {
        out.objective += beta * reg_loss(v);
        if (want_grad) {
            const double scale = 2.0 * beta / static_cast<double>(z - 1);
            for (std::size_t m = 0; m < v.rows(); ++m) {
                const auto row = v.row(m);
                const double mean = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(z);
                auto g = out.grad_attributes.row(m);
                for (std::size_t k = 0; k < z; ++k) g[k] += scale * (row[k] - mean);
            }
        }
    }
    return out;
}

void check_batch(const AttributeProjector& projector, const Dataset& data, std::span<const std::size_t> batch,
                 const EmbeddingMatrix& embeddings) {
    if (batch.empty()) throw ConfigError("batch must be nonempty");
    if (projector.embed_dim() != embeddings.dim()) {
        throw DataError("dimension mismatch: projector emits width " + std::to_string(projector.embed_dim()) +
                        ", embeddings have width " + std::to_string(embeddings.dim()));
    }
    if (data.classes() != embeddings.classes()) {
        throw DataError("dimension mismatch: dataset has " + std::to_string(data.classes()) + " classes, embeddings " +
                        std::to_string(embeddings.classes()));
    }
    for (std::size_t i : batch) {
        if (i >= data.samples()) throw DataError("batch index " + std::to_string(i) + " out of range");
    }
}

}  // namespace

double val_loss(const Matrix& attributes, const EmbeddingMatrix& embeddings, std::span<const double> y) {
    check_label_width(y, embeddings);
    const auto scores = class_scores(attributes, embeddings);
    return ranking_loss_from_scores(scores, y);
}

double reg_loss(const Matrix& attributes) {
    const std::size_t z = attributes.cols();
    if (z < 2) throw DataError("variance regularizer needs Z >= 2");
    double total = 0.0;
    for (std::size_t m = 0; m < attributes.rows(); ++m) {
        const auto row = attributes.row(m);
        const double mean = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(z);
        double ss = 0.0;
        for (double v : row) ss += (v - mean) * (v - mean);
        total += ss / static_cast<double>(z - 1);
    }
    return total;
}

double batch_objective(const AttributeProjector& projector, const Dataset& data, std::span<const std::size_t> batch,
                       const EmbeddingMatrix& embeddings, double beta) {
    check_batch(projector, data, batch, embeddings);
    double total = 0.0;
    for (std::size_t i : batch) {
        const Matrix v = project_attributes(projector, data.features.row(i));
        total += sample_terms(v, embeddings, data.labels.row(i), beta, false).objective;
    }
    return total / static_cast<double>(batch.size());
}

namespace {

// Gradient and summed objective over a batch. Per-sample work may run on
// several threads; accumulation into the parameter gradient happens in
// batch order so the result does not depend on the thread count.
double accumulate_batch(const AttributeProjector& projector, const Dataset& data, std::span<const std::size_t> batch,
                        const EmbeddingMatrix& embeddings, double beta, std::vector<double>& grad) {
    std::vector<SampleTerms> terms(batch.size());
    parallel_for(
        batch.size(),
        [&](std::size_t begin, std::size_t end) {
            for (std::size_t b = begin; b < end; ++b) {
                const std::size_t i = batch[b];
                const Matrix v = project_attributes(projector, data.features.row(i));
                terms[b] = sample_terms(v, embeddings, data.labels.row(i), beta, true);
            }
        },
        8);

    const std::size_t d = projector.input_dim();
    const std::size_t z = projector.embed_dim();
    const double inv = 1.0 / static_cast<double>(batch.size());
    grad.assign(projector.params().size(), 0.0);
    double total = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        total += terms[b].objective;
        const auto x = data.features.row(batch[b]);
        const Matrix& g = terms[b].grad_attributes;
        for (std::size_t m = 0; m < projector.attributes(); ++m) {
            double* head = grad.data() + m * projector.head_size();
            double* bias = head + z * d;
            for (std::size_t r = 0; r < z; ++r) {
                const double gr = g(m, r) * inv;
                if (gr == 0.0) continue;
                double* wrow = head + r * d;
                for (std::size_t k = 0; k < d; ++k) wrow[k] += gr * x[k];
                bias[r] += gr;
            }
        }
    }
    return total;
}

}  // namespace

std::vector<double> grad_batch_objective(const AttributeProjector& projector, const Dataset& data,
                                         std::span<const std::size_t> batch, const EmbeddingMatrix& embeddings,
                                         double beta) {
    check_batch(projector, data, batch, embeddings);
    std::vector<double> grad;
    accumulate_batch(projector, data, batch, embeddings, beta, grad);
    return grad;
}

ValTrainResult train_val(const Dataset& data, const EmbeddingMatrix& embeddings, const ValConfig& config) {
    config.validate();
    if (data.labels.kind() != LabelKind::binary) throw DataError("attribute learning needs binary labels");
    if (data.classes() != embeddings.classes()) {
        throw DataError("dimension mismatch: dataset has " + std::to_string(data.classes()) + " classes, embeddings " +
                        std::to_string(embeddings.classes()));
    }

    ValTrainResult result{
        AttributeProjector::random_init(config.attributes, data.feature_dim(), embeddings.dim(), config.seed), {}};
    auto& projector = result.projector;
    Adam adam(projector.params().size());
    Rng shuffle_rng(config.seed, Stream::val_shuffle);

    std::vector<std::size_t> order(data.samples());
    std::vector<double> grad;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle_rng.shuffle(std::span<std::size_t>(order));
        const double lr = config.lr_schedule == LrSchedule::cosine
                              ? cosine_annealed(config.learning_rate, epoch, config.epochs)
                              : config.learning_rate;
        double epoch_total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            // members come from the shuffle; the reduction runs in ascending sample index
            std::sort(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
            const std::span<const std::size_t> batch(order.data() + start, end - start);
            const double batch_total = accumulate_batch(projector, data, batch, embeddings, config.beta, grad);
            if (!std::isfinite(batch_total)) {
                throw DivergenceError("attribute learning diverged: non-finite objective in epoch " +
                                      std::to_string(epoch) + " at batch starting " + std::to_string(start));
            }
            epoch_total += batch_total;
            adam.step(projector.params(), grad, lr);
            if (!parameters_in_range(projector.params())) {
                throw DivergenceError("attribute learning diverged: parameters out of range in epoch " +
                                      std::to_string(epoch) + " at batch starting " + std::to_string(start));
            }
        }
        result.epoch_loss.push_back(epoch_total / static_cast<double>(order.size()));
    }
    return result;
}

}  // namespace sgval
