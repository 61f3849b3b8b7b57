#include "sgval/synth.hpp"

#include <cmath>
#include <numeric>

#include "sgval/rng.hpp"

namespace sgval {

void SynthConfig::validate() const {
    if (n < 1) throw ConfigError("n must be >= 1");
    if (c < 2) throw ConfigError("c must be >= 2");
    if (z < 2) throw ConfigError("z must be >= 2");
    if (d < 1) throw ConfigError("d must be >= 1");
    if (max_positives < 1 || max_positives >= c) throw ConfigError("max_positives must lie in [1, c)");
    if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw ConfigError("noise rate must lie in [0, 1]");
    if (!(flip_prob > 0.0 && flip_prob <= 1.0)) throw ConfigError("flip probability must lie in (0, 1]");
    if (!(feature_noise >= 0.0) || !std::isfinite(feature_noise)) throw ConfigError("feature noise must be >= 0");
}

EmbeddingMatrix gen_embeddings(std::size_t c, std::size_t z, std::uint64_t seed) {
    if (z < 2) throw ConfigError("embedding dimension must be >= 2");
    Rng rng(seed, Stream::embeddings);
    Matrix raw(c, z);
    for (std::size_t r = 0; r < c; ++r) {
        // a zero draw has probability zero, but keep the row valid regardless
        do {
            for (double& v : raw.row(r)) v = rng.normal();
        } while (dot(raw.row(r), raw.row(r)) == 0.0);
    }
    return EmbeddingMatrix::from_raw(std::move(raw));
}

double max_abs_cosine(const EmbeddingMatrix& embeddings) {
    double worst = 0.0;
    for (std::size_t a = 0; a < embeddings.classes(); ++a) {
        for (std::size_t b = a + 1; b < embeddings.classes(); ++b) {
            worst = std::max(worst, std::abs(dot(embeddings.row(a), embeddings.row(b))));
        }
    }
    return worst;
}

Matrix mixing_matrix(std::size_t d, std::size_t z, std::uint64_t seed) {
    Rng rng(seed, Stream::mixing);
    Matrix b(d, z);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (double& v : b.values()) v = scale * rng.normal();
    return b;
}

Dataset gen_clean(const SynthConfig& config, const EmbeddingMatrix& embeddings) {
    config.validate();
    if (embeddings.classes() != config.c || embeddings.dim() != config.z) {
        throw ConfigError("embedding matrix does not match c x z of the configuration");
    }
    const Matrix mixing = mixing_matrix(config.d, config.z, config.seed);
    Rng label_rng(config.seed, Stream::labels, config.sample_stream);
    Rng feature_rng(config.seed, Stream::features, config.sample_stream);

    Matrix labels(config.n, config.c);
    Matrix features(config.n, config.d);
    std::vector<std::size_t> classes(config.c);
    std::vector<double> mean(config.z);
    for (std::size_t i = 0; i < config.n; ++i) {
        const std::size_t k = 1 + static_cast<std::size_t>(label_rng.below(config.max_positives));
        // partial Fisher-Yates: the first k entries become a uniform k-subset
        std::iota(classes.begin(), classes.end(), std::size_t{0});
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t pick = j + static_cast<std::size_t>(label_rng.below(config.c - j));
            std::swap(classes[j], classes[pick]);
        }
        std::fill(mean.begin(), mean.end(), 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            labels(i, classes[j]) = 1.0;
        }
        // accumulate in class order so equal positive sets give equal features
        for (std::size_t cls = 0; cls < config.c; ++cls) {
            if (labels(i, cls) != 1.0) continue;
            const auto w = embeddings.row(cls);
            for (std::size_t t = 0; t < config.z; ++t) mean[t] += w[t];
        }
        for (double& v : mean) v /= static_cast<double>(k);
        for (std::size_t r = 0; r < config.d; ++r) {
            features(i, r) = dot(mixing.row(r), mean) + config.feature_noise * feature_rng.normal();
        }
    }
    return validate_dataset(std::move(features), LabelMatrix(std::move(labels), LabelKind::binary), embeddings);
}

NoisyLabels inject_noise(const LabelMatrix& clean, double noise_rate, double flip_prob, std::uint64_t seed,
                         std::uint64_t sample_stream) {
    if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw ConfigError("noise rate must lie in [0, 1]");
    if (!(flip_prob > 0.0 && flip_prob <= 1.0)) throw ConfigError("flip probability must lie in (0, 1]");
    if (clean.kind() != LabelKind::binary) throw DataError("noise injection expects binary labels");

    Rng rng(seed, Stream::noise, sample_stream);
    Matrix out = clean.values();
    NoisyLabels result;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        if (!(rng.uniform() < noise_rate)) continue;
        auto row = out.row(i);
        const auto original = clean.row(i);
        bool flipped = false;
        while (!flipped) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                const bool flip = rng.uniform() < flip_prob;
                row[c] = flip ? 1.0 - original[c] : original[c];
                flipped = flipped || flip;
            }
        }
        result.corrupted_indices.push_back(i);
    }
    result.labels = LabelMatrix(std::move(out), LabelKind::binary);
    return result;
}

SynthOutput generate(const SynthConfig& config) {
    config.validate();
    SynthOutput out;
    out.embeddings = gen_embeddings(config.c, config.z, config.seed);
    out.clean = gen_clean(config, out.embeddings);
    auto noisy = inject_noise(out.clean.labels, config.noise_rate, config.flip_prob, config.seed, config.sample_stream);
    out.noisy = Dataset{out.clean.features, std::move(noisy.labels), out.clean.class_names};
    out.corrupted_indices = std::move(noisy.corrupted_indices);
    return out;
}

}  // namespace sgval
