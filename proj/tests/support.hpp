#pragma once

// Random instances, a scratch directory and brute-force reference
// implementations shared by the unit tests and the acceptance runner. The
// references are written as the plainest possible loops and never call the
// library routine they check.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "sgval/core.hpp"
#include "sgval/data_model.hpp"
#include "sgval/noise_detector.hpp"
#include "sgval/val_learner.hpp"

namespace sgval::testing {

using Engine = std::mt19937_64;

inline double uniform(Engine& rng, double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(Engine& rng, std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline Matrix random_matrix(Engine& rng, std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = uniform(rng, lo, hi);
    return m;
}

inline EmbeddingMatrix random_embeddings(Engine& rng, std::size_t classes, std::size_t dim) {
    return EmbeddingMatrix::from_raw(random_matrix(rng, classes, dim));
}

// Binary label vector; with `mixed` it holds at least one 1 and one 0.
inline std::vector<double> random_binary(Engine& rng, std::size_t classes, bool mixed = true) {
    std::vector<double> y(classes);
    for (;;) {
        std::size_t pos = 0;
        for (double& v : y) {
            v = uniform(rng, 0.0, 1.0) < 0.4 ? 1.0 : 0.0;
            pos += v == 1.0;
        }
        if (!mixed || (pos > 0 && pos < classes)) return y;
    }
}

inline LabelMatrix random_labels(Engine& rng, std::size_t n, std::size_t classes) {
    Matrix m(n, classes);
    for (std::size_t i = 0; i < n; ++i) {
        const auto y = random_binary(rng, classes);
        std::copy(y.begin(), y.end(), m.row(i).begin());
    }
    return LabelMatrix(std::move(m), LabelKind::binary);
}

inline AttributeProjector random_projector(Engine& rng, std::size_t m, std::size_t d, std::size_t z,
                                           double scale = 1.0) {
    std::vector<double> params(m * z * (d + 1));
    for (double& v : params) v = uniform(rng, -scale, scale);
    return AttributeProjector(m, d, z, std::move(params));
}

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("sgval_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// ---- oracles -------------------------------------------------------------

inline Matrix naive_projection(const AttributeProjector& p, std::span<const double> x) {
    const std::size_t d = p.input_dim();
    const std::size_t z = p.embed_dim();
    Matrix v(p.attributes(), z);
    for (std::size_t m = 0; m < p.attributes(); ++m) {
        const auto& params = p.params();
        const std::size_t base = m * z * (d + 1);
        for (std::size_t r = 0; r < z; ++r) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += params[base + r * d + k] * x[k];
            v(m, r) = s + params[base + z * d + r];
        }
    }
    return v;
}

// s_c = max over attribute rows, computed from scratch.
inline std::vector<double> oracle_scores(const Matrix& v, const Matrix& w) {
    std::vector<double> s(w.rows(), -std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < w.rows(); ++c) {
        for (std::size_t m = 0; m < v.rows(); ++m) {
            double t = 0.0;
            for (std::size_t k = 0; k < v.cols(); ++k) t += v(m, k) * w(c, k);
            if (t > s[c]) s[c] = t;
        }
    }
    return s;
}

inline double oracle_softplus(double x) {
    return x > 30.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Every (positive, negative) pair in class order.
inline double oracle_val_loss(const Matrix& v, const Matrix& w, std::span<const double> y) {
    const auto s = oracle_scores(v, w);
    double total = 0.0;
    for (std::size_t p = 0; p < y.size(); ++p) {
        for (std::size_t n = 0; n < y.size(); ++n) {
            if (y[p] == 1.0 && y[n] == 0.0) total += oracle_softplus(s[n] - s[p]);
        }
    }
    return total;
}

inline double two_pass_variance_sum(const Matrix& v) {
    double total = 0.0;
    for (std::size_t m = 0; m < v.rows(); ++m) {
        double mean = 0.0;
        for (std::size_t k = 0; k < v.cols(); ++k) mean += v(m, k);
        mean /= static_cast<double>(v.cols());
        double ss = 0.0;
        for (std::size_t k = 0; k < v.cols(); ++k) ss += (v(m, k) - mean) * (v(m, k) - mean);
        total += ss / static_cast<double>(v.cols() - 1);
    }
    return total;
}

// Exhaustive neighbor search: all (query attribute, node) pairs, sorted by
// edge weight, then owner, node and query attribute.
inline std::vector<std::size_t> brute_knn(const Matrix& nodes, std::size_t m_count, std::size_t query,
                                          std::size_t k) {
    std::vector<std::tuple<double, std::size_t, std::size_t, std::size_t>> pairs;
    for (std::size_t qa = 0; qa < m_count; ++qa) {
        for (std::size_t node = 0; node < nodes.rows(); ++node) {
            const std::size_t owner = node / m_count;
            if (owner == query) continue;
            double sq = 0.0;
            for (std::size_t t = 0; t < nodes.cols(); ++t) {
                const double diff = nodes(query * m_count + qa, t) - nodes(node, t);
                sq += diff * diff;
            }
            const double weight = 1.0 / std::max(std::sqrt(sq), 1e-12);
            pairs.emplace_back(-weight, owner, node, qa);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    std::set<std::size_t> owners;
    for (std::size_t i = 0; i < k; ++i) owners.insert(std::get<1>(pairs[i]));
    return {owners.begin(), owners.end()};
}

inline double pairwise_auc(std::span<const double> scores, std::span<const double> labels) {
    double good = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1.0) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0.0) continue;
            pairs += 1.0;
            if (scores[i] > scores[j]) good += 1.0;
            if (scores[i] == scores[j]) good += 0.5;
        }
    }
    return good / pairs;
}

// Central differences of f at params, one coordinate at a time.
inline std::vector<double> finite_difference(const std::function<double(std::span<const double>)>& f,
                                             std::vector<double> params, double step) {
    std::vector<double> g(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double keep = params[i];
        params[i] = keep + step;
        const double up = f(params);
        params[i] = keep - step;
        const double down = f(params);
        params[i] = keep;
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

inline double relative_error(double analytic, double numeric) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / scale;
}

// Smallest gap between the best and second-best attribute score over all
// classes and samples; instances with a small gap sit near a kink of the max.
inline double max_gap(const Matrix& v, const Matrix& w) {
    double gap = std::numeric_limits<double>::infinity();
    if (v.rows() < 2) return gap;
    for (std::size_t c = 0; c < w.rows(); ++c) {
        std::vector<double> s;
        for (std::size_t m = 0; m < v.rows(); ++m) {
            double t = 0.0;
            for (std::size_t k = 0; k < v.cols(); ++k) t += v(m, k) * w(c, k);
            s.push_back(t);
        }
        std::sort(s.rbegin(), s.rend());
        gap = std::min(gap, s[0] - s[1]);
    }
    return gap;
}

}  // namespace sgval::testing
