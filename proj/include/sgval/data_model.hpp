#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sgval/core.hpp"

namespace sgval {

enum class LabelKind { binary, soft };

/// N x C multi-label targets. Binary entries are exactly 0 or 1; soft
/// entries (relabeled or smoothed targets) lie in [0, 1].
class LabelMatrix {
public:
    LabelMatrix() = default;
    /// Throws DataError if an entry violates `kind`.
    LabelMatrix(Matrix values, LabelKind kind);
    /// Binary iff every entry is 0 or 1, soft otherwise.
    static LabelMatrix infer(Matrix values);

    const Matrix& values() const noexcept { return values_; }
    LabelKind kind() const noexcept { return kind_; }
    std::size_t samples() const noexcept { return values_.rows(); }
    std::size_t classes() const noexcept { return values_.cols(); }
    std::span<const double> row(std::size_t i) const { return values_.row(i); }

    friend bool operator==(const LabelMatrix&, const LabelMatrix&) = default;

private:
    Matrix values_;
    LabelKind kind_ = LabelKind::binary;
};

/// C x Z class embeddings with unit-norm rows.
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    /// Normalizes each row. Throws DataError on Z < 2, a zero row or a
    /// non-finite entry.
    static EmbeddingMatrix from_raw(Matrix raw);

    const Matrix& rows() const noexcept { return rows_; }
    std::size_t classes() const noexcept { return rows_.rows(); }
    std::size_t dim() const noexcept { return rows_.cols(); }
    std::span<const double> row(std::size_t c) const { return rows_.row(c); }

private:
    explicit EmbeddingMatrix(Matrix rows) : rows_(std::move(rows)) {}
    Matrix rows_;
};

struct Dataset {
    Matrix features;  // N x D
    LabelMatrix labels;
    std::vector<std::string> class_names;

    std::size_t samples() const noexcept { return features.rows(); }
    std::size_t feature_dim() const noexcept { return features.cols(); }
    std::size_t classes() const noexcept { return labels.classes(); }
};

/// Builds a Dataset after checking shape agreement and finiteness. Class
/// names default to "class_<c>" when empty.
Dataset validate_dataset(Matrix features, LabelMatrix labels, const EmbeddingMatrix& embeddings,
                         std::vector<std::string> class_names = {});

/// Same checks without an embedding matrix (classifier stages).
Dataset validate_dataset(Matrix features, LabelMatrix labels, std::vector<std::string> class_names = {});

Matrix l2_normalize_rows(const Matrix& m);

std::vector<std::string> default_class_names(std::size_t classes);

/// Number of entries equal to 1 in a binary label row.
std::size_t count_positives(std::span<const double> y);

}  // namespace sgval
