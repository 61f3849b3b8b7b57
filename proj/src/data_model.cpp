#include "sgval/data_model.hpp"

#include <cmath>

namespace sgval {

namespace {

void check_labels(const Matrix& values, LabelKind kind) {
    for (std::size_t i = 0; i < values.rows(); ++i) {
        for (std::size_t c = 0; c < values.cols(); ++c) {
            const double v = values(i, c);
            if (!std::isfinite(v)) {
                throw DataError("label (" + std::to_string(i) + ", " + std::to_string(c) + ") is not finite");
            }
            if (kind == LabelKind::binary ? (v != 0.0 && v != 1.0) : (v < 0.0 || v > 1.0)) {
                throw DataError("label (" + std::to_string(i) + ", " + std::to_string(c) + ") = " +
                                std::to_string(v) + " outside " + (kind == LabelKind::binary ? "{0, 1}" : "[0, 1]"));
            }
        }
    }
}

}  // namespace

LabelMatrix::LabelMatrix(Matrix values, LabelKind kind) : values_(std::move(values)), kind_(kind) {
    check_labels(values_, kind_);
}

LabelMatrix LabelMatrix::infer(Matrix values) {
    check_labels(values, LabelKind::soft);
    bool binary = true;
    for (double v : values.values()) {
        if (v != 0.0 && v != 1.0) {
            binary = false;
            break;
        }
    }
    return LabelMatrix(std::move(values), binary ? LabelKind::binary : LabelKind::soft);
}

Matrix l2_normalize_rows(const Matrix& m) {
    Matrix out = m;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        const double norm = std::sqrt(dot(row, row));
        if (!std::isfinite(norm)) throw DataError("row " + std::to_string(r) + " has a non-finite entry");
        if (norm == 0.0) throw DataError("row " + std::to_string(r) + " is the zero vector and cannot be normalized");
        for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = row[c] / norm;
    }
    return out;
}

EmbeddingMatrix EmbeddingMatrix::from_raw(Matrix raw) {
    if (raw.rows() < 1) throw DataError("embedding matrix has no rows");
    if (raw.cols() < 2) throw DataError("embedding dimension must be at least 2, got " + std::to_string(raw.cols()));
    return EmbeddingMatrix(l2_normalize_rows(raw));
}

std::vector<std::string> default_class_names(std::size_t classes) {
    std::vector<std::string> names;
    names.reserve(classes);
    for (std::size_t c = 0; c < classes; ++c) names.push_back("class_" + std::to_string(c));
    return names;
}

Dataset validate_dataset(Matrix features, LabelMatrix labels, std::vector<std::string> class_names) {
    if (features.rows() < 1) throw DataError("dataset needs at least one sample");
    if (features.cols() < 1) throw DataError("feature dimension must be at least 1");
    if (labels.classes() < 2) throw DataError("need at least 2 classes, got " + std::to_string(labels.classes()));
    if (features.rows() != labels.samples()) {
        throw DataError("dimension mismatch: " + std::to_string(features.rows()) + " feature rows vs " +
                        std::to_string(labels.samples()) + " label rows");
    }
    for (std::size_t i = 0; i < features.rows(); ++i) {
        for (double v : features.row(i)) {
            if (!std::isfinite(v)) throw DataError("non-finite feature value in sample " + std::to_string(i));
        }
    }
    if (class_names.empty()) class_names = default_class_names(labels.classes());
    if (class_names.size() != labels.classes()) {
        throw DataError("dimension mismatch: " + std::to_string(class_names.size()) + " class names for " +
                        std::to_string(labels.classes()) + " label columns");
    }
    return Dataset{std::move(features), std::move(labels), std::move(class_names)};
}

Dataset validate_dataset(Matrix features, LabelMatrix labels, const EmbeddingMatrix& embeddings,
                         std::vector<std::string> class_names) {
    if (embeddings.classes() != labels.classes()) {
        throw DataError("dimension mismatch: " + std::to_string(embeddings.classes()) + " embedding rows vs " +
                        std::to_string(labels.classes()) + " label columns");
    }
    return validate_dataset(std::move(features), std::move(labels), std::move(class_names));
}

std::size_t count_positives(std::span<const double> y) {
    std::size_t p = 0;
    for (double v : y) p += (v == 1.0);
    return p;
}

}  // namespace sgval
