#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgval/classifier.hpp"
#include "sgval/data_model.hpp"
#include "sgval/noise_detector.hpp"

namespace sgval {

/// Mann-Whitney AUC: (concordant + 0.5 * tied) / (P * Q), via one sort.
/// Throws DataError unless both label values occur.
double auc_roc(std::span<const double> scores, std::span<const double> labels);

struct SkippedClass {
    std::size_t index;
    std::string reason;
};

struct EvalReport {
    std::vector<std::optional<double>> per_class_auc;
    double mean_auc = 0.0;  // over classes with a defined AUC
    std::vector<SkippedClass> skipped_classes;
};

/// Per-class AUC of `scores` (N x C) against binary labels; classes lacking
/// positives or negatives are skipped.
EvalReport evaluate_scores(const Matrix& scores, const LabelMatrix& labels);
EvalReport evaluate(const MultiLabelClassifier& classifier, const Dataset& test);

struct DetectionMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// "Noisy" is the positive class. Empty denominators give 0.
DetectionMetrics detection_metrics(const CleanNoisySplit& split, std::span<const std::size_t> ground_truth_noisy);

struct RecoveryReport {
    DetectionMetrics detection;
    double l1_before = 0.0;  // mean ||y_noisy - y_true||_1
    double l1_after = 0.0;   // mean ||y_tilde - y_true||_1
};

double mean_l1_distance(const LabelMatrix& a, const LabelMatrix& b);

RecoveryReport recovery_metrics(const LabelMatrix& noisy, const LabelMatrix& relabeled, const LabelMatrix& truth,
                                const CleanNoisySplit& split, std::span<const std::size_t> ground_truth_noisy);

}  // namespace sgval
