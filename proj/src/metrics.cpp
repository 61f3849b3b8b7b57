#include "sgval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgval/parallel.hpp"

namespace sgval {

double auc_roc(std::span<const double> scores, std::span<const double> labels) {
    if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Walk groups of equal score in ascending order. Each positive beats every
    // negative seen in earlier groups and ties with negatives in its own group.
    double concordant = 0.0;
    double tied = 0.0;
    double negatives_below = 0.0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    for (std::size_t start = 0; start < order.size();) {
        std::size_t end = start;
        double group_pos = 0.0;
        double group_neg = 0.0;
        while (end < order.size() && scores[order[end]] == scores[order[start]]) {
            const double y = labels[order[end]];
            if (y == 1.0) {
                group_pos += 1.0;
            } else if (y == 0.0) {
                group_neg += 1.0;
            } else {
                throw DataError("AUC needs binary labels");
            }
            ++end;
        }
        concordant += group_pos * negatives_below;
        tied += group_pos * group_neg;
        negatives_below += group_neg;
        positives += static_cast<std::size_t>(group_pos);
        negatives += static_cast<std::size_t>(group_neg);
        start = end;
    }
    if (positives == 0 || negatives == 0) throw DataError("AUC undefined: labels contain a single class");
    return (concordant + 0.5 * tied) / (static_cast<double>(positives) * static_cast<double>(negatives));
}

EvalReport evaluate_scores(const Matrix& scores, const LabelMatrix& labels) {
    if (labels.kind() != LabelKind::binary) throw DataError("evaluation needs binary test labels");
    if (scores.rows() != labels.samples() || scores.cols() != labels.classes()) {
        throw DataError("dimension mismatch between scores and labels");
    }
    const std::size_t n = labels.samples();
    const std::size_t classes = labels.classes();
    EvalReport report;
    report.per_class_auc.resize(classes);
    std::vector<std::string> reasons(classes);
    parallel_for(classes, [&](std::size_t begin, std::size_t end) {
        std::vector<double> s(n);
        std::vector<double> y(n);
        for (std::size_t c = begin; c < end; ++c) {
            std::size_t pos = 0;
            for (std::size_t i = 0; i < n; ++i) {
                s[i] = scores(i, c);
                y[i] = labels.values()(i, c);
                pos += (y[i] == 1.0);
            }
            if (pos == 0) {
                reasons[c] = "no positive samples";
            } else if (pos == n) {
                reasons[c] = "no negative samples";
            } else {
                report.per_class_auc[c] = auc_roc(s, y);
            }
        }
    });

    double sum = 0.0;
    std::size_t defined = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        if (report.per_class_auc[c]) {
            sum += *report.per_class_auc[c];
            ++defined;
        } else {
            report.skipped_classes.push_back({c, reasons[c]});
        }
    }
    if (defined == 0) throw DataError("no evaluable class: every class lacks positives or negatives");
    report.mean_auc = sum / static_cast<double>(defined);
    return report;
}

EvalReport evaluate(const MultiLabelClassifier& classifier, const Dataset& test) {
    if (test.feature_dim() != classifier.input_dim() || test.classes() != classifier.classes()) {
        throw DataError("dimension mismatch between classifier and test set");
    }
    Matrix scores(test.samples(), test.classes());
    for (std::size_t i = 0; i < test.samples(); ++i) {
        const auto p = predict(classifier, test.features.row(i));
        std::copy(p.begin(), p.end(), scores.row(i).begin());
    }
    return evaluate_scores(scores, test.labels);
}

DetectionMetrics detection_metrics(const CleanNoisySplit& split, std::span<const std::size_t> ground_truth_noisy) {
    std::vector<std::size_t> predicted = split.noisy_indices;
    std::vector<std::size_t> truth(ground_truth_noisy.begin(), ground_truth_noisy.end());
    std::sort(predicted.begin(), predicted.end());
    std::sort(truth.begin(), truth.end());
    std::vector<std::size_t> hit;
    std::set_intersection(predicted.begin(), predicted.end(), truth.begin(), truth.end(), std::back_inserter(hit));

    DetectionMetrics m;
    const double tp = static_cast<double>(hit.size());
    if (!predicted.empty()) m.precision = tp / static_cast<double>(predicted.size());
    if (!truth.empty()) m.recall = tp / static_cast<double>(truth.size());
    if (m.precision + m.recall > 0.0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

double mean_l1_distance(const LabelMatrix& a, const LabelMatrix& b) {
    if (a.samples() != b.samples() || a.classes() != b.classes()) {
        throw DataError("label matrices are misaligned");
    }
    if (a.samples() == 0) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < a.samples(); ++i) {
        double row = 0.0;
        const auto ra = a.row(i);
        const auto rb = b.row(i);
        for (std::size_t c = 0; c < ra.size(); ++c) row += std::abs(ra[c] - rb[c]);
        total += row;
    }
    return total / static_cast<double>(a.samples());
}

RecoveryReport recovery_metrics(const LabelMatrix& noisy, const LabelMatrix& relabeled, const LabelMatrix& truth,
                                const CleanNoisySplit& split, std::span<const std::size_t> ground_truth_noisy) {
    RecoveryReport r;
    r.l1_before = mean_l1_distance(noisy, truth);
    r.l1_after = mean_l1_distance(relabeled, truth);
    r.detection = detection_metrics(split, ground_truth_noisy);
    return r;
}

}  // namespace sgval
