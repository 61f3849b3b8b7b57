#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sgval/classifier.hpp"
#include "sgval/data_model.hpp"
#include "sgval/metrics.hpp"
#include "sgval/relabeler.hpp"
#include "sgval/synth.hpp"
#include "sgval/val_learner.hpp"

namespace sgval {

struct PipelineConfig {
    SynthConfig synth;
    std::size_t test_n = 1000;
    ValConfig val;
    RelabelConfig relabel;
    ClfConfig clf;
    double epsilon = 0.1;  // label smoothing baseline

    /// Sets every stage's seed.
    void set_seed(std::uint64_t seed);
    void validate() const;
};

struct PipelineInputs {
    Dataset train;  // binary, possibly noisy labels
    EmbeddingMatrix embeddings;
    std::optional<LabelMatrix> true_labels;
    std::optional<std::vector<std::size_t>> corrupted_indices;
    std::optional<Dataset> test;  // binary labels
};

/// Train split from config.synth, plus a noise-free test split of
/// config.test_n samples from the same generator (sample stream 1).
PipelineInputs synthetic_inputs(const PipelineConfig& config);

struct PipelineReport {
    std::vector<double> val_epoch_loss;
    CleanNoisySplit split;
    std::size_t samples = 0;
    std::optional<RecoveryReport> recovery;
    std::optional<DetectionMetrics> flag_all_baseline;  // detector that flags every sample
    std::optional<EvalReport> auc_noisy;
    std::optional<EvalReport> auc_relabeled;
    std::optional<EvalReport> auc_smoothed;
    std::vector<std::string> class_names;
};

/// Runs attribute learning, detection, relabeling and, when a test split
/// is present, trains classifiers on the noisy, relabeled and smoothed
/// labels. `relabeled_out` receives the relabeled dataset when non-null.
PipelineReport run_pipeline(const PipelineInputs& inputs, const PipelineConfig& config,
                            Dataset* relabeled_out = nullptr);

void write_report_text(std::ostream& out, const PipelineReport& report);

/// Long-format CSV: header "section,key,value".
void write_report_csv(std::ostream& out, const PipelineReport& report);

}  // namespace sgval
