#include "sgval/pipeline.hpp"

#include <cstdio>

#include "sgval/dataset_io.hpp"

namespace sgval {

void PipelineConfig::set_seed(std::uint64_t seed) {
    synth.seed = seed;
    val.seed = seed;
    clf.seed = seed;
}

void PipelineConfig::validate() const {
    synth.validate();
    val.validate();
    relabel.validate();
    clf.validate();
    if (!(epsilon >= 0.0 && epsilon < 0.5)) throw ConfigError("epsilon must lie in [0, 0.5)");
}

PipelineInputs synthetic_inputs(const PipelineConfig& config) {
    config.synth.validate();
    SynthOutput train = generate(config.synth);
    PipelineInputs in{std::move(train.noisy), train.embeddings, std::move(train.clean.labels),
                      std::move(train.corrupted_indices), std::nullopt};
    if (config.test_n > 0) {
        SynthConfig test_cfg = config.synth;
        test_cfg.n = config.test_n;
        test_cfg.noise_rate = 0.0;
        test_cfg.sample_stream = 1;
        in.test = gen_clean(test_cfg, in.embeddings);
    }
    return in;
}

namespace {

template <class Stage>
auto stage(const char* name, Stage&& run) {
    try {
        return run();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(name) + ": " + e.what());
    }
}

EvalReport train_and_eval(const char* name, const Dataset& train, const Dataset& test, const ClfConfig& config) {
    return stage(name, [&] {
        const auto trained = train_classifier(train, config);
        return evaluate(trained.classifier, test);
    });
}

}  // namespace

PipelineReport run_pipeline(const PipelineInputs& inputs, const PipelineConfig& config, Dataset* relabeled_out) {
    config.validate();
    PipelineReport report;
    report.samples = inputs.train.samples();
    report.class_names = inputs.train.class_names;

    const auto val = stage("train-val", [&] { return train_val(inputs.train, inputs.embeddings, config.val); });
    report.val_epoch_loss = val.epoch_loss;

    auto relabel =
        stage("relabel", [&] { return a2s(inputs.train, val.projector, inputs.embeddings, config.relabel); });
    report.split = relabel.split;

    if (inputs.corrupted_indices) {
        std::vector<std::size_t> everyone(inputs.train.samples());
        for (std::size_t i = 0; i < everyone.size(); ++i) everyone[i] = i;
        report.flag_all_baseline = detection_metrics(CleanNoisySplit{{}, everyone}, *inputs.corrupted_indices);
        if (inputs.true_labels) {
            report.recovery = recovery_metrics(inputs.train.labels, relabel.relabeled.labels, *inputs.true_labels,
                                               relabel.split, *inputs.corrupted_indices);
        }
    }

    if (inputs.test) {
        report.auc_noisy = train_and_eval("train-clf (noisy labels)", inputs.train, *inputs.test, config.clf);
        report.auc_relabeled =
            train_and_eval("train-clf (relabeled labels)", relabel.relabeled, *inputs.test, config.clf);
        Dataset smoothed{inputs.train.features, smooth_labels(inputs.train.labels, config.epsilon),
                         inputs.train.class_names};
        report.auc_smoothed = train_and_eval("train-clf (smoothed labels)", smoothed, *inputs.test, config.clf);
    }

    if (relabeled_out) *relabeled_out = std::move(relabel.relabeled);
    return report;
}

namespace {

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

void auc_rows(std::ostream& out, const char* section, const EvalReport& r, const std::vector<std::string>& names) {
    for (std::size_t c = 0; c < r.per_class_auc.size(); ++c) {
        out << section << ',' << names[c] << ',';
        if (r.per_class_auc[c]) out << format_number(*r.per_class_auc[c]);
        out << '\n';
    }
    out << section << ",mean," << format_number(r.mean_auc) << '\n';
}

}  // namespace

void write_report_text(std::ostream& out, const PipelineReport& report) {
    out << "samples: " << report.samples << "\n";
    if (!report.val_epoch_loss.empty()) {
        out << "attribute learning objective: first epoch " << fixed(report.val_epoch_loss.front(), 6)
            << ", last epoch " << fixed(report.val_epoch_loss.back(), 6) << "\n";
    }
    out << "detected clean: " << report.split.clean_indices.size()
        << ", detected noisy: " << report.split.noisy_indices.size() << "\n";
    if (report.recovery) {
        const auto& r = *report.recovery;
        out << "detection precision " << fixed(r.detection.precision) << "  recall " << fixed(r.detection.recall)
            << "  f1 " << fixed(r.detection.f1) << "\n";
        if (report.flag_all_baseline) out << "flag-all baseline f1 " << fixed(report.flag_all_baseline->f1) << "\n";
        const double gain = r.l1_before > 0.0 ? (r.l1_before - r.l1_after) / r.l1_before : 0.0;
        out << "mean L1 to true labels: before " << fixed(r.l1_before) << ", after " << fixed(r.l1_after) << " ("
            << fixed(100.0 * gain, 2) << "% reduction)\n";
    }
    if (report.auc_noisy) {
        out << "\n" << "class";
        out << std::string(20 - 5, ' ') << "  noisy  relabeled  smoothed\n";
        for (std::size_t c = 0; c < report.class_names.size(); ++c) {
            std::string name = report.class_names[c];
            if (name.size() < 20) name += std::string(20 - name.size(), ' ');
            out << name;
            for (const auto* r : {&*report.auc_noisy, &*report.auc_relabeled, &*report.auc_smoothed}) {
                out << "  " << (r->per_class_auc[c] ? fixed(*r->per_class_auc[c]) : std::string("  -   "));
            }
            out << "\n";
        }
        out << "mean AUC" << std::string(12, ' ') << "  " << fixed(report.auc_noisy->mean_auc) << "  "
            << fixed(report.auc_relabeled->mean_auc) << "  " << fixed(report.auc_smoothed->mean_auc) << "\n";
    }
}

void write_report_csv(std::ostream& out, const PipelineReport& report) {
    out << "section,key,value\n";
    out << "data,samples," << report.samples << '\n';
    out << "data,detected_clean," << report.split.clean_indices.size() << '\n';
    out << "data,detected_noisy," << report.split.noisy_indices.size() << '\n';
    for (std::size_t e = 0; e < report.val_epoch_loss.size(); ++e) {
        out << "val_loss,epoch_" << e << ',' << format_number(report.val_epoch_loss[e]) << '\n';
    }
    if (report.recovery) {
        const auto& r = *report.recovery;
        out << "detection,precision," << format_number(r.detection.precision) << '\n';
        out << "detection,recall," << format_number(r.detection.recall) << '\n';
        out << "detection,f1," << format_number(r.detection.f1) << '\n';
        if (report.flag_all_baseline) {
            out << "detection,flag_all_f1," << format_number(report.flag_all_baseline->f1) << '\n';
        }
        out << "recovery,l1_before," << format_number(r.l1_before) << '\n';
        out << "recovery,l1_after," << format_number(r.l1_after) << '\n';
    }
    if (report.auc_noisy) auc_rows(out, "auc_noisy", *report.auc_noisy, report.class_names);
    if (report.auc_relabeled) auc_rows(out, "auc_relabeled", *report.auc_relabeled, report.class_names);
    if (report.auc_smoothed) auc_rows(out, "auc_smoothed", *report.auc_smoothed, report.class_names);
}

}  // namespace sgval
