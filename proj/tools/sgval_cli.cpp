#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "sgval/attribute_graph.hpp"
#include "sgval/classifier.hpp"
#include "sgval/dataset_io.hpp"
#include "sgval/metrics.hpp"
#include "sgval/noise_detector.hpp"
#include "sgval/parallel.hpp"
#include "sgval/pipeline.hpp"
#include "sgval/relabeler.hpp"
#include "sgval/synth.hpp"
#include "sgval/val_learner.hpp"

namespace fs = std::filesystem;
using namespace sgval;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_internal = 1;
constexpr int exit_usage = 2;
constexpr int exit_data = 3;
constexpr int exit_divergence = 4;
constexpr int exit_io = 5;

const char* exit_code_help =
    "Exit codes:\n"
    "  0  success\n"
    "  1  unexpected internal error\n"
    "  2  usage error: unknown flag, bad value or invalid configuration\n"
    "  3  data error: malformed or inconsistent input files\n"
    "  4  numeric divergence during training\n"
    "  5  file could not be read or written\n";

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return exit_usage;
        case ErrorKind::data: return exit_data;
        case ErrorKind::divergence: return exit_divergence;
        case ErrorKind::io: return exit_io;
    }
    return exit_internal;
}

// ---- config file -------------------------------------------------------

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool flag_given(const std::vector<std::string>& args, const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Lines "key = value" ('#' starts a comment). Keys are long flag names
// without dashes; a key already given on the command line is skipped so
// that flags override the file.
std::vector<std::string> config_arguments(const fs::path& path, const std::vector<std::string>& args) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::vector<std::string> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key == "config") {
            throw ConfigError(path.string() + ":" + std::to_string(number) + ": invalid key");
        }
        if (!flag_given(args, key)) out.push_back("--" + key + "=" + value);
    }
    return out;
}

// Returns the --config value, removing it from args.
std::string take_config_path(std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size();) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            ++i;
        }
    }
    return path;
}

// ---- file helpers ------------------------------------------------------

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

void check_distinct(const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
    std::vector<fs::path> seen;
    for (const auto& p : inputs) {
        if (!p.empty()) seen.push_back(fs::weakly_canonical(p));
    }
    for (const auto& p : outputs) {
        if (p.empty()) continue;
        const auto canon = fs::weakly_canonical(p);
        if (std::find(seen.begin(), seen.end(), canon) != seen.end()) {
            throw ConfigError("output path " + p + " collides with another input or output");
        }
        seen.push_back(canon);
    }
}

EmbeddingMatrix load_embeddings(const std::string& path) {
    return EmbeddingMatrix::from_raw(read_matrix(path, magic::embeddings));
}

Dataset load_dataset(const std::string& features, const std::string& labels, const EmbeddingMatrix* embeddings) {
    Matrix x = read_matrix(features, magic::features);
    LabelsFile y = read_labels_csv(labels);
    if (embeddings) return validate_dataset(std::move(x), std::move(y.labels), *embeddings, std::move(y.class_names));
    return validate_dataset(std::move(x), std::move(y.labels), std::move(y.class_names));
}

void write_loss_csv(const std::string& path, const std::vector<double>& loss) {
    auto out = open_output(path);
    out << "epoch,loss\n";
    for (std::size_t e = 0; e < loss.size(); ++e) out << e << ',' << format_number(loss[e]) << '\n';
    finish(out, path);
}

void write_flags_csv(const std::string& path, const CleanNoisySplit& split, std::size_t samples,
                     const std::vector<std::vector<std::size_t>>* rankings) {
    std::vector<char> clean(samples, 0);
    for (std::size_t i : split.clean_indices) clean[i] = 1;
    auto out = open_output(path);
    out << "sample_index,clean_flag";
    if (rankings && samples > 0) {
        for (std::size_t r = 0; r < (*rankings)[0].size(); ++r) out << ",rank_" << r;
    }
    out << '\n';
    for (std::size_t i = 0; i < samples; ++i) {
        out << i << ',' << int(clean[i]);
        if (rankings) {
            for (std::size_t c : (*rankings)[i]) out << ',' << c;
        }
        out << '\n';
    }
    finish(out, path);
}

// ---- option groups -----------------------------------------------------

void add_synth_options(CLI::App* cmd, SynthConfig& cfg) {
    cmd->add_option("--n", cfg.n, "Number of samples")->capture_default_str();
    cmd->add_option("--classes", cfg.c, "Number of classes")->capture_default_str();
    cmd->add_option("--embed-dim", cfg.z, "Embedding dimension Z")->capture_default_str();
    cmd->add_option("--feature-dim", cfg.d, "Feature dimension D")->capture_default_str();
    cmd->add_option("--max-positives", cfg.max_positives, "Most positives per sample")->capture_default_str();
    cmd->add_option("--noise-rate", cfg.noise_rate, "Fraction of samples corrupted")->capture_default_str();
    cmd->add_option("--flip-prob", cfg.flip_prob, "Per-label flip probability in a corrupted sample")
        ->capture_default_str();
    cmd->add_option("--feature-noise", cfg.feature_noise, "Gaussian feature noise sigma")->capture_default_str();
}

void add_val_options(CLI::App* cmd, ValConfig& cfg, std::string& schedule) {
    cmd->add_option("--attributes", cfg.attributes, "Virtual attributes per image (M)")->capture_default_str();
    cmd->add_option("--beta", cfg.beta, "Weight of the attribute variance regularizer")->capture_default_str();
    cmd->add_option("--val-lr", cfg.learning_rate, "Adam learning rate for attribute learning")
        ->capture_default_str();
    cmd->add_option("--val-epochs", cfg.epochs, "Attribute learning epochs")->capture_default_str();
    cmd->add_option("--val-batch-size", cfg.batch_size, "Attribute learning batch size")->capture_default_str();
    cmd->add_option("--schedule", schedule, "Learning rate schedule")
        ->check(CLI::IsMember({"cosine", "constant"}))
        ->capture_default_str();
}

void add_clf_options(CLI::App* cmd, ClfConfig& cfg) {
    cmd->add_option("--clf-lr", cfg.learning_rate, "Adam learning rate for the classifier")->capture_default_str();
    cmd->add_option("--clf-epochs", cfg.epochs, "Classifier epochs")->capture_default_str();
    cmd->add_option("--clf-batch-size", cfg.batch_size, "Classifier batch size")->capture_default_str();
    cmd->add_option("--milestones", cfg.milestones, "Epochs at which the rate is multiplied by --decay")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--decay", cfg.decay, "Step decay factor")->capture_default_str();
}

void add_relabel_options(CLI::App* cmd, RelabelConfig& cfg) {
    cmd->add_option("--k", cfg.k, "Nearest attribute nodes per noisy sample")->capture_default_str();
    cmd->add_option("--lambda", cfg.lambda, "Weight of the original label in the relabeled target")
        ->capture_default_str();
}

LrSchedule parse_schedule(const std::string& s) {
    return s == "constant" ? LrSchedule::constant : LrSchedule::cosine;
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);

    CLI::App app("Noisy multi-label learning with semantic virtual attributes: detection, graph relabeling and "
                 "classifier retraining.");
    app.footer(exit_code_help);
    app.require_subcommand(1);
    app.fallthrough();

    std::size_t threads = 0;
    std::string config_path;
    app.add_option("--threads", threads, "Worker threads (0 = all cores); results do not depend on it")
        ->capture_default_str();
    app.add_option("--config", config_path, "File of key = value lines giving flag defaults; flags override it");

    // synth
    SynthConfig synth_cfg;
    std::string synth_dir;
    std::size_t synth_test_n = 0;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with injected label noise");
    synth->add_option("--out-dir", synth_dir, "Output directory")->required();
    synth->add_option("--seed", synth_cfg.seed, "Random seed")->capture_default_str();
    synth->add_option("--test-n", synth_test_n, "Also write a noise-free test split of this size")
        ->capture_default_str();
    add_synth_options(synth, synth_cfg);

    // train-val
    ValConfig val_cfg;
    std::string val_schedule = "cosine";
    std::string tv_features, tv_labels, tv_embeddings, tv_out, tv_loss;
    auto* train_val_cmd = app.add_subcommand("train-val", "Learn the virtual attribute projector");
    train_val_cmd->add_option("--features", tv_features, "Feature matrix (SGVF)")->required();
    train_val_cmd->add_option("--labels", tv_labels, "Binary label CSV")->required();
    train_val_cmd->add_option("--embeddings", tv_embeddings, "Label embeddings (SGVW)")->required();
    train_val_cmd->add_option("--out", tv_out, "Projector checkpoint to write (SGVM)")->required();
    train_val_cmd->add_option("--loss-out", tv_loss, "Optional per-epoch objective CSV");
    train_val_cmd->add_option("--seed", val_cfg.seed, "Random seed")->capture_default_str();
    train_val_cmd->add_option("--lr", val_cfg.learning_rate, "Adam learning rate")->capture_default_str();
    train_val_cmd->add_option("--epochs", val_cfg.epochs, "Training epochs")->capture_default_str();
    train_val_cmd->add_option("--batch-size", val_cfg.batch_size, "Batch size")->capture_default_str();
    train_val_cmd->add_option("--attributes", val_cfg.attributes, "Virtual attributes per image (M)")
        ->capture_default_str();
    train_val_cmd->add_option("--beta", val_cfg.beta, "Weight of the attribute variance regularizer")
        ->capture_default_str();
    train_val_cmd->add_option("--schedule", val_schedule, "Learning rate schedule")
        ->check(CLI::IsMember({"cosine", "constant"}))
        ->capture_default_str();

    // detect
    std::string dt_features, dt_labels, dt_embeddings, dt_model, dt_out;
    auto* detect = app.add_subcommand("detect", "Split samples into clean and noisy");
    detect->add_option("--features", dt_features, "Feature matrix (SGVF)")->required();
    detect->add_option("--labels", dt_labels, "Binary label CSV")->required();
    detect->add_option("--embeddings", dt_embeddings, "Label embeddings (SGVW)")->required();
    detect->add_option("--model", dt_model, "Projector checkpoint (SGVM)")->required();
    detect->add_option("--out", dt_out, "CSV: sample_index, clean_flag, rank_0..rank_{C-1}")->required();

    // relabel
    RelabelConfig relabel_cfg;
    std::string rl_features, rl_labels, rl_embeddings, rl_model, rl_out, rl_flags, rl_neighbors;
    auto* relabel = app.add_subcommand("relabel", "Rewrite the labels of noisy samples from graph neighbors");
    relabel->add_option("--features", rl_features, "Feature matrix (SGVF)")->required();
    relabel->add_option("--labels", rl_labels, "Binary label CSV")->required();
    relabel->add_option("--embeddings", rl_embeddings, "Label embeddings (SGVW)")->required();
    relabel->add_option("--model", rl_model, "Projector checkpoint (SGVM)")->required();
    relabel->add_option("--out", rl_out, "Relabeled (soft) label CSV")->required();
    relabel->add_option("--flags-out", rl_flags, "Sidecar CSV: sample_index, clean_flag")->required();
    relabel->add_option("--neighbors-out", rl_neighbors, "Optional CSV: query_index, neighbor_indices");
    add_relabel_options(relabel, relabel_cfg);

    // train-clf
    ClfConfig clf_cfg;
    double clf_epsilon = 0.0;
    std::string tc_features, tc_labels, tc_out, tc_loss;
    auto* train_clf = app.add_subcommand("train-clf", "Train the linear multi-label classifier");
    train_clf->add_option("--features", tc_features, "Feature matrix (SGVF)")->required();
    train_clf->add_option("--labels", tc_labels, "Label CSV (binary or soft)")->required();
    train_clf->add_option("--out", tc_out, "Classifier checkpoint to write (SGVC)")->required();
    train_clf->add_option("--loss-out", tc_loss, "Optional per-epoch loss CSV");
    train_clf->add_option("--seed", clf_cfg.seed, "Random seed")->capture_default_str();
    train_clf->add_option("--lr", clf_cfg.learning_rate, "Adam learning rate")->capture_default_str();
    train_clf->add_option("--epochs", clf_cfg.epochs, "Training epochs")->capture_default_str();
    train_clf->add_option("--batch-size", clf_cfg.batch_size, "Batch size")->capture_default_str();
    train_clf->add_option("--milestones", clf_cfg.milestones, "Epochs at which the rate is multiplied by --decay")
        ->delimiter(',')
        ->capture_default_str();
    train_clf->add_option("--decay", clf_cfg.decay, "Step decay factor")->capture_default_str();
    train_clf->add_option("--epsilon", clf_epsilon, "Label smoothing applied to binary labels before training")
        ->capture_default_str();

    // eval
    std::string ev_features, ev_labels, ev_model, ev_out;
    auto* eval = app.add_subcommand("eval", "Per-class and mean AUC of a classifier on a labeled split");
    eval->add_option("--features", ev_features, "Feature matrix (SGVF)")->required();
    eval->add_option("--labels", ev_labels, "Binary label CSV")->required();
    eval->add_option("--model", ev_model, "Classifier checkpoint (SGVC)")->required();
    eval->add_option("--out", ev_out, "Optional CSV: class, auc");

    // pipeline
    PipelineConfig pl_cfg;
    std::string pl_schedule = "cosine";
    bool pl_synth = false;
    std::uint64_t pl_seed = 1;
    std::string pl_features, pl_labels, pl_embeddings, pl_test_features, pl_test_labels, pl_true_labels,
        pl_corrupted, pl_report, pl_relabeled;
    auto* pipeline = app.add_subcommand("pipeline", "Run every stage and print a recovery report");
    pipeline->add_flag("--synth-defaults", pl_synth, "Generate train and test data instead of reading files");
    pipeline->add_option("--seed", pl_seed, "Seed for every stage")->capture_default_str();
    pipeline->add_option("--test-n", pl_cfg.test_n, "Synthetic test split size (0 = none)")->capture_default_str();
    pipeline->add_option("--features", pl_features, "Train feature matrix (SGVF)");
    pipeline->add_option("--labels", pl_labels, "Train binary label CSV");
    pipeline->add_option("--embeddings", pl_embeddings, "Label embeddings (SGVW)");
    pipeline->add_option("--test-features", pl_test_features, "Test feature matrix (SGVF)");
    pipeline->add_option("--test-labels", pl_test_labels, "Test binary label CSV");
    pipeline->add_option("--true-labels", pl_true_labels, "Clean train labels, for recovery metrics");
    pipeline->add_option("--corrupted", pl_corrupted, "Corrupted sample index CSV, for detection metrics");
    pipeline->add_option("--report-csv", pl_report, "Write the report as section,key,value CSV");
    pipeline->add_option("--relabeled-out", pl_relabeled, "Write the relabeled train labels");
    pipeline->add_option("--epsilon", pl_cfg.epsilon, "Label smoothing for the baseline classifier")
        ->capture_default_str();
    add_synth_options(pipeline, pl_cfg.synth);
    add_val_options(pipeline, pl_cfg.val, pl_schedule);
    add_relabel_options(pipeline, pl_cfg.relabel);
    add_clf_options(pipeline, pl_cfg.clf);

    try {
        const std::string config_file = take_config_path(args);
        if (!config_file.empty()) {
            const auto extra = config_arguments(config_file, args);
            args.insert(args.end(), extra.begin(), extra.end());
        }
        std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    }

    try {
        set_thread_count(threads);

        if (*synth) {
            synth_cfg.validate();
            const fs::path dir(synth_dir);
            std::error_code ec;
            fs::create_directories(dir, ec);
            if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
            const SynthOutput data = generate(synth_cfg);
            write_matrix(dir / "features.sgvf", data.clean.features, magic::features);
            write_matrix(dir / "embeddings.sgvw", data.embeddings.rows(), magic::embeddings);
            write_labels_csv(dir / "labels_clean.csv", data.clean.labels, data.clean.class_names);
            write_labels_csv(dir / "labels_noisy.csv", data.noisy.labels, data.noisy.class_names);
            write_index_csv(dir / "corrupted.csv", data.corrupted_indices);
            if (synth_test_n > 0) {
                SynthConfig test_cfg = synth_cfg;
                test_cfg.n = synth_test_n;
                test_cfg.noise_rate = 0.0;
                test_cfg.sample_stream = 1;
                const Dataset test = gen_clean(test_cfg, data.embeddings);
                write_matrix(dir / "test_features.sgvf", test.features, magic::features);
                write_labels_csv(dir / "test_labels.csv", test.labels, test.class_names);
            }
        } else if (*train_val_cmd) {
            check_distinct({tv_features, tv_labels, tv_embeddings}, {tv_out, tv_loss});
            val_cfg.lr_schedule = parse_schedule(val_schedule);
            val_cfg.validate();
            const EmbeddingMatrix w = load_embeddings(tv_embeddings);
            const Dataset data = load_dataset(tv_features, tv_labels, &w);
            const ValTrainResult result = train_val(data, w, val_cfg);
            write_projector(tv_out, result.projector);
            if (!tv_loss.empty()) write_loss_csv(tv_loss, result.epoch_loss);
        } else if (*detect) {
            check_distinct({dt_features, dt_labels, dt_embeddings, dt_model}, {dt_out});
            const EmbeddingMatrix w = load_embeddings(dt_embeddings);
            const Dataset data = load_dataset(dt_features, dt_labels, &w);
            const AttributeProjector proj = read_projector(dt_model);
            const Detection d = detect_noisy(data, proj, w);
            write_flags_csv(dt_out, d.split, data.samples(), &d.rankings);
        } else if (*relabel) {
            check_distinct({rl_features, rl_labels, rl_embeddings, rl_model}, {rl_out, rl_flags, rl_neighbors});
            relabel_cfg.validate();
            const EmbeddingMatrix w = load_embeddings(rl_embeddings);
            const Dataset data = load_dataset(rl_features, rl_labels, &w);
            const AttributeProjector proj = read_projector(rl_model);
            const RelabelResult result = a2s(data, proj, w, relabel_cfg);
            write_labels_csv(rl_out, result.relabeled.labels, result.relabeled.class_names);
            write_flags_csv(rl_flags, result.split, data.samples(), nullptr);
            if (!rl_neighbors.empty()) {
                auto out = open_output(rl_neighbors);
                out << "query_index,neighbor_indices\n";
                for (std::size_t i : result.split.noisy_indices) {
                    out << i << ',';
                    const auto& set = result.neighbor_sets[i];
                    for (std::size_t j = 0; j < set.size(); ++j) out << (j ? " " : "") << set[j];
                    out << '\n';
                }
                finish(out, rl_neighbors);
            }
        } else if (*train_clf) {
            check_distinct({tc_features, tc_labels}, {tc_out, tc_loss});
            clf_cfg.validate();
            Dataset data = load_dataset(tc_features, tc_labels, nullptr);
            if (clf_epsilon != 0.0) data.labels = smooth_labels(data.labels, clf_epsilon);
            const ClfTrainResult result = train_classifier(data, clf_cfg);
            write_classifier(tc_out, result.classifier);
            if (!tc_loss.empty()) write_loss_csv(tc_loss, result.epoch_loss);
        } else if (*eval) {
            check_distinct({ev_features, ev_labels, ev_model}, {ev_out});
            const Dataset data = load_dataset(ev_features, ev_labels, nullptr);
            const MultiLabelClassifier clf = read_classifier(ev_model);
            const EvalReport report = evaluate(clf, data);
            std::size_t width = 5;
            for (const auto& name : data.class_names) width = std::max(width, name.size());
            std::cout << "class" << std::string(width - 5 + 2, ' ') << "auc\n";
            for (std::size_t c = 0; c < data.classes(); ++c) {
                const auto& name = data.class_names[c];
                std::cout << name << std::string(width - name.size() + 2, ' ')
                          << (report.per_class_auc[c] ? fixed4(*report.per_class_auc[c]) : std::string("-"))
                          << '\n';
            }
            std::cout << "mean AUC " << fixed4(report.mean_auc) << '\n';
            for (const auto& s : report.skipped_classes) {
                std::cout << "skipped " << data.class_names[s.index] << ": " << s.reason << '\n';
            }
            if (!ev_out.empty()) {
                auto out = open_output(ev_out);
                out << "class,auc\n";
                for (std::size_t c = 0; c < data.classes(); ++c) {
                    out << data.class_names[c] << ',';
                    if (report.per_class_auc[c]) out << format_number(*report.per_class_auc[c]);
                    out << '\n';
                }
                out << "mean," << format_number(report.mean_auc) << '\n';
                finish(out, ev_out);
            }
        } else if (*pipeline) {
            pl_cfg.set_seed(pl_seed);
            pl_cfg.val.lr_schedule = parse_schedule(pl_schedule);
            pl_cfg.validate();
            check_distinct({pl_features, pl_labels, pl_embeddings, pl_test_features, pl_test_labels,
                            pl_true_labels, pl_corrupted},
                           {pl_report, pl_relabeled});
            PipelineInputs inputs;
            if (pl_synth) {
                if (!pl_features.empty() || !pl_labels.empty() || !pl_embeddings.empty()) {
                    throw ConfigError("--synth-defaults cannot be combined with input files");
                }
                inputs = synthetic_inputs(pl_cfg);
            } else {
                if (pl_features.empty() || pl_labels.empty() || pl_embeddings.empty()) {
                    throw ConfigError("give --synth-defaults or all of --features, --labels and --embeddings");
                }
                if (pl_test_features.empty() != pl_test_labels.empty()) {
                    throw ConfigError("--test-features and --test-labels go together");
                }
                inputs.embeddings = load_embeddings(pl_embeddings);
                inputs.train = load_dataset(pl_features, pl_labels, &inputs.embeddings);
                if (!pl_test_features.empty()) {
                    inputs.test = load_dataset(pl_test_features, pl_test_labels, &inputs.embeddings);
                }
                if (!pl_true_labels.empty()) inputs.true_labels = read_labels_csv(pl_true_labels).labels;
                if (!pl_corrupted.empty()) inputs.corrupted_indices = read_index_csv(pl_corrupted);
            }
            Dataset relabeled;
            const PipelineReport report = run_pipeline(inputs, pl_cfg, pl_relabeled.empty() ? nullptr : &relabeled);
            write_report_text(std::cout, report);
            if (!pl_report.empty()) {
                auto out = open_output(pl_report);
                write_report_csv(out, report);
                finish(out, pl_report);
            }
            if (!pl_relabeled.empty()) write_labels_csv(pl_relabeled, relabeled.labels, relabeled.class_names);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return exit_internal;
    }
    return exit_ok;
}
