// Copyright 2026 The qcnn-softdrop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * Subcommands of the `qcnn` tool: train, eval, dropout, softdrop, ancilla.
 *
 * Each command reads an experiment config, writes its artifacts into the
 * output directory and prints a human-readable table. Outputs depend only on
 * the config and explicit seeds, so reruns are byte-identical.
 */
#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <new>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcnn/errors.hpp"
#include "qcnn/experiment.hpp"
#include "qcnn/mitigate.hpp"
#include "qcnn/model.hpp"
#include "qcnn/model_io.hpp"
#include "qcnn/report.hpp"
#include "qcnn/train.hpp"

namespace qcnn::cli {

enum ExitCode : int { ok = 0, usage_error = 2, numeric_error = 3, io_error = 4 };

struct CommonOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> out;
    std::optional<std::filesystem::path> model;
};

struct DropoutOptions {
    std::optional<mitigation::DropoutMode> mode;
    std::optional<double> fraction;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
};

struct SoftdropOptions {
    std::optional<std::string> grid;
    std::optional<mitigation::SelectionMetric> select;
};

namespace detail {

inline std::string created_by() { return "qcnn " + std::string(experiment::tool_version); }

inline void write_file(const std::filesystem::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << content;
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

inline std::filesystem::path output_dir(const experiment::ExperimentConfig &cfg,
                                        const CommonOptions &opts) {
    const auto dir = opts.out.value_or(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
    return dir;
}

inline experiment::ExperimentConfig load(const CommonOptions &opts) {
    auto cfg = experiment::load_config(opts.config);
    if (const auto *csv = std::get_if<experiment::CsvSource>(&cfg.source)) {
        if (!std::filesystem::exists(csv->path)) {
            throw ConfigError("dataset file " + csv->path.string() + " does not exist");
        }
    }
    return cfg;
}

inline ModelFile load_input_model(const CommonOptions &opts, const std::filesystem::path &out) {
    const auto path = opts.model.value_or(out / "model.json");
    if (!std::filesystem::exists(path)) {
        throw ConfigError("model file " + path.string() + " does not exist");
    }
    return load_model(path);
}

inline ModelMetadata metadata_for(const experiment::ExperimentConfig &cfg) {
    return {cfg.train.seed, created_by(), experiment::train_config_to_json(cfg.train)};
}

inline nlohmann::json metrics_json(const training::Metrics &m) {
    return {{"test_acc", m.test_accuracy}, {"val_acc", m.validation_accuracy}, {"gap", m.gap}};
}

inline void write_report(const std::filesystem::path &dir, const std::string &stem,
                         const std::string &title, const std::vector<ReportRow> &rows,
                         const std::vector<std::string> &notes, std::ostream &log) {
    write_file(dir / (stem + ".csv"), write_report_csv(rows));
    const auto table = format_table(title, rows, notes);
    write_file(dir / (stem + ".txt"), table);
    log << table;
}

struct TrainedRun {
    QcnnModel model;
    experiment::EncodedSplits sets;
    experiment::PreparedData data;
    training::TrainHistory history;
    training::Metrics metrics;
};

inline TrainedRun train_configured(const experiment::ExperimentConfig &cfg) {
    TrainedRun run;
    run.data = experiment::prepare_data(cfg);
    run.model = experiment::build_configured_model(cfg);
    run.sets = experiment::encode_splits(run.model, run.data.splits);
    if (cfg.train.batch_size > run.sets.train.size()) {
        throw ConfigError("config: train.batch_size " + std::to_string(cfg.train.batch_size) +
                          " exceeds the training set size " +
                          std::to_string(run.sets.train.size()));
    }
    run.history = training::train(run.model, run.sets.train, cfg.train);
    run.metrics = training::evaluate(run.model, run.history.final_params, run.sets.test,
                                     run.sets.validation);
    return run;
}

} // namespace detail

/**
 * @brief Train a model. Writes model.json, history.csv, metrics.{csv,txt}
 * and manifest.json.
 */
inline void cmd_train(const CommonOptions &opts, std::ostream &log) {
    const auto cfg = detail::load(opts);
    const auto dir = detail::output_dir(cfg, opts);
    const auto run = detail::train_configured(cfg);

    save_model(dir / "model.json", run.model, run.history.final_params, detail::metadata_for(cfg));

    std::string history = "iteration,cost\n";
    for (std::size_t i = 0; i < run.history.costs.size(); ++i) {
        history += std::to_string(i) + "," + format_double(run.history.costs[i]) + "\n";
    }
    detail::write_file(dir / "history.csv", history);
    detail::write_report(dir, "metrics", "Trained model", {make_row("baseline", run.metrics)}, {},
                         log);

    nlohmann::json manifest;
    manifest["tool"] = "qcnn";
    manifest["tool_version"] = experiment::tool_version;
    manifest["command"] = "train";
    manifest["config_hash"] = experiment::config_hash(cfg.raw);
    manifest["config"] = cfg.raw;
    manifest["seeds"] = {{"split", cfg.split.seed}, {"train", cfg.train.seed}};
    if (const auto *g = std::get_if<data::GaussianSpec>(&cfg.source)) {
        manifest["seeds"]["dataset"] = g->seed;
    }
    manifest["metrics"] = detail::metrics_json(run.metrics);
    manifest["split_sizes"] = {{"train", run.sets.train.size()},
                               {"test", run.sets.test.size()},
                               {"validation", run.sets.validation.size()}};
    nlohmann::json derived = nlohmann::json::object();
    if (run.data.pca) {
        derived["pca"] = experiment::pca_to_json(*run.data.pca);
    }
    if (run.data.scaler) {
        derived["scaler"] = experiment::scaler_to_json(*run.data.scaler);
    }
    manifest["derived_artifacts"] = derived;
    manifest["outputs"] = {"model.json", "history.csv", "metrics.csv", "metrics.txt"};
    detail::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

/// Re-evaluate a model file on the configured splits.
inline training::Metrics cmd_eval(const CommonOptions &opts, std::ostream &log) {
    const auto cfg = detail::load(opts);
    const auto dir = detail::output_dir(cfg, opts);
    const auto file = detail::load_input_model(opts, dir);
    const auto data = experiment::prepare_data(cfg);
    const auto sets = experiment::encode_splits(file.model, data.splits);
    const auto metrics =
        training::evaluate(file.model, file.params, sets.test, sets.validation);
    detail::write_report(dir, "eval_metrics", "Evaluation", {make_row("baseline", metrics)}, {},
                         log);
    return metrics;
}

/// Repeated hard-dropout trials. Writes dropout_report.{csv,txt,json}.
inline mitigation::DropoutReport cmd_dropout(const CommonOptions &opts,
                                             const DropoutOptions &dopts, std::ostream &log) {
    const auto cfg = detail::load(opts);
    const auto dir = detail::output_dir(cfg, opts);
    const auto mode = dopts.mode ? dopts.mode : cfg.dropout.mode;
    if (!mode) {
        throw ConfigError("dropout: --mode is required (or mitigation.dropout.mode)");
    }
    const auto seed = dopts.seed ? dopts.seed : cfg.dropout.seed;
    if (!seed) {
        throw ConfigError("dropout: --seed is required (or mitigation.dropout.seed)");
    }
    const double fraction = dopts.fraction.value_or(cfg.dropout.fraction.value_or(0.05));
    const std::size_t trials = dopts.trials.value_or(cfg.dropout.trials.value_or(20));
    if (trials == 0) {
        throw ConfigError("dropout: --trials must be at least 1");
    }
    if (*mode != mitigation::DropoutMode::single_gate && !(fraction > 0 && fraction <= 1)) {
        throw ConfigError("dropout: --fraction must be in (0, 1]");
    }

    const auto file = detail::load_input_model(opts, dir);
    const auto data = experiment::prepare_data(cfg);
    const auto sets = experiment::encode_splits(file.model, data.splits);
    const auto report = mitigation::dropout_trial_suite(
        file.model, file.params, sets.test, sets.validation, *mode, fraction, trials, *seed);

    std::vector<ReportRow> rows{make_row("baseline", report.baseline)};
    std::vector<std::string> notes{"unmodified"};
    nlohmann::json trials_json = nlohmann::json::array();
    for (std::size_t t = 0; t < report.trials.size(); ++t) {
        const auto &trial = report.trials[t];
        rows.push_back(make_row("mitigated", trial.metrics));
        std::string dropped;
        for (const auto g : trial.dropped) {
            dropped += (dropped.empty() ? "" : " ") + std::to_string(g);
        }
        notes.push_back("trial " + std::to_string(t) + " dropped gates [" + dropped + "]");
        trials_json.push_back({{"trial", t},
                               {"seed", trial.seed},
                               {"dropped_gates", trial.dropped},
                               {"n_params", trial.n_params},
                               {"metrics", detail::metrics_json(trial.metrics)}});
    }
    const auto summary_json = [](const mitigation::AccuracySummary &s) {
        return nlohmann::json{{"mean", s.mean}, {"min", s.min}, {"max", s.max}, {"std", s.std}};
    };
    nlohmann::json doc;
    doc["mode"] = to_string(report.mode);
    doc["fraction"] = report.fraction;
    doc["seed"] = report.seed;
    doc["baseline"] = detail::metrics_json(report.baseline);
    doc["baseline_n_params"] = file.model.n_params;
    doc["trials"] = std::move(trials_json);
    doc["summary"] = {{"test_acc", summary_json(report.test_summary)},
                      {"val_acc", summary_json(report.validation_summary)}};
    detail::write_file(dir / "dropout_report.json", doc.dump(2) + "\n");

    std::ostringstream title;
    title << "Hard dropout (" << to_string(report.mode) << ", " << trials << " trials)";
    detail::write_report(dir, "dropout_report", title.str(), rows, notes, log);
    log << "test accuracy: mean " << report.test_summary.mean << " min "
        << report.test_summary.min << " max " << report.test_summary.max << "\n";
    return report;
}

/// Read a grid: "default" or a JSON file holding an array of policies.
inline std::vector<mitigation::SoftDropoutPolicy> load_grid(const std::string &spec) {
    if (spec == "default") {
        return mitigation::default_grid();
    }
    std::ifstream in(spec);
    if (!in) {
        throw ConfigError("cannot open grid file " + spec);
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError("grid file " + spec + " is not valid JSON: " + e.what());
    }
    if (!doc.is_array() || doc.empty()) {
        throw ConfigError("grid file " + spec + " must hold a non-empty JSON array");
    }
    std::vector<mitigation::SoftDropoutPolicy> grid;
    for (const auto &entry : doc) {
        grid.push_back(mitigation::policy_from_json(entry));
    }
    return grid;
}

/**
 * @brief Soft-dropout threshold search. Writes softdrop_report.{csv,txt,json}
 * and model_softdrop.json with the selected policy applied.
 */
inline mitigation::SearchReport cmd_softdrop(const CommonOptions &opts,
                                             const SoftdropOptions &sopts, std::ostream &log) {
    const auto cfg = detail::load(opts);
    const auto dir = detail::output_dir(cfg, opts);
    auto grid = load_grid(sopts.grid.value_or(cfg.softdrop.grid));
    if (cfg.softdrop.mask) {
        for (auto &p : grid) {
            if (p.kind != mitigation::SoftDropoutPolicy::Kind::identity) {
                p = p.with_mask(*cfg.softdrop.mask);
            }
        }
    }
    const auto select = sopts.select.value_or(cfg.softdrop.select);

    const auto file = detail::load_input_model(opts, dir);
    const auto data = experiment::prepare_data(cfg);
    auto sets = experiment::encode_splits(file.model, data.splits);

    std::optional<training::EncodedSet> selection;
    if (cfg.softdrop.selection_fraction) {
        const auto n_val = sets.validation.size();
        const auto n_sel = static_cast<std::size_t>(
            std::ceil(*cfg.softdrop.selection_fraction * static_cast<double>(n_val)));
        if (n_sel == 0 || n_sel >= n_val) {
            throw ConfigError("softdrop: selection_fraction leaves an empty split");
        }
        std::vector<std::size_t> sel_idx, val_idx;
        for (std::size_t i = 0; i < n_val; ++i) {
            (i < n_sel ? sel_idx : val_idx).push_back(i);
        }
        selection = sets.validation.subset(sel_idx);
        sets.validation = sets.validation.subset(val_idx);
    }

    const auto report =
        mitigation::soft_dropout_search(file.model, file.params, sets.test, sets.validation,
                                        std::move(grid), select, selection ? &*selection : nullptr);

    // Identity row first, then the rest in grid order.
    std::vector<ReportRow> rows;
    std::vector<std::string> notes;
    std::size_t identity_row = 0;
    for (std::size_t i = 0; i < report.grid.size(); ++i) {
        if (report.grid[i].kind == mitigation::SoftDropoutPolicy::Kind::identity &&
            !report.grid[i].mask) {
            identity_row = i;
            break;
        }
    }
    const auto note = [&](std::size_t i) {
        return mitigation::describe(report.grid[i]) + (i == report.selected ? "  <- selected" : "");
    };
    rows.push_back(make_row("baseline", report.metrics[identity_row]));
    notes.push_back(note(identity_row));
    nlohmann::json policies = nlohmann::json::array();
    for (std::size_t i = 0; i < report.grid.size(); ++i) {
        if (i != identity_row) {
            rows.push_back(make_row("mitigated", report.metrics[i]));
            notes.push_back(note(i));
        }
        policies.push_back({{"policy", mitigation::policy_to_json(report.grid[i])},
                            {"name", mitigation::describe(report.grid[i])},
                            {"metrics", detail::metrics_json(report.metrics[i])}});
    }

    const auto mitigated = mitigation::apply_policy(file.params, report.selected_policy());
    save_model(dir / "model_softdrop.json", file.model, mitigated, file.metadata);

    nlohmann::json doc;
    doc["selection_metric"] =
        select == mitigation::SelectionMetric::gap ? "gap" : "validation";
    doc["grid"] = std::move(policies);
    doc["selected"] = report.selected;
    doc["selected_policy"] = mitigation::describe(report.selected_policy());
    doc["baseline"] = detail::metrics_json(report.baseline());
    doc["selected_metrics"] = detail::metrics_json(report.selected_metrics());
    detail::write_file(dir / "softdrop_report.json", doc.dump(2) + "\n");
    detail::write_report(dir, "softdrop_report", "Soft dropout search", rows, notes, log);
    return report;
}

struct AncillaResult {
    training::Metrics before;
    training::Metrics after;
    std::size_t dropped_gate = 0;
    LayerTag dropped_tag;
};

/**
 * @brief Train the ancilla model, then drop its ancilla rotation and
 * re-evaluate. Writes ancilla_report.{csv,txt,json} and model_ancilla.json.
 */
inline AncillaResult cmd_ancilla(const CommonOptions &opts, std::ostream &log) {
    const auto cfg = detail::load(opts);
    if (!cfg.ancilla) {
        throw ConfigError("ancilla: config must set model.ancilla to 'Rx' or 'Ry'");
    }
    const auto dir = detail::output_dir(cfg, opts);
    const auto run = detail::train_configured(cfg);

    const auto gate = find_gate(run.model, LayerTag{LayerTag::Kind::ancilla, 0});
    if (!gate) {
        throw ArgumentError("ancilla: model has no ancilla-tagged gate");
    }
    const auto dropped = mitigation::drop_gate(run.model, run.history.final_params, *gate);
    AncillaResult result;
    result.before = run.metrics;
    result.after = training::evaluate(dropped.model, dropped.params, run.sets.test,
                                      run.sets.validation);
    result.dropped_gate = *gate;
    result.dropped_tag = run.model.gates[*gate].layer_tag;

    save_model(dir / "model_ancilla.json", run.model, run.history.final_params,
               detail::metadata_for(cfg));
    nlohmann::json doc;
    doc["dropped_gate"] = *gate;
    doc["dropped_layer_tag"] = to_string(result.dropped_tag);
    doc["dropped_kind"] = to_string(run.model.gates[*gate].kind);
    doc["before"] = detail::metrics_json(result.before);
    doc["after"] = detail::metrics_json(result.after);
    doc["config_hash"] = experiment::config_hash(cfg.raw);
    detail::write_file(dir / "ancilla_report.json", doc.dump(2) + "\n");
    detail::write_report(dir, "ancilla_report", "Ancilla gate dropout",
                         {make_row("before", result.before), make_row("after", result.after)},
                         {"trained", "ancilla rotation removed"}, log);
    return result;
}

/// Run `fn`, mapping exceptions onto exit codes and printing the message.
inline int guarded(const std::function<void()> &fn, std::ostream &err = std::cerr) {
    try {
        fn();
        return ok;
    } catch (const NumericError &e) {
        err << "error: " << e.what() << "\n";
        return numeric_error;
    } catch (const IoError &e) {
        err << "error: " << e.what() << "\n";
        return io_error;
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return usage_error;
    } catch (const std::bad_alloc &) {
        err << "error: out of memory\n";
        return numeric_error;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return numeric_error;
    }
}

} // namespace qcnn::cli
