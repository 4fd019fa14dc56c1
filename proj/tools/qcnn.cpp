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
// Command-line driver: qcnn train|eval|dropout|softdrop|ancilla.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qcnn/cli.hpp"

namespace {

struct Raw {
    std::string config;
    std::string out;
    std::string model;
    std::string mode;
    std::optional<double> fraction;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::string grid;
    std::string select;
};

void add_common(CLI::App *cmd, Raw &raw, bool with_model) {
    cmd->add_option("--config", raw.config, "Experiment config (JSON)")->required();
    cmd->add_option("--out", raw.out, "Output directory (overrides output_dir)");
    if (with_model) {
        cmd->add_option("--model", raw.model, "Model file (default <out>/model.json)");
    }
}

qcnn::cli::CommonOptions common(const Raw &raw) {
    qcnn::cli::CommonOptions opts;
    opts.config = raw.config;
    if (!raw.out.empty()) {
        opts.out = raw.out;
    }
    if (!raw.model.empty()) {
        opts.model = raw.model;
    }
    return opts;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Quantum convolutional classifier with soft dropout"};
    app.set_version_flag("--version", std::string(qcnn::experiment::tool_version));
    app.require_subcommand(1);

    Raw raw;
    auto *train = app.add_subcommand("train", "Train a model from a config");
    add_common(train, raw, false);
    auto *eval = app.add_subcommand("eval", "Evaluate a trained model");
    add_common(eval, raw, true);
    auto *dropout = app.add_subcommand("dropout", "Repeated hard-dropout trials");
    add_common(dropout, raw, true);
    dropout->add_option("--mode", raw.mode, "single-qubit | single-gate | cnot");
    dropout->add_option("--fraction", raw.fraction, "Fraction of candidate gates to drop");
    dropout->add_option("--trials", raw.trials, "Number of trials");
    dropout->add_option("--seed", raw.seed, "Trial seed");
    auto *softdrop = app.add_subcommand("softdrop", "Soft-dropout threshold search");
    add_common(softdrop, raw, true);
    softdrop->add_option("--grid", raw.grid, "'default' or a JSON grid file");
    softdrop->add_option("--select", raw.select, "validation | gap");
    auto *ancilla = app.add_subcommand("ancilla", "Train with an ancilla and drop its gate");
    add_common(ancilla, raw, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return qcnn::cli::usage_error;
    }

    return qcnn::cli::guarded([&] {
        const auto opts = common(raw);
        if (train->parsed()) {
            qcnn::cli::cmd_train(opts, std::cout);
        } else if (eval->parsed()) {
            qcnn::cli::cmd_eval(opts, std::cout);
        } else if (dropout->parsed()) {
            qcnn::cli::DropoutOptions d;
            if (!raw.mode.empty()) {
                d.mode = qcnn::experiment::parse_dropout_mode(raw.mode);
                if (!d.mode) {
                    throw qcnn::ArgumentError("--mode: unknown dropout mode '" + raw.mode + "'");
                }
            }
            d.fraction = raw.fraction;
            d.trials = raw.trials;
            d.seed = raw.seed;
            qcnn::cli::cmd_dropout(opts, d, std::cout);
        } else if (softdrop->parsed()) {
            qcnn::cli::SoftdropOptions s;
            if (!raw.grid.empty()) {
                s.grid = raw.grid;
            }
            if (!raw.select.empty()) {
                s.select = qcnn::experiment::parse_selection(raw.select);
                if (!s.select) {
                    throw qcnn::ArgumentError("--select: expected 'validation' or 'gap'");
                }
            }
            qcnn::cli::cmd_softdrop(opts, s, std::cout);
        } else if (ancilla->parsed()) {
            qcnn::cli::cmd_ancilla(opts, std::cout);
        }
    });
}
