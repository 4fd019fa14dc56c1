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
// End-to-end checks of the qcnn executable: exit codes, artifacts and
// byte-identical reruns.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "qcnn/cli.hpp"
#include "qcnn/model_io.hpp"
#include "qcnn/report.hpp"

namespace {

namespace fs = std::filesystem;

fs::path workdir(const std::string &name) {
    const auto dir = fs::path(QCNN_TEST_TMP) / "cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run(const std::string &args, const fs::path &log) {
    const std::string cmd =
        std::string(QCNN_TOOL_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json small_config(const std::string &out) {
    return nlohmann::json::parse(R"({
      "dataset": {"synthetic": {"n_per_class": 20, "n_features": 4, "separation": 6,
                                "noise_sd": 1, "seed": 3}},
      "reduction": {"kind": "none"},
      "model": {"encoding": "qubit", "n_qubits": 4, "block_type": "ry_6",
                "pooling_kind": "rz_rx"},
      "split": {"ratios": [0.6, 0.2, 0.2], "seed": 4, "stratified": true,
                "merge_test_into_train": false},
      "train": {"learning_rate": 0.05, "momentum": 0.9, "iterations": 10, "batch_size": 6,
                "seed": 5, "gradient_method": "parameter_shift"},
      "mitigation": {"dropout": {"mode": "single-qubit", "fraction": 0.1, "trials": 4, "seed": 6},
                     "softdrop": {"grid": "default", "select": "validation"}},
      "output_dir": ")" + out + R"("
    })");
}

fs::path write_config(const fs::path &dir, const nlohmann::json &cfg,
                      const std::string &name = "config.json") {
    const auto path = dir / name;
    std::ofstream(path) << cfg.dump(2);
    return path;
}

TEST(Cli, TrainWritesArtifactsAndIsReproducible) {
    const auto dir = workdir("train");
    const auto cfg = write_config(dir, small_config("out"));
    ASSERT_EQ(run("train --config " + cfg.string(), dir / "log1"), 0) << slurp(dir / "log1");
    const auto out = dir / "out";
    for (const auto *f : {"model.json", "history.csv", "manifest.json", "metrics.csv", "metrics.txt"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    const auto file = qcnn::load_model(out / "model.json");
    EXPECT_GT(file.model.n_params, 0U);
    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    EXPECT_EQ(manifest["tool"], "qcnn");
    EXPECT_EQ(manifest["seeds"]["train"], 5);
    EXPECT_EQ(manifest["seeds"]["split"], 4);
    EXPECT_EQ(manifest["seeds"]["dataset"], 3);
    EXPECT_TRUE(manifest.contains("config_hash"));
    EXPECT_EQ(manifest["config"], small_config("out"));

    const auto first = slurp(out / "model.json");
    const auto history = slurp(out / "history.csv");
    ASSERT_EQ(run("train --config " + cfg.string() + " --out " + (dir / "again").string(),
                  dir / "log2"),
              0);
    EXPECT_EQ(slurp(dir / "again" / "model.json"), first);
    EXPECT_EQ(slurp(dir / "again" / "history.csv"), history);
    EXPECT_EQ(slurp(dir / "again" / "manifest.json"), slurp(out / "manifest.json"));
}

TEST(Cli, EvalReproducesManifestMetrics) {
    const auto dir = workdir("eval");
    const auto cfg = write_config(dir, small_config("out"));
    ASSERT_EQ(run("train --config " + cfg.string(), dir / "log"), 0);
    ASSERT_EQ(run("eval --config " + cfg.string(), dir / "log2"), 0) << slurp(dir / "log2");
    const auto rows = qcnn::parse_report_csv(slurp(dir / "out" / "eval_metrics.csv"));
    ASSERT_EQ(rows.size(), 1U);
    const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
    EXPECT_EQ(rows[0].test_acc, manifest["metrics"]["test_acc"].get<double>());
    EXPECT_EQ(rows[0].val_acc, manifest["metrics"]["val_acc"].get<double>());
    EXPECT_EQ(rows[0].gap, rows[0].test_acc - rows[0].val_acc);
}

TEST(Cli, DropoutReport) {
    const auto dir = workdir("dropout");
    const auto cfg = write_config(dir, small_config("out"));
    ASSERT_EQ(run("train --config " + cfg.string(), dir / "log"), 0);
    const std::string base = "dropout --config " + cfg.string();
    ASSERT_EQ(run(base + " --mode single-gate --trials 20 --seed 7", dir / "log2"), 0)
        << slurp(dir / "log2");
    const auto text = slurp(dir / "out" / "dropout_report.csv");
    const auto rows = qcnn::parse_report_csv(text);
    EXPECT_EQ(rows.size(), 21U);
    EXPECT_EQ(rows[0].label, "baseline");
    ASSERT_EQ(run(base + " --mode single-gate --trials 20 --seed 7", dir / "log3"), 0);
    EXPECT_EQ(slurp(dir / "out" / "dropout_report.csv"), text);

    ASSERT_EQ(run(base + " --mode cnot --fraction 0.2 --trials 5 --seed 8", dir / "log4"), 0);
    const auto doc = nlohmann::json::parse(slurp(dir / "out" / "dropout_report.json"));
    for (const auto &trial : doc["trials"]) {
        EXPECT_EQ(trial["n_params"], doc["baseline_n_params"]);
    }
    // Mode from the config file when no flag is given.
    ASSERT_EQ(run(base, dir / "log5"), 0);
    EXPECT_EQ(qcnn::parse_report_csv(slurp(dir / "out" / "dropout_report.csv")).size(), 5U);
}

TEST(Cli, SoftdropReportAndModel) {
    const auto dir = workdir("softdrop");
    const auto cfg = write_config(dir, small_config("out"));
    ASSERT_EQ(run("train --config " + cfg.string(), dir / "log"), 0);
    for (const auto *select : {"validation", "gap"}) {
        ASSERT_EQ(run("softdrop --config " + cfg.string() + " --grid default --select " + select,
                      dir / "log2"),
                  0)
            << slurp(dir / "log2");
        const auto rows = qcnn::parse_report_csv(slurp(dir / "out" / "softdrop_report.csv"));
        EXPECT_EQ(rows.size(), 19U);
        EXPECT_EQ(rows[0].label, "baseline");
        const auto doc = nlohmann::json::parse(slurp(dir / "out" / "softdrop_report.json"));
        EXPECT_GE(doc["selected_metrics"]["val_acc"].get<double>(),
                  doc["baseline"]["val_acc"].get<double>());
        auto original = nlohmann::json::parse(slurp(dir / "out" / "model.json"));
        auto mitigated = nlohmann::json::parse(slurp(dir / "out" / "model_softdrop.json"));
        original.erase("params");
        mitigated.erase("params");
        EXPECT_EQ(original, mitigated);
    }
}

TEST(Cli, SoftdropCustomGrid) {
    const auto dir = workdir("grid");
    const auto cfg = write_config(dir, small_config("out"));
    ASSERT_EQ(run("train --config " + cfg.string(), dir / "log"), 0);
    std::ofstream(dir / "grid.json") << R"([{"kind": "zero", "tau": 0.5}, {"kind": "round", "decimals": 1}])";
    ASSERT_EQ(run("softdrop --config " + cfg.string() + " --grid " + (dir / "grid.json").string(),
                  dir / "log2"),
              0)
        << slurp(dir / "log2");
    // identity is added in front of the two listed policies
    EXPECT_EQ(qcnn::parse_report_csv(slurp(dir / "out" / "softdrop_report.csv")).size(), 3U);
    std::ofstream(dir / "bad.json") << R"([{"kind": "zero"}])";
    EXPECT_EQ(run("softdrop --config " + cfg.string() + " --grid " + (dir / "bad.json").string(),
                  dir / "log3"),
              2);
}

TEST(Cli, AncillaReport) {
    const auto dir = workdir("ancilla");
    auto cfg_json = small_config("out");
    cfg_json["model"]["ancilla"] = "Ry";
    const auto cfg = write_config(dir, cfg_json);
    ASSERT_EQ(run("ancilla --config " + cfg.string(), dir / "log"), 0) << slurp(dir / "log");
    const auto rows = qcnn::parse_report_csv(slurp(dir / "out" / "ancilla_report.csv"));
    ASSERT_EQ(rows.size(), 2U);
    EXPECT_EQ(rows[0].label, "before");
    EXPECT_EQ(rows[1].label, "after");
    const auto doc = nlohmann::json::parse(slurp(dir / "out" / "ancilla_report.json"));
    EXPECT_EQ(doc["dropped_layer_tag"], "ancilla");
    // Without model.ancilla the command is a usage error.
    const auto plain = write_config(dir, small_config("out"), "plain.json");
    EXPECT_EQ(run("ancilla --config " + plain.string(), dir / "log2"), 2);
}

TEST(Cli, UsageErrorsExitTwo) {
    const auto dir = workdir("usage");
    EXPECT_EQ(run("", dir / "log"), 2);
    EXPECT_EQ(run("frobnicate --config x", dir / "log"), 2);
    EXPECT_EQ(run("train", dir / "log"), 2);
    EXPECT_EQ(run("train --config " + (dir / "missing.json").string(), dir / "log"), 2);

    auto mismatch = small_config("out");
    mismatch["model"]["n_qubits"] = 5;
    const auto bad = write_config(dir, mismatch, "mismatch.json");
    EXPECT_EQ(run("train --config " + bad.string(), dir / "log"), 2);
    EXPECT_NE(slurp(dir / "log").find("n_qubits"), std::string::npos) << slurp(dir / "log");

    auto no_seed = small_config("out");
    no_seed["train"].erase("seed");
    EXPECT_EQ(run("train --config " + write_config(dir, no_seed, "noseed.json").string(),
                  dir / "log"),
              2);
    EXPECT_NE(slurp(dir / "log").find("train.seed"), std::string::npos);

    std::ofstream(dir / "broken.json") << "{ not json";
    EXPECT_EQ(run("train --config " + (dir / "broken.json").string(), dir / "log"), 2);

    const auto good = write_config(dir, small_config("out"));
    EXPECT_EQ(run("eval --config " + good.string(), dir / "log"), 2);
    EXPECT_EQ(run("dropout --config " + good.string() + " --mode sideways", dir / "log"), 2);
    EXPECT_EQ(run("softdrop --config " + good.string() + " --select best", dir / "log"), 2);
}

TEST(Cli, IoErrorsExitFour) {
    const auto dir = workdir("io");
    std::ofstream(dir / "blocker") << "file, not a directory";
    const auto cfg = write_config(dir, small_config("out"));
    EXPECT_EQ(run("train --config " + cfg.string() + " --out " + (dir / "blocker" / "x").string(),
                  dir / "log"),
              4);
}

TEST(Cli, ExitCodeMapping) {
    std::ostringstream err;
    EXPECT_EQ(qcnn::cli::guarded([] {}, err), 0);
    EXPECT_EQ(qcnn::cli::guarded([] { throw qcnn::NumericError("cost diverged", 4); }, err), 3);
    EXPECT_EQ(qcnn::cli::guarded([] { throw std::runtime_error("unexpected"); }, err), 3);
    EXPECT_EQ(qcnn::cli::guarded([] { throw qcnn::IoError("disk full"); }, err), 4);
    EXPECT_EQ(qcnn::cli::guarded([] { throw qcnn::ConfigError("bad key"); }, err), 2);
    EXPECT_NE(err.str().find("error: cost diverged"), std::string::npos);
}

} // namespace
