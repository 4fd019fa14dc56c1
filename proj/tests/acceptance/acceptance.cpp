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
// Acceptance gate. Runs each acceptance criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit status is nonzero if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "../oracles.hpp"
#include "qcnn/qcnn.hpp"

namespace {

namespace fs = std::filesystem;
using namespace qcnn;
using Clock = std::chrono::steady_clock;
constexpr double pi = std::numbers::pi;

// Pinned seeds for the end-to-end criteria.
constexpr std::uint64_t data_seed = 1;
constexpr std::uint64_t split_seed = 1;
constexpr std::uint64_t train_seed = 1;
constexpr std::uint64_t dropout_seed = 1;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char *f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, a);
    return buf;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// ---------------------------------------------------------------------------

Outcome simulator_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> angle(-2 * pi, 2 * pi);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 4;
        std::vector<sim::GateOp> ops;
        const std::size_t depth = 5 + rng() % 20;
        for (std::size_t k = 0; k < depth; ++k) {
            sim::Gate2x2<double> g;
            switch (rng() % 5) {
            case 0: g = sim::rotation(sim::Axis::X, angle(rng)); break;
            case 1: g = sim::rotation(sim::Axis::Y, angle(rng)); break;
            case 2: g = sim::rotation(sim::Axis::Z, angle(rng)); break;
            case 3: g = sim::pauli_x(); break;
            default: g = sim::u3(angle(rng), angle(rng), angle(rng)); break;
            }
            sim::GateOp op{g, rng() % n, std::nullopt, 1};
            if (n > 1 && rng() % 2 == 0) {
                std::size_t c = rng() % n;
                while (c == op.target) {
                    c = rng() % n;
                }
                op.control = c;
                op.control_value = static_cast<int>(rng() % 2);
            }
            ops.push_back(op);
        }
        // Random normalized start state, so every column of the unitary matters.
        std::normal_distribution<double> normal;
        std::vector<std::complex<double>> psi(std::size_t{1} << n);
        double norm2 = 0;
        for (auto &a : psi) {
            a = {normal(rng), normal(rng)};
            norm2 += std::norm(a);
        }
        Eigen::VectorXcd v(static_cast<Eigen::Index>(psi.size()));
        for (std::size_t i = 0; i < psi.size(); ++i) {
            psi[i] /= std::sqrt(norm2);
            v(static_cast<Eigen::Index>(i)) = psi[i];
        }
        auto state = sim::StateVector<double>::from_amplitudes(n, psi);
        for (const auto &op : ops) {
            sim::apply_op(state, op);
        }
        const Eigen::VectorXcd expect = sim::dense_unitary(ops, n) * v;
        for (Eigen::Index i = 0; i < expect.size(); ++i) {
            worst = std::max(worst, std::abs(state[static_cast<std::size_t>(i)] - expect(i)));
        }
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-10 && secs < 10,
            "max |delta amplitude| " + fmt("%.3g", worst) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome u3_decomposition() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> angle(-2 * pi, 2 * pi);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const double t = angle(rng), p = angle(rng), l = angle(rng);
        // Product assembled from the library's rotation gates.
        const auto product = sim::rotation(sim::Axis::Z, p) * sim::rotation(sim::Axis::X, -pi / 2) *
                             sim::rotation(sim::Axis::Z, t) * sim::rotation(sim::Axis::X, pi / 2) *
                             sim::rotation(sim::Axis::Z, l);
        const auto closed = sim::u3(t, p, l);
        oracle::M2 a, b;
        a << product(0, 0), product(0, 1), product(1, 0), product(1, 1);
        b << closed(0, 0), closed(0, 1), closed(1, 0), closed(1, 1);
        const auto canonical = oracle::u3_canonical(t, p, l);
        worst = std::max({worst, oracle::distance_up_to_phase(a, canonical),
                          oracle::distance_up_to_phase(b, canonical),
                          oracle::distance_up_to_phase(oracle::u3_five_factor(t, p, l), canonical)});
    }
    return {worst < 1e-10, "max distance up to phase " + fmt("%.3g", worst)};
}

Outcome gradient_cross_check() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> angle(0, 2 * pi);
    std::uniform_real_distribution<double> feature(0, pi);
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng() % 5;
        const auto block = rng() % 2 ? BlockType::ry_6 : BlockType::u3_15;
        const auto pool = rng() % 2 ? PoolingKind::rz_rx : PoolingKind::rz_rz;
        const auto model = trial % 5 == 4
                               ? build_ancilla_model(n - 1 < 2 ? 2 : n - 1, Encoding::qubit, block,
                                                     sim::Axis::X, pool)
                               : build_model(n, Encoding::qubit, block, pool);
        ParamVector params(model.n_params);
        for (auto &p : params) {
            p = angle(rng);
        }
        training::EncodedSet batch;
        const std::size_t k = 1 + rng() % 8;
        for (std::size_t i = 0; i < k; ++i) {
            std::vector<double> x(model.n_featured_qubits());
            for (auto &v : x) {
                v = feature(rng);
            }
            batch.inputs.push_back(encode(model, x));
            batch.labels.push_back(static_cast<int>(rng() % 2));
        }
        const auto ps = training::gradient(model, params, batch, training::GradientMethod::parameter_shift);
        const auto fd = training::gradient(model, params, batch, training::GradientMethod::finite_difference);
        for (std::size_t j = 0; j < ps.size(); ++j) {
            worst = std::max(worst, std::abs(ps[j] - fd[j]));
        }
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-5 && secs < 60,
            "max |ps - fd| " + fmt("%.3g", worst) + ", " + fmt("%.2f", secs) + " s"};
}

// ---------------------------------------------------------------------------
// End-to-end criteria run through the command layer, so the artifacts the
// determinism criterion compares are the real tool outputs.

nlohmann::json base_config(const fs::path &out) {
    nlohmann::json cfg = {
        {"dataset",
         {{"synthetic",
           {{"n_per_class", 100},
            {"n_features", 8},
            {"separation", 6.0},
            {"noise_sd", 1.0},
            {"seed", data_seed}}}}},
        {"reduction", {{"kind", "none"}}},
        {"model",
         {{"encoding", "qubit"}, {"n_qubits", 8}, {"block_type", "ry_6"}, {"pooling_kind", "rz_rx"}}},
        {"split",
         {{"ratios", {0.6, 0.2, 0.2}},
          {"seed", split_seed},
          {"stratified", true},
          {"merge_test_into_train", false}}},
        {"train",
         {{"learning_rate", 0.01},
          {"momentum", 0.9},
          {"iterations", 200},
          {"batch_size", 25},
          {"seed", train_seed},
          {"gradient_method", "parameter_shift"}}},
        {"output_dir", out.string()}};
    return cfg;
}

fs::path write_config(const fs::path &dir, const std::string &name, const nlohmann::json &cfg) {
    fs::create_directories(dir);
    const auto path = dir / name;
    std::ofstream(path) << cfg.dump(2) << "\n";
    return path;
}

struct EndToEnd {
    double train_secs = 0;
    training::Metrics trained;
    mitigation::DropoutReport dropout;
    cli::AncillaResult ancilla;
    mitigation::SearchReport softdrop;
};

/// Criteria 4-7 as tool runs rooted at `root`.
EndToEnd run_end_to_end(const fs::path &root) {
    std::ostringstream quiet;
    EndToEnd e;

    const auto c4_dir = root / "train";
    const auto c4_cfg = write_config(root, "train.json", base_config(c4_dir));
    const auto t0 = Clock::now();
    cli::cmd_train({c4_cfg, std::nullopt, std::nullopt}, quiet);
    e.train_secs = seconds_since(t0);
    const auto manifest = nlohmann::json::parse(slurp(c4_dir / "manifest.json"));
    e.trained = training::make_metrics(manifest["metrics"]["test_acc"].get<double>(),
                                       manifest["metrics"]["val_acc"].get<double>());

    cli::DropoutOptions d;
    d.mode = mitigation::DropoutMode::single_gate;
    d.trials = 20;
    d.seed = dropout_seed;
    e.dropout = cli::cmd_dropout({c4_cfg, std::nullopt, std::nullopt}, d, quiet);

    auto anc = base_config(root / "ancilla");
    anc["model"]["ancilla"] = "Ry";
    e.ancilla = cli::cmd_ancilla({write_config(root, "ancilla.json", anc), std::nullopt, std::nullopt},
                                 quiet);

    auto overfit = base_config(root / "overfit");
    overfit["dataset"]["synthetic"]["noise_sd"] = 3.0;
    overfit["split"]["merge_test_into_train"] = true;
    const auto of_cfg = write_config(root, "overfit.json", overfit);
    cli::cmd_train({of_cfg, std::nullopt, std::nullopt}, quiet);
    cli::SoftdropOptions s;
    s.grid = "default";
    s.select = mitigation::SelectionMetric::gap;
    e.softdrop = cli::cmd_softdrop({of_cfg, std::nullopt, std::nullopt}, s, quiet);
    return e;
}

Outcome end_to_end_training(const EndToEnd &e) {
    return {e.trained.test_accuracy >= 0.90 && e.train_secs < 300,
            "test acc " + fmt("%.4f", e.trained.test_accuracy) + ", train " +
                fmt("%.1f", e.train_secs) + " s"};
}

Outcome hard_dropout_collapse(const EndToEnd &e) {
    const double base = e.dropout.baseline.test_accuracy;
    const double drop = base - e.dropout.test_summary.mean;
    const double worst = e.dropout.test_summary.min;
    // The worst trial must reach chance level: at most 10 points above 0.5.
    return {drop >= 0.10 && worst <= 0.60,
            "baseline " + fmt("%.4f", base) + ", mean drop " + fmt("%.4f", drop) +
                ", worst trial " + fmt("%.4f", worst)};
}

Outcome ancilla_experiment(const EndToEnd &e) {
    const double drop = e.ancilla.before.test_accuracy - e.ancilla.after.test_accuracy;
    return {drop >= 0.15, "before " + fmt("%.4f", e.ancilla.before.test_accuracy) + ", after " +
                              fmt("%.4f", e.ancilla.after.test_accuracy)};
}

Outcome softdrop_dominance(const EndToEnd &e) {
    const auto &base = e.softdrop.baseline();
    const auto &sel = e.softdrop.selected_metrics();
    const bool pass = sel.validation_accuracy >= base.validation_accuracy &&
                      std::abs(sel.gap) < std::abs(base.gap);
    return {pass, mitigation::describe(e.softdrop.selected_policy()) + ": val " +
                      fmt("%.4f", base.validation_accuracy) + " -> " +
                      fmt("%.4f", sel.validation_accuracy) + ", |gap| " +
                      fmt("%.4f", std::abs(base.gap)) + " -> " + fmt("%.4f", std::abs(sel.gap))};
}

// ---------------------------------------------------------------------------

Outcome policy_laws() {
    std::mt19937_64 rng(808);
    std::uniform_real_distribution<double> wide(-8, 8);
    std::uniform_real_distribution<double> narrow(-0.3, 0.3);
    std::size_t violations = 0;
    const auto grid = mitigation::default_grid();
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<double> v(24);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double w = wide(rng);
            v[i] = i % 3 == 0 ? std::round(w) + narrow(rng) : i % 3 == 1 ? narrow(rng) : w;
        }
        for (const auto &p : grid) {
            const auto once = mitigation::apply_policy(v, p);
            violations += mitigation::apply_policy(once, p) != once ? 1 : 0;
            if (p.kind == mitigation::SoftDropoutPolicy::Kind::zero) {
                for (double x : once) {
                    violations += (x != 0.0 && std::abs(x) < *p.tau) ? 1 : 0;
                }
            }
            if (p.kind == mitigation::SoftDropoutPolicy::Kind::snap) {
                for (double x : once) {
                    const double dist = std::min(x - std::floor(x), std::ceil(x) - x);
                    violations += (x != std::floor(x) && dist <= *p.delta) ? 1 : 0;
                }
            }
        }
    }
    return {violations == 0, std::to_string(violations) + " violations over 10000 vectors x " +
                                 std::to_string(grid.size()) + " policies"};
}

Outcome pca_properties() {
    std::mt19937_64 rng(909);
    std::normal_distribution<double> normal;
    double ortho = 0, iso = 0, oracle_err = 0;
    bool ordered = true;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index k = 2 + trial % 7;
        Eigen::MatrixXd x(40, k);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = 0; j < k; ++j) {
                x(i, j) = normal(rng) * static_cast<double>(j + 1) + (j > 0 ? 0.5 * x(i, j - 1) : 0);
            }
        }
        const auto t = data::pca_fit(x, static_cast<std::size_t>(k));
        ortho = std::max(ortho, (t.components * t.components.transpose() -
                                 Eigen::MatrixXd::Identity(k, k))
                                    .cwiseAbs()
                                    .maxCoeff());
        for (Eigen::Index i = 1; i < k; ++i) {
            ordered = ordered && t.explained_variance(i) <= t.explained_variance(i - 1);
        }
        const auto y = data::pca_apply(t, x);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
                iso = std::max(iso, std::abs((x.row(i) - x.row(j)).norm() - (y.row(i) - y.row(j)).norm()));
            }
        }
    }
    // Points on y = 2x.
    Eigen::MatrixXd line(6, 2);
    for (int i = 0; i < 6; ++i) {
        line(i, 0) = 0.7 * i - 1;
        line(i, 1) = 2 * line(i, 0);
    }
    const auto t = data::pca_fit(line, 2);
    const Eigen::MatrixXd c = line.rowwise() - line.colwise().mean();
    const Eigen::MatrixXd cov = c.transpose() * c / 5.0;
    const auto eig = oracle::eig2_symmetric(cov(0, 0), cov(0, 1), cov(1, 1));
    oracle_err = std::max({std::abs(t.explained_variance(0) - eig.lambda1),
                           std::abs(t.explained_variance(1) - eig.lambda2),
                           std::abs(std::abs(t.components.row(0).dot(eig.v1)) - 1.0),
                           (t.components.row(0).transpose() - Eigen::Vector2d(1, 2) / std::sqrt(5.0))
                               .cwiseAbs()
                               .maxCoeff()});
    return {ortho < 1e-9 && ordered && iso < 1e-9 && oracle_err < 1e-9,
            "orthonormality " + fmt("%.2g", ortho) + ", isometry " + fmt("%.2g", iso) +
                ", line oracle " + fmt("%.2g", oracle_err) + (ordered ? "" : ", variances unordered")};
}

Outcome determinism(const fs::path &first, const fs::path &second) {
    std::size_t compared = 0;
    std::vector<std::string> differing;
    for (const auto &entry : fs::recursive_directory_iterator(first)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        const auto rel = fs::relative(entry.path(), first);
        ++compared;
        if (!fs::exists(second / rel) || slurp(entry.path()) != slurp(second / rel)) {
            differing.push_back(rel.string());
        }
    }
    std::string detail = std::to_string(compared) + " artifacts compared";
    for (const auto &d : differing) {
        detail += ", differs: " + d;
    }
    return {differing.empty() && compared > 0, detail};
}

} // namespace

int main() {
    const fs::path root = fs::path(QCNN_TEST_TMP) / "acceptance";
    fs::remove_all(root);

    int failures = 0;
    const auto report = [&](int id, const char *name, const Outcome &o) {
        std::printf("[%s] criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", id, name,
                    o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    };
    const auto guarded = [](const std::function<Outcome()> &fn) {
        try {
            return fn();
        } catch (const std::exception &e) {
            return Outcome{false, std::string("exception: ") + e.what()};
        }
    };

    report(1, "simulator matches dense unitary", guarded(simulator_oracle));
    report(2, "U3 five-factor decomposition", guarded(u3_decomposition));
    report(3, "parameter shift matches finite differences", guarded(gradient_cross_check));

    EndToEnd first, second;
    bool ran = true;
    std::string failure;
    try {
        first = run_end_to_end(root / "run");
        fs::copy(root / "run", root / "first", fs::copy_options::recursive);
    } catch (const std::exception &ex) {
        ran = false;
        failure = ex.what();
    }
    const auto needs_run = [&](const std::function<Outcome()> &fn) {
        return ran ? guarded(fn) : Outcome{false, "end-to-end run failed: " + failure};
    };
    report(4, "end-to-end training", needs_run([&] { return end_to_end_training(first); }));
    report(5, "hard dropout collapse", needs_run([&] { return hard_dropout_collapse(first); }));
    report(6, "ancilla gate dropout", needs_run([&] { return ancilla_experiment(first); }));
    report(7, "soft dropout dominance", needs_run([&] { return softdrop_dominance(first); }));
    report(8, "soft dropout transform laws", guarded(policy_laws));
    report(9, "PCA properties", guarded(pca_properties));
    report(10, "determinism of criteria 4-7", needs_run([&] {
               // Same paths as the first run, since manifests record their config.
               fs::remove_all(root / "run");
               second = run_end_to_end(root / "run");
               return determinism(root / "first", root / "run");
           }));

    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
