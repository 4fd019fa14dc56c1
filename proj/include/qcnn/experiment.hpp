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
 * Experiment configuration and the shared data pipeline.
 *
 * Pipeline: load or synthesize -> split -> optional PCA (fit on train) ->
 * scale for the encoding (fit on train) -> encode. Every random step takes
 * an explicit seed from the config.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcnn/data.hpp"
#include "qcnn/errors.hpp"
#include "qcnn/mitigate.hpp"
#include "qcnn/model.hpp"
#include "qcnn/train.hpp"

namespace qcnn::experiment {

inline constexpr std::string_view tool_version = "0.1.0";

struct CsvSource {
    std::filesystem::path path;
    std::string label_column;
};

struct DropoutSpec {
    std::optional<mitigation::DropoutMode> mode;
    std::optional<double> fraction;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
};

struct SoftdropSpec {
    /// "default" or a path to a JSON array of policies.
    std::string grid = "default";
    mitigation::SelectionMetric select = mitigation::SelectionMetric::validation_accuracy;
    /// Restrict every grid policy to these parameter indices.
    std::optional<std::vector<std::size_t>> mask;
    /// Fraction of the validation split held out for selection only.
    std::optional<double> selection_fraction;
};

struct ExperimentConfig {
    std::variant<data::GaussianSpec, CsvSource> source;
    std::optional<std::size_t> pca_components;
    Encoding encoding = Encoding::qubit;
    /// Featured qubits; an ancilla, when requested, is added on top.
    std::size_t n_qubits = 8;
    BlockType block_type = BlockType::ry_6;
    PoolingKind pooling_kind = PoolingKind::rz_rx;
    std::optional<sim::Axis> ancilla;
    data::SplitOptions split;
    training::TrainConfig train;
    DropoutSpec dropout;
    SoftdropSpec softdrop;
    std::filesystem::path output_dir = "out";
    /// The document as read, echoed into manifests.
    nlohmann::json raw;
};

namespace detail {

class Section {
  public:
    Section(const nlohmann::json &obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) {
            throw ConfigError("config: '" + path_ + "' must be an object");
        }
    }

    [[nodiscard]] bool has(const char *key) const { return obj_.contains(key); }

    [[nodiscard]] Section sub(const char *key) const { return {require(key), name(key)}; }

    template <class T> T get(const char *key) const { return convert<T>(require(key), key); }

    template <class T> T get_or(const char *key, T fallback) const {
        return has(key) ? convert<T>(obj_.at(key), key) : fallback;
    }

    template <class T> std::optional<T> maybe(const char *key) const {
        if (!has(key) || obj_.at(key).is_null()) {
            return std::nullopt;
        }
        return convert<T>(obj_.at(key), key);
    }

    [[nodiscard]] std::string name(const char *key) const { return path_ + "." + key; }

    [[nodiscard]] const nlohmann::json &require(const char *key) const {
        if (!obj_.contains(key)) {
            throw ConfigError("config: missing field '" + name(key) + "'");
        }
        return obj_.at(key);
    }

  private:
    template <class T> T convert(const nlohmann::json &v, const char *key) const {
        if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
            if (!v.is_number_unsigned()) {
                throw ConfigError("config: '" + name(key) + "' must be a non-negative integer");
            }
        }
        if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) {
                throw ConfigError("config: '" + name(key) + "' must be a number");
            }
        }
        try {
            return v.get<T>();
        } catch (const nlohmann::json::exception &) {
            throw ConfigError("config: '" + name(key) + "' has the wrong type");
        }
    }

    const nlohmann::json &obj_;
    std::string path_;
};

template <class Enum, class ParseFn>
Enum parse_enum(const Section &s, const char *key, ParseFn parse, Enum fallback) {
    if (!s.has(key)) {
        return fallback;
    }
    const auto text = s.get<std::string>(key);
    const auto value = parse(text);
    if (!value) {
        throw ConfigError("config: '" + s.name(key) + "' has unknown value '" + text + "'");
    }
    return *value;
}

inline std::optional<mitigation::DropoutMode> parse_dropout_mode(std::string_view s) {
    using mitigation::DropoutMode;
    if (s == "single-qubit") return DropoutMode::single_qubit_fraction;
    if (s == "single-gate") return DropoutMode::single_gate;
    if (s == "cnot") return DropoutMode::cnot_fraction;
    return std::nullopt;
}

inline std::optional<mitigation::SelectionMetric> parse_selection(std::string_view s) {
    using mitigation::SelectionMetric;
    if (s == "validation") return SelectionMetric::validation_accuracy;
    if (s == "gap") return SelectionMetric::gap;
    return std::nullopt;
}

} // namespace detail

using detail::parse_dropout_mode;
using detail::parse_selection;

/// Throws ConfigError when `features` cannot feed the configured encoding.
inline void check_feature_count(const ExperimentConfig &cfg, std::size_t features) {
    if (cfg.encoding == Encoding::qubit && features != cfg.n_qubits) {
        throw ConfigError("config: qubit encoding needs feature count == model.n_qubits, got " +
                          std::to_string(features) + " features for " +
                          std::to_string(cfg.n_qubits) + " qubits");
    }
    if (cfg.encoding == Encoding::amplitude && features > (std::size_t{1} << cfg.n_qubits)) {
        throw ConfigError("config: amplitude encoding on " + std::to_string(cfg.n_qubits) +
                          " qubits holds at most " +
                          std::to_string(std::size_t{1} << cfg.n_qubits) + " features, got " +
                          std::to_string(features));
    }
}

/**
 * @brief Parse and validate a config document.
 *
 * Seeds for the synthetic generator, the split and training are mandatory.
 * Encoding/feature-count compatibility is checked here whenever the feature
 * count is known without reading data (synthetic source or PCA).
 */
inline ExperimentConfig parse_config(const nlohmann::json &doc,
                                     const std::filesystem::path &base_dir = {}) {
    using detail::Section;
    ExperimentConfig cfg;
    cfg.raw = doc;
    const Section root(doc, "config");

    const Section ds = root.sub("dataset");
    if (ds.has("synthetic")) {
        const Section syn = ds.sub("synthetic");
        data::GaussianSpec g;
        g.n_per_class = syn.get<std::size_t>("n_per_class");
        g.n_features = syn.get<std::size_t>("n_features");
        g.separation = syn.get<double>("separation");
        g.noise_sd = syn.get<double>("noise_sd");
        g.seed = syn.get<std::uint64_t>("seed");
        if (g.n_per_class == 0 || g.n_features == 0 || !(g.noise_sd > 0) || !(g.separation >= 0)) {
            throw ConfigError("config: dataset.synthetic sizes and noise_sd must be positive");
        }
        cfg.source = g;
    } else if (ds.has("csv")) {
        const Section csv = ds.sub("csv");
        std::filesystem::path path = csv.get<std::string>("path");
        if (path.is_relative() && !base_dir.empty()) {
            path = base_dir / path;
        }
        cfg.source = CsvSource{path, csv.get<std::string>("label_column")};
    } else {
        throw ConfigError("config: dataset needs a 'synthetic' or 'csv' section");
    }

    if (root.has("reduction")) {
        const Section red = root.sub("reduction");
        const auto kind = red.get<std::string>("kind");
        if (kind == "pca") {
            cfg.pca_components = red.get<std::size_t>("components");
            if (*cfg.pca_components == 0) {
                throw ConfigError("config: reduction.components must be positive");
            }
        } else if (kind != "none") {
            throw ConfigError("config: reduction.kind must be 'none' or 'pca'");
        }
    }

    const Section m = root.sub("model");
    cfg.encoding = detail::parse_enum(m, "encoding", parse_encoding, Encoding::qubit);
    cfg.n_qubits = m.get<std::size_t>("n_qubits");
    cfg.block_type = detail::parse_enum(m, "block_type", parse_block_type, BlockType::ry_6);
    cfg.pooling_kind =
        detail::parse_enum(m, "pooling_kind", parse_pooling_kind, PoolingKind::rz_rx);
    if (auto anc = m.maybe<std::string>("ancilla")) {
        if (*anc == "Rx") {
            cfg.ancilla = sim::Axis::X;
        } else if (*anc == "Ry") {
            cfg.ancilla = sim::Axis::Y;
        } else {
            throw ConfigError("config: model.ancilla must be 'Rx' or 'Ry'");
        }
    }
    const std::size_t total_qubits = cfg.n_qubits + (cfg.ancilla ? 1 : 0);
    if (cfg.n_qubits < 2 || total_qubits > sim::max_qubits) {
        throw ConfigError("config: model.n_qubits must be in [2, " +
                          std::to_string(sim::max_qubits - (cfg.ancilla ? 1 : 0)) + "]");
    }

    const Section sp = root.sub("split");
    if (sp.has("ratios")) {
        const auto r = sp.get<std::vector<double>>("ratios");
        if (r.size() != 3) {
            throw ConfigError("config: split.ratios needs 3 entries (train, test, validation)");
        }
        cfg.split.ratios = {r[0], r[1], r[2]};
    }
    const auto &r = cfg.split.ratios;
    if (!(r.train > 0 && r.test > 0 && r.validation > 0) ||
        std::abs(r.train + r.test + r.validation - 1.0) > 1e-9) {
        throw ConfigError("config: split.ratios must be positive and sum to 1");
    }
    cfg.split.seed = sp.get<std::uint64_t>("seed");
    cfg.split.stratified = sp.get_or("stratified", false);
    cfg.split.merge_test_into_train = sp.get_or("merge_test_into_train", false);

    const Section tr = root.sub("train");
    auto &t = cfg.train;
    t.learning_rate = tr.get_or("learning_rate", t.learning_rate);
    t.momentum = tr.get_or("momentum", t.momentum);
    t.iterations = tr.get<std::size_t>("iterations");
    t.batch_size = tr.get_or<std::size_t>("batch_size", t.batch_size);
    t.seed = tr.get<std::uint64_t>("seed");
    t.gradient_method = detail::parse_enum(tr, "gradient_method", training::parse_gradient_method,
                                           t.gradient_method);
    if (!(t.learning_rate > 0) || !std::isfinite(t.learning_rate)) {
        throw ConfigError("config: train.learning_rate must be positive");
    }
    if (!(t.momentum >= 0 && t.momentum < 1)) {
        throw ConfigError("config: train.momentum must be in [0, 1)");
    }
    if (t.batch_size == 0) {
        throw ConfigError("config: train.batch_size must be positive");
    }

    if (root.has("mitigation")) {
        const Section mit = root.sub("mitigation");
        if (mit.has("dropout")) {
            const Section d = mit.sub("dropout");
            if (d.has("mode")) {
                cfg.dropout.mode = detail::parse_enum(d, "mode", parse_dropout_mode,
                                                      mitigation::DropoutMode::single_gate);
            }
            cfg.dropout.fraction = d.maybe<double>("fraction");
            cfg.dropout.trials = d.maybe<std::size_t>("trials");
            cfg.dropout.seed = d.maybe<std::uint64_t>("seed");
        }
        if (mit.has("softdrop")) {
            const Section s = mit.sub("softdrop");
            if (s.has("grid")) {
                cfg.softdrop.grid = s.get<std::string>("grid");
                if (cfg.softdrop.grid != "default" && !base_dir.empty() &&
                    std::filesystem::path(cfg.softdrop.grid).is_relative()) {
                    cfg.softdrop.grid = (base_dir / cfg.softdrop.grid).string();
                }
            }
            cfg.softdrop.select = detail::parse_enum(s, "select", parse_selection,
                                                     mitigation::SelectionMetric::validation_accuracy);
            cfg.softdrop.mask = s.maybe<std::vector<std::size_t>>("mask");
            cfg.softdrop.selection_fraction = s.maybe<double>("selection_fraction");
            if (cfg.softdrop.selection_fraction &&
                !(*cfg.softdrop.selection_fraction > 0 && *cfg.softdrop.selection_fraction < 1)) {
                throw ConfigError("config: softdrop.selection_fraction must be in (0, 1)");
            }
        }
    }
    if (root.has("output_dir")) {
        cfg.output_dir = root.get<std::string>("output_dir");
        if (cfg.output_dir.is_relative() && !base_dir.empty()) {
            cfg.output_dir = base_dir / cfg.output_dir;
        }
    }

    std::optional<std::size_t> feature_count = cfg.pca_components;
    if (!feature_count) {
        if (const auto *g = std::get_if<data::GaussianSpec>(&cfg.source)) {
            feature_count = g->n_features;
        }
    }
    if (feature_count) {
        check_feature_count(cfg, *feature_count);
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc, path.parent_path());
}

inline QcnnModel build_configured_model(const ExperimentConfig &cfg) {
    if (cfg.ancilla) {
        return build_ancilla_model(cfg.n_qubits, cfg.encoding, cfg.block_type, *cfg.ancilla,
                                   cfg.pooling_kind);
    }
    return build_model(cfg.n_qubits, cfg.encoding, cfg.block_type, cfg.pooling_kind);
}

/// Splits after reduction and scaling, plus the fitted transforms.
struct PreparedData {
    data::Splits splits;
    std::optional<data::PcaTransform> pca;
    std::optional<data::MinMaxScaler> scaler;
};

inline PreparedData prepare_data(const ExperimentConfig &cfg) {
    data::Dataset ds;
    if (const auto *g = std::get_if<data::GaussianSpec>(&cfg.source)) {
        ds = data::synth_gaussians(*g);
    } else {
        const auto &csv = std::get<CsvSource>(cfg.source);
        ds = data::load_csv(csv.path, csv.label_column);
    }
    const std::size_t features = cfg.pca_components.value_or(ds.n_features());
    check_feature_count(cfg, features);

    PreparedData out;
    out.splits = data::split(ds, cfg.split);
    auto &s = out.splits;
    if (cfg.pca_components) {
        out.pca = data::pca_fit(s.train.features, *cfg.pca_components);
        for (auto *part : {&s.train, &s.test, &s.validation}) {
            part->features = data::pca_apply(*out.pca, part->features);
        }
    }
    if (cfg.encoding == Encoding::qubit) {
        out.scaler = data::MinMaxScaler::fit(s.train.features);
        for (auto *part : {&s.train, &s.test, &s.validation}) {
            part->features = out.scaler->apply(part->features);
        }
    } else {
        for (auto *part : {&s.train, &s.test, &s.validation}) {
            part->features =
                data::scale_features(part->features, data::ScaleTarget::amplitude_encoding);
        }
    }
    return out;
}

struct EncodedSplits {
    training::EncodedSet train;
    training::EncodedSet test;
    training::EncodedSet validation;
};

inline EncodedSplits encode_splits(const QcnnModel &model, const data::Splits &s) {
    return {training::encode_set(model, s.train), training::encode_set(model, s.test),
            training::encode_set(model, s.validation)};
}

inline nlohmann::json pca_to_json(const data::PcaTransform &t) {
    nlohmann::json j;
    j["mean"] = std::vector<double>(t.mean.begin(), t.mean.end());
    j["explained_variance"] =
        std::vector<double>(t.explained_variance.begin(), t.explained_variance.end());
    j["components"] = nlohmann::json::array();
    for (Eigen::Index r = 0; r < t.components.rows(); ++r) {
        const Eigen::VectorXd row = t.components.row(r).transpose();
        j["components"].push_back(std::vector<double>(row.begin(), row.end()));
    }
    return j;
}

inline nlohmann::json scaler_to_json(const data::MinMaxScaler &s) {
    return {{"min", std::vector<double>(s.lo.begin(), s.lo.end())},
            {"max", std::vector<double>(s.hi.begin(), s.hi.end())}};
}

/// FNV-1a over the canonical (key-sorted, compact) dump of the config.
inline std::string config_hash(const nlohmann::json &doc) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : doc.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline nlohmann::json train_config_to_json(const training::TrainConfig &t) {
    return {{"learning_rate", t.learning_rate}, {"momentum", t.momentum},
            {"iterations", t.iterations},       {"batch_size", t.batch_size},
            {"seed", t.seed},                   {"gradient_method", to_string(t.gradient_method)}};
}

} // namespace qcnn::experiment
