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
 * JSON model file: circuit structure, trained parameters and provenance.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <type_traits>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "qcnn/errors.hpp"
#include "qcnn/model.hpp"

namespace qcnn {

inline constexpr int model_format_version = 1;

struct ModelMetadata {
    std::uint64_t seed = 0;
    std::string created_by = "qcnn";
    nlohmann::json training_config = nlohmann::json::object();

    friend bool operator==(const ModelMetadata &, const ModelMetadata &) = default;
};

struct ModelFile {
    QcnnModel model;
    ParamVector params;
    ModelMetadata metadata;
};

inline nlohmann::json to_json(const QcnnModel &model, const ParamVector &params,
                              const ModelMetadata &metadata = {}) {
    using nlohmann::json;
    json gates = json::array();
    for (const auto &g : model.gates) {
        json entry;
        entry["kind"] = to_string(g.kind);
        entry["target"] = g.target;
        if (g.control) {
            entry["control"] = *g.control;
            entry["control_value"] = g.control_value.value_or(1);
        }
        entry["param_indices"] = g.param_indices;
        entry["layer_tag"] = to_string(g.layer_tag);
        gates.push_back(std::move(entry));
    }
    json doc;
    doc["format_version"] = model_format_version;
    doc["n_qubits"] = model.n_qubits;
    doc["encoding"] = to_string(model.encoding);
    doc["block_type"] = to_string(model.block_type);
    doc["pooling_kind"] = to_string(model.pooling_kind);
    doc["has_ancilla"] = model.has_ancilla;
    doc["gates"] = std::move(gates);
    doc["n_params"] = model.n_params;
    doc["readout_qubit"] = model.readout_qubit;
    doc["params"] = params;
    doc["metadata"] = {{"seed", metadata.seed},
                       {"created_by", metadata.created_by},
                       {"training_config", metadata.training_config}};
    return doc;
}

/// Pretty-printed model file. Doubles are written with round-trip precision.
inline std::string serialize(const QcnnModel &model, const ParamVector &params,
                             const ModelMetadata &metadata = {}) {
    return to_json(model, params, metadata).dump(2) + "\n";
}

namespace detail {

inline std::size_t line_of(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

/// Typed field access with a diagnostic naming the field path.
class FieldReader {
  public:
    FieldReader(const nlohmann::json &obj, std::string path) : obj_(obj), path_(std::move(path)) {}

    [[nodiscard]] bool has(const char *key) const { return obj_.contains(key); }

    const nlohmann::json &at(const char *key) const {
        if (!obj_.is_object() || !obj_.contains(key)) {
            throw ParseError("missing field '" + name(key) + "'", name(key));
        }
        return obj_.at(key);
    }

    template <class T> T get(const char *key) const {
        const auto &value = at(key);
        try {
            if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
                if (!value.is_number_unsigned()) {
                    throw ParseError("field '" + name(key) + "' must be a non-negative integer",
                                     name(key));
                }
            }
            return value.get<T>();
        } catch (const nlohmann::json::exception &e) {
            throw ParseError("field '" + name(key) + "' has the wrong type: " + e.what(),
                             name(key));
        }
    }

    template <class Enum, class ParseFn>
    Enum get_enum(const char *key, ParseFn parse) const {
        const auto text = get<std::string>(key);
        const auto value = parse(text);
        if (!value) {
            throw ParseError("field '" + name(key) + "' has unknown value '" + text + "'",
                             name(key));
        }
        return *value;
    }

    [[nodiscard]] std::string name(const char *key) const {
        return path_.empty() ? std::string(key) : path_ + "." + key;
    }

  private:
    const nlohmann::json &obj_;
    std::string path_;
};

} // namespace detail

/**
 * @brief Parse a model file.
 *
 * @throws ParseError   malformed JSON (with line) or a missing/ill-typed field
 * @throws VersionError format_version other than the supported one
 * @throws ArgumentError structurally inconsistent model
 */
inline ModelFile deserialize(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        const std::size_t line = detail::line_of(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError("model file is not valid JSON (line " + std::to_string(line) +
                             "): " + e.what(),
                         "", line);
    }
    if (!doc.is_object()) {
        throw ParseError("model file must be a JSON object", "");
    }
    const detail::FieldReader root(doc, "");
    const int version = root.get<int>("format_version");
    if (version != model_format_version) {
        throw VersionError("unsupported model format_version " + std::to_string(version) +
                           " (expected " + std::to_string(model_format_version) + ")");
    }

    ModelFile file;
    QcnnModel &m = file.model;
    m.n_qubits = root.get<std::size_t>("n_qubits");
    m.encoding = root.get_enum<Encoding>("encoding", parse_encoding);
    m.block_type = root.get_enum<BlockType>("block_type", parse_block_type);
    m.pooling_kind = root.get_enum<PoolingKind>("pooling_kind", parse_pooling_kind);
    m.has_ancilla = root.get<bool>("has_ancilla");
    m.n_params = root.get<std::size_t>("n_params");
    m.readout_qubit = root.get<std::size_t>("readout_qubit");

    const auto &gates = root.at("gates");
    if (!gates.is_array()) {
        throw ParseError("field 'gates' must be an array", "gates");
    }
    for (std::size_t i = 0; i < gates.size(); ++i) {
        const detail::FieldReader g(gates[i], "gates[" + std::to_string(i) + "]");
        GateSpec spec;
        spec.kind = g.get_enum<GateKind>("kind", parse_gate_kind);
        spec.target = g.get<std::size_t>("target");
        if (g.has("control")) {
            spec.control = g.get<std::size_t>("control");
            spec.control_value = g.get<int>("control_value");
        }
        spec.param_indices = g.get<std::vector<std::size_t>>("param_indices");
        spec.layer_tag = g.get_enum<LayerTag>("layer_tag", parse_layer_tag);
        m.gates.push_back(std::move(spec));
    }

    const auto &params = root.at("params");
    if (!params.is_array()) {
        throw ParseError("field 'params' must be an array", "params");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].is_number()) {
            throw ParseError("params[" + std::to_string(i) + "] is not a finite number",
                             "params[" + std::to_string(i) + "]");
        }
        file.params.push_back(params[i].get<double>());
    }
    if (file.params.size() != m.n_params) {
        throw ParseError("params has " + std::to_string(file.params.size()) +
                             " entries but n_params is " + std::to_string(m.n_params),
                         "params");
    }

    if (root.has("metadata")) {
        const detail::FieldReader meta(root.at("metadata"), "metadata");
        if (meta.has("seed")) {
            file.metadata.seed = meta.get<std::uint64_t>("seed");
        }
        if (meta.has("created_by")) {
            file.metadata.created_by = meta.get<std::string>("created_by");
        }
        if (meta.has("training_config")) {
            file.metadata.training_config = meta.at("training_config");
        }
    }

    if (m.n_qubits < 2 || m.n_qubits > sim::max_qubits ||
        (m.has_ancilla && m.n_qubits < 3)) {
        throw ArgumentError("model file: n_qubits out of range");
    }
    // The schedule is a function of the featured-qubit count only.
    m.active_schedule = build_model(m.n_featured_qubits(), m.encoding, m.block_type,
                                    m.pooling_kind)
                            .active_schedule;
    if (m.active_schedule.back().front() != m.readout_qubit) {
        throw ArgumentError("model file: readout_qubit does not match the pooling schedule");
    }
    validate(m);
    return file;
}

inline void save_model(const std::filesystem::path &path, const QcnnModel &model,
                       const ParamVector &params, const ModelMetadata &metadata = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << serialize(model, params, metadata);
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

inline ModelFile load_model(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open model file " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return deserialize(buffer.str());
}

} // namespace qcnn
