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
 * QCNN circuit description, construction, feature maps and forward pass.
 *
 * A model is an ordered list of GateSpec entries. Parameterized gates refer
 * into a flat ParamVector by index; every index is owned by exactly one gate.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qcnn/errors.hpp"
#include "qcnn/sim/dense_unitary.hpp"
#include "qcnn/sim/gates.hpp"
#include "qcnn/sim/state_vector.hpp"

namespace qcnn {

using ParamVector = std::vector<double>;
using State = sim::StateVector<double>;

enum class GateKind { Rx, Ry, Rz, U3, CNOT, CRz, CRx };
enum class Encoding { amplitude, qubit };
enum class BlockType { u3_15, ry_6 };
/// rz_rx: CRz (filled control) then CRx (open control).
/// rz_rz: CRz then CRz, the variant drawn in the building-block figure.
enum class PoolingKind { rz_rx, rz_rz };

struct LayerTag {
    enum class Kind { conv, pool, ancilla };
    Kind kind = Kind::conv;
    std::size_t index = 0;

    friend bool operator==(const LayerTag &, const LayerTag &) = default;
};

struct GateSpec {
    GateKind kind = GateKind::Ry;
    std::size_t target = 0;
    std::optional<std::size_t> control;
    std::optional<int> control_value;
    std::vector<std::size_t> param_indices;
    LayerTag layer_tag;

    friend bool operator==(const GateSpec &, const GateSpec &) = default;
};

struct QcnnModel {
    std::size_t n_qubits = 0;
    Encoding encoding = Encoding::qubit;
    BlockType block_type = BlockType::ry_6;
    PoolingKind pooling_kind = PoolingKind::rz_rx;
    std::vector<GateSpec> gates;
    std::size_t n_params = 0;
    std::size_t readout_qubit = 0;
    /// Active qubits at the start and after every pooling stage.
    std::vector<std::vector<std::size_t>> active_schedule;
    bool has_ancilla = false;

    /// Qubits that receive features; the ancilla, when present, is the top qubit.
    [[nodiscard]] std::size_t n_featured_qubits() const {
        return has_ancilla ? n_qubits - 1 : n_qubits;
    }

    friend bool operator==(const QcnnModel &, const QcnnModel &) = default;
};

// ---------------------------------------------------------------------------
// Names

constexpr std::string_view to_string(GateKind k) {
    switch (k) {
    case GateKind::Rx: return "Rx";
    case GateKind::Ry: return "Ry";
    case GateKind::Rz: return "Rz";
    case GateKind::U3: return "U3";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CRz: return "CRz";
    case GateKind::CRx: return "CRx";
    }
    return "?";
}
constexpr std::string_view to_string(Encoding e) {
    return e == Encoding::amplitude ? "amplitude" : "qubit";
}
constexpr std::string_view to_string(BlockType b) {
    return b == BlockType::u3_15 ? "u3_15" : "ry_6";
}
constexpr std::string_view to_string(PoolingKind p) {
    return p == PoolingKind::rz_rx ? "rz_rx" : "rz_rz";
}
inline std::string to_string(const LayerTag &tag) {
    switch (tag.kind) {
    case LayerTag::Kind::conv: return "conv(" + std::to_string(tag.index) + ")";
    case LayerTag::Kind::pool: return "pool(" + std::to_string(tag.index) + ")";
    case LayerTag::Kind::ancilla: return "ancilla";
    }
    return "?";
}

namespace detail {
template <class Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view name, const Enum (&values)[N]) {
    for (const Enum v : values) {
        if (to_string(v) == name) {
            return v;
        }
    }
    return std::nullopt;
}
} // namespace detail

inline std::optional<GateKind> parse_gate_kind(std::string_view s) {
    constexpr GateKind all[] = {GateKind::Rx,   GateKind::Ry,  GateKind::Rz, GateKind::U3,
                                GateKind::CNOT, GateKind::CRz, GateKind::CRx};
    return detail::lookup(s, all);
}
inline std::optional<Encoding> parse_encoding(std::string_view s) {
    constexpr Encoding all[] = {Encoding::amplitude, Encoding::qubit};
    return detail::lookup(s, all);
}
inline std::optional<BlockType> parse_block_type(std::string_view s) {
    constexpr BlockType all[] = {BlockType::u3_15, BlockType::ry_6};
    return detail::lookup(s, all);
}
inline std::optional<PoolingKind> parse_pooling_kind(std::string_view s) {
    constexpr PoolingKind all[] = {PoolingKind::rz_rx, PoolingKind::rz_rz};
    return detail::lookup(s, all);
}
inline std::optional<LayerTag> parse_layer_tag(std::string_view s) {
    if (s == "ancilla") {
        return LayerTag{LayerTag::Kind::ancilla, 0};
    }
    for (const auto [prefix, kind] : {std::pair{std::string_view{"conv("}, LayerTag::Kind::conv},
                                      std::pair{std::string_view{"pool("}, LayerTag::Kind::pool}}) {
        if (s.starts_with(prefix) && s.ends_with(")") && s.size() > prefix.size() + 1) {
            const auto digits = s.substr(prefix.size(), s.size() - prefix.size() - 1);
            if (!std::all_of(digits.begin(), digits.end(),
                             [](char c) { return c >= '0' && c <= '9'; })) {
                return std::nullopt;
            }
            return LayerTag{kind, static_cast<std::size_t>(std::stoull(std::string(digits)))};
        }
    }
    return std::nullopt;
}

/// Number of angles a gate of this kind consumes.
constexpr std::size_t param_count(GateKind k) {
    switch (k) {
    case GateKind::U3: return 3;
    case GateKind::CNOT: return 0;
    default: return 1;
    }
}
constexpr bool is_controlled(GateKind k) {
    return k == GateKind::CNOT || k == GateKind::CRz || k == GateKind::CRx;
}
/// Rx, Ry, Rz and U3: the gates hard dropout treats as "single-qubit gates".
constexpr bool is_single_qubit(GateKind k) { return !is_controlled(k); }

// ---------------------------------------------------------------------------
// Feature maps

/// Features as amplitudes, zero-padded to 2^n_qubits and normalized.
inline State amplitude_encode(std::span<const double> features, std::size_t n_qubits) {
    State state(n_qubits);
    if (features.empty() || features.size() > state.size()) {
        throw CapacityError(std::to_string(features.size()) +
                            " features do not fit amplitude encoding on " +
                            std::to_string(n_qubits) + " qubits");
    }
    double norm2 = 0.0;
    for (const double x : features) {
        if (!std::isfinite(x)) {
            throw ArgumentError("amplitude_encode: non-finite feature");
        }
        norm2 += x * x;
    }
    if (norm2 == 0.0) {
        throw EncodingError("amplitude_encode: feature vector has zero norm");
    }
    const double inv = 1.0 / std::sqrt(norm2);
    auto amps = state.amplitudes();
    amps[0] = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        amps[i] = features[i] * inv;
    }
    return state;
}

/**
 * @brief Product state with qubit i in cos(x_i/2)|0> + sin(x_i/2)|1>.
 *
 * Qubits beyond the feature count (e.g. an ancilla) stay in |0>.
 */
inline State qubit_encode(std::span<const double> features, std::size_t n_qubits = 0) {
    if (n_qubits == 0) {
        n_qubits = features.size();
    }
    if (features.empty() || features.size() > n_qubits) {
        throw ArgumentError("qubit_encode: need 1.." + std::to_string(n_qubits) + " features");
    }
    State state(n_qubits);
    for (std::size_t q = 0; q < features.size(); ++q) {
        if (!std::isfinite(features[q])) {
            throw ArgumentError("qubit_encode: non-finite feature at index " + std::to_string(q));
        }
    }
    // Build the product directly: amplitude of basis index i is the product
    // of per-qubit factors for the bits of i.
    auto amps = state.amplitudes();
    const std::size_t featured_dim = std::size_t{1} << features.size();
    for (std::size_t i = 0; i < featured_dim; ++i) {
        double a = 1.0;
        for (std::size_t q = 0; q < features.size(); ++q) {
            a *= ((i >> q) & 1U) ? std::sin(features[q] / 2) : std::cos(features[q] / 2);
        }
        amps[i] = a;
    }
    return state;
}

/// Encode one feature row for `model`, checking the feature count.
inline State encode(const QcnnModel &model, std::span<const double> features) {
    const std::size_t featured = model.n_featured_qubits();
    if (model.encoding == Encoding::qubit) {
        if (features.size() != featured) {
            throw ArgumentError("qubit encoding needs " + std::to_string(featured) +
                                " features, got " + std::to_string(features.size()));
        }
        return qubit_encode(features, model.n_qubits);
    }
    if (features.size() > (std::size_t{1} << featured)) {
        throw CapacityError("amplitude encoding on " + std::to_string(featured) +
                            " qubits holds at most " + std::to_string(std::size_t{1} << featured) +
                            " features");
    }
    return amplitude_encode(features, model.n_qubits);
}

// ---------------------------------------------------------------------------
// Construction

namespace detail {

class CircuitBuilder {
  public:
    explicit CircuitBuilder(QcnnModel &model) : model_(model) {}

    void single(GateKind kind, std::size_t target, LayerTag tag) {
        GateSpec g{kind, target, std::nullopt, std::nullopt, take(param_count(kind)), tag};
        model_.gates.push_back(std::move(g));
    }
    void controlled(GateKind kind, std::size_t control, std::size_t target, int control_value,
                    LayerTag tag) {
        GateSpec g{kind, target, control, control_value, take(param_count(kind)), tag};
        model_.gates.push_back(std::move(g));
    }

    void conv_block(std::size_t a, std::size_t b, LayerTag tag) {
        if (model_.block_type == BlockType::u3_15) {
            single(GateKind::U3, a, tag);
            single(GateKind::U3, b, tag);
            controlled(GateKind::CNOT, a, b, 1, tag);
            single(GateKind::Ry, a, tag);
            single(GateKind::Rz, b, tag);
            controlled(GateKind::CNOT, b, a, 1, tag);
            single(GateKind::Ry, a, tag);
            controlled(GateKind::CNOT, a, b, 1, tag);
            single(GateKind::U3, a, tag);
            single(GateKind::U3, b, tag);
        } else {
            single(GateKind::Ry, a, tag);
            single(GateKind::Ry, b, tag);
            controlled(GateKind::CNOT, a, b, 1, tag);
            single(GateKind::Ry, a, tag);
            single(GateKind::Ry, b, tag);
            controlled(GateKind::CNOT, a, b, 1, tag);
            single(GateKind::Ry, a, tag);
            single(GateKind::Ry, b, tag);
        }
    }

    void pool_block(std::size_t control, std::size_t target, LayerTag tag) {
        controlled(GateKind::CRz, control, target, 1, tag);
        const GateKind second =
            model_.pooling_kind == PoolingKind::rz_rx ? GateKind::CRx : GateKind::CRz;
        controlled(second, control, target, 0, tag);
    }

  private:
    std::vector<std::size_t> take(std::size_t count) {
        std::vector<std::size_t> idx(count);
        for (auto &i : idx) {
            i = model_.n_params++;
        }
        return idx;
    }

    QcnnModel &model_;
};

/// Brick-pattern pairs over an active list of size m >= 2.
inline std::vector<std::pair<std::size_t, std::size_t>>
conv_pairs(const std::vector<std::size_t> &active) {
    const std::size_t m = active.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (m == 2) {
        pairs.emplace_back(active[0], active[1]);
        return pairs;
    }
    for (std::size_t i = 0; i + 1 < m; i += 2) {
        pairs.emplace_back(active[i], active[i + 1]);
    }
    for (std::size_t i = 1; i < m; i += 2) {
        pairs.emplace_back(active[i], active[(i + 1) % m]);
    }
    // Odd m: the last qubit closes the ring with the first.
    if (m % 2 == 1) {
        pairs.emplace_back(active[m - 1], active[0]);
    }
    return pairs;
}

} // namespace detail

/**
 * @brief Build an alternating conv/pool QCNN on qubits [0, n_qubits).
 *
 * Each stage tiles conv blocks in a two-row brick pattern with wraparound,
 * then pools adjacent pairs (first = control, second = target). Controls
 * leave the active set; an odd leftover qubit passes through. Stages repeat
 * until one qubit, the readout, remains.
 */
inline QcnnModel build_model(std::size_t n_qubits, Encoding encoding, BlockType block_type,
                             PoolingKind pooling_kind = PoolingKind::rz_rx) {
    if (n_qubits < 2) {
        throw ArgumentError("build_model: need at least 2 qubits");
    }
    if (n_qubits > sim::max_qubits) {
        throw CapacityError("build_model: at most " + std::to_string(sim::max_qubits) +
                            " qubits");
    }
    QcnnModel model;
    model.n_qubits = n_qubits;
    model.encoding = encoding;
    model.block_type = block_type;
    model.pooling_kind = pooling_kind;

    detail::CircuitBuilder builder(model);
    std::vector<std::size_t> active(n_qubits);
    for (std::size_t q = 0; q < n_qubits; ++q) {
        active[q] = q;
    }
    model.active_schedule.push_back(active);
    for (std::size_t stage = 0; active.size() > 1; ++stage) {
        for (const auto &[a, b] : detail::conv_pairs(active)) {
            builder.conv_block(a, b, {LayerTag::Kind::conv, stage});
        }
        std::vector<std::size_t> survivors;
        std::size_t i = 0;
        for (; i + 1 < active.size(); i += 2) {
            builder.pool_block(active[i], active[i + 1], {LayerTag::Kind::pool, stage});
            survivors.push_back(active[i + 1]);
        }
        if (i < active.size()) {
            survivors.push_back(active[i]);
        }
        active = std::move(survivors);
        model.active_schedule.push_back(active);
    }
    model.readout_qubit = active.front();
    return model;
}

/**
 * @brief build_model on `n_featured_qubits` plus one ancilla qubit.
 *
 * The ancilla (highest index) starts in |0>, receives one trainable
 * rotation at the start of the first conv layer, and after that layer
 * controls a CNOT onto the readout qubit. It then leaves the circuit
 * at the first pooling stage. The ancilla angle takes the last parameter
 * index, so base-model parameters keep their positions.
 */
inline QcnnModel build_ancilla_model(std::size_t n_featured_qubits, Encoding encoding,
                                     BlockType block_type, sim::Axis ancilla_rotation,
                                     PoolingKind pooling_kind = PoolingKind::rz_rx) {
    if (ancilla_rotation == sim::Axis::Z) {
        throw ArgumentError("ancilla rotation must be Rx or Ry");
    }
    QcnnModel model = build_model(n_featured_qubits, encoding, block_type, pooling_kind);
    if (n_featured_qubits + 1 > sim::max_qubits) {
        throw CapacityError("build_ancilla_model: too many qubits");
    }
    const std::size_t ancilla = n_featured_qubits;
    model.n_qubits = n_featured_qubits + 1;
    model.has_ancilla = true;

    GateSpec rot{ancilla_rotation == sim::Axis::X ? GateKind::Rx : GateKind::Ry,
                 ancilla,
                 std::nullopt,
                 std::nullopt,
                 {model.n_params},
                 {LayerTag::Kind::ancilla, 0}};
    model.n_params += 1;

    const auto first_pool =
        std::find_if(model.gates.begin(), model.gates.end(),
                     [](const GateSpec &g) { return g.layer_tag.kind == LayerTag::Kind::pool; });
    GateSpec entangle{GateKind::CNOT, model.readout_qubit, ancilla, 1, {},
                      {LayerTag::Kind::conv, 0}};
    model.gates.insert(first_pool, std::move(entangle));
    model.gates.insert(model.gates.begin(), std::move(rot));
    return model;
}

/// Index of the first gate carrying `tag`, if any.
inline std::optional<std::size_t> find_gate(const QcnnModel &model, const LayerTag &tag) {
    for (std::size_t i = 0; i < model.gates.size(); ++i) {
        if (model.gates[i].layer_tag == tag) {
            return i;
        }
    }
    return std::nullopt;
}

/**
 * @brief Check structural invariants; throws ArgumentError on violation.
 *
 * Verifies parameter counts per kind, control presence, qubit ranges, and
 * that parameter indices cover [0, n_params) exactly once.
 */
inline void validate(const QcnnModel &model) {
    if (model.n_qubits < 1 || model.n_qubits > sim::max_qubits) {
        throw ArgumentError("model: n_qubits out of range");
    }
    if (model.readout_qubit >= model.n_qubits) {
        throw ArgumentError("model: readout_qubit out of range");
    }
    std::vector<int> owners(model.n_params, 0);
    for (std::size_t i = 0; i < model.gates.size(); ++i) {
        const auto &g = model.gates[i];
        const std::string where = "model: gate " + std::to_string(i) + ": ";
        if (g.param_indices.size() != param_count(g.kind)) {
            throw ArgumentError(where + "wrong number of parameters for " +
                                std::string(to_string(g.kind)));
        }
        if (g.target >= model.n_qubits) {
            throw ArgumentError(where + "target out of range");
        }
        if (is_controlled(g.kind) != g.control.has_value() ||
            g.control.has_value() != g.control_value.has_value()) {
            throw ArgumentError(where + "control present iff the gate is controlled");
        }
        if (g.control) {
            if (*g.control >= model.n_qubits || *g.control == g.target) {
                throw ArgumentError(where + "bad control qubit");
            }
            if (*g.control_value != 0 && *g.control_value != 1) {
                throw ArgumentError(where + "control_value must be 0 or 1");
            }
        }
        for (const auto p : g.param_indices) {
            if (p >= model.n_params) {
                throw ArgumentError(where + "parameter index out of range");
            }
            ++owners[p];
        }
    }
    for (std::size_t p = 0; p < owners.size(); ++p) {
        if (owners[p] != 1) {
            throw ArgumentError("model: parameter " + std::to_string(p) + " owned by " +
                                std::to_string(owners[p]) + " gates");
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {
inline double angle(const GateSpec &g, std::span<const double> params, std::size_t k = 0) {
    return params[g.param_indices[k]];
}
} // namespace detail

/// Apply one gate with angles taken from `params`.
inline void apply_gate(State &state, const GateSpec &g, std::span<const double> params) {
    using detail::angle;
    switch (g.kind) {
    case GateKind::Rx: state.apply_rx(angle(g, params), g.target); break;
    case GateKind::Ry: state.apply_ry(angle(g, params), g.target); break;
    case GateKind::Rz: state.apply_rz(angle(g, params), g.target); break;
    case GateKind::U3:
        state.apply_single(
            sim::u3(angle(g, params, 0), angle(g, params, 1), angle(g, params, 2)), g.target);
        break;
    case GateKind::CNOT: state.apply_cnot(*g.control, g.target); break;
    case GateKind::CRz:
        state.apply_controlled(sim::rotation(sim::Axis::Z, angle(g, params)), *g.control,
                               g.target, *g.control_value);
        break;
    case GateKind::CRx:
        state.apply_controlled(sim::rotation(sim::Axis::X, angle(g, params)), *g.control,
                               g.target, *g.control_value);
        break;
    }
}

/// The gate as a concrete matrix description (for the dense oracle).
inline sim::GateOp to_gate_op(const GateSpec &g, std::span<const double> params) {
    sim::GateOp op;
    op.target = g.target;
    op.control = g.control;
    op.control_value = g.control_value.value_or(1);
    using detail::angle;
    switch (g.kind) {
    case GateKind::Rx: op.matrix = sim::rotation(sim::Axis::X, angle(g, params)); break;
    case GateKind::Ry: op.matrix = sim::rotation(sim::Axis::Y, angle(g, params)); break;
    case GateKind::Rz: op.matrix = sim::rotation(sim::Axis::Z, angle(g, params)); break;
    case GateKind::U3:
        op.matrix = sim::u3(angle(g, params, 0), angle(g, params, 1), angle(g, params, 2));
        break;
    case GateKind::CNOT: op.matrix = sim::pauli_x(); break;
    case GateKind::CRz: op.matrix = sim::rotation(sim::Axis::Z, angle(g, params)); break;
    case GateKind::CRx: op.matrix = sim::rotation(sim::Axis::X, angle(g, params)); break;
    }
    return op;
}

/// Apply gates [first, last) of `model` to `state`.
inline void run_gates(const QcnnModel &model, std::span<const double> params, State &state,
                      std::size_t first, std::size_t last) {
    for (std::size_t i = first; i < last; ++i) {
        apply_gate(state, model.gates[i], params);
    }
}

/**
 * @brief Continuous model output: P(readout qubit = 1) after the circuit.
 */
inline double forward(const QcnnModel &model, std::span<const double> params, State input) {
    if (params.size() != model.n_params) {
        throw ArgumentError("forward: expected " + std::to_string(model.n_params) +
                            " parameters, got " + std::to_string(params.size()));
    }
    if (input.n_qubits() != model.n_qubits) {
        throw ArgumentError("forward: input has " + std::to_string(input.n_qubits()) +
                            " qubits, model has " + std::to_string(model.n_qubits));
    }
    run_gates(model, params, input, 0, model.gates.size());
    return std::clamp(input.prob_one(model.readout_qubit), 0.0, 1.0);
}

} // namespace qcnn
