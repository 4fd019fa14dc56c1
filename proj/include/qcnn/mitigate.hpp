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
 * Post-training overfitting mitigation.
 *
 * Hard dropout removes gates from a trained circuit (single-qubit gates, one
 * chosen gate, or CNOTs). Soft dropout leaves the circuit intact and nudges
 * trained angles: rounding, zeroing small magnitudes, snapping to integers.
 * soft_dropout_search scans a policy grid and keeps the best one.
 */
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcnn/errors.hpp"
#include "qcnn/model.hpp"
#include "qcnn/rng.hpp"
#include "qcnn/train.hpp"

namespace qcnn::mitigation {

using training::EncodedSet;
using training::Metrics;

// ---------------------------------------------------------------------------
// Hard dropout

struct DropResult {
    QcnnModel model;
    ParamVector params;
    /// Indices into the original gate list, ascending.
    std::vector<std::size_t> dropped;
};

/**
 * @brief Remove the gates at `indices` and compact the parameter vector.
 *
 * Surviving parameters keep their relative order and are renumbered densely.
 */
inline DropResult remove_gates(const QcnnModel &model, std::span<const double> params,
                               std::vector<std::size_t> indices) {
    if (params.size() != model.n_params) {
        throw ArgumentError("remove_gates: parameter count mismatch");
    }
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    for (const auto i : indices) {
        if (i >= model.gates.size()) {
            throw IndexError("gate index " + std::to_string(i) + " out of range for " +
                             std::to_string(model.gates.size()) + " gates");
        }
    }
    std::vector<bool> param_dropped(model.n_params, false);
    std::vector<bool> gate_dropped(model.gates.size(), false);
    for (const auto i : indices) {
        gate_dropped[i] = true;
        for (const auto p : model.gates[i].param_indices) {
            param_dropped[p] = true;
        }
    }
    std::vector<std::size_t> remap(model.n_params, 0);
    DropResult out;
    for (std::size_t p = 0; p < model.n_params; ++p) {
        if (!param_dropped[p]) {
            remap[p] = out.params.size();
            out.params.push_back(params[p]);
        }
    }
    out.model = model;
    out.model.gates.clear();
    for (std::size_t i = 0; i < model.gates.size(); ++i) {
        if (gate_dropped[i]) {
            continue;
        }
        GateSpec g = model.gates[i];
        for (auto &p : g.param_indices) {
            p = remap[p];
        }
        out.model.gates.push_back(std::move(g));
    }
    out.model.n_params = out.params.size();
    out.dropped = std::move(indices);
    return out;
}

/// Remove one gate of any kind.
inline DropResult drop_gate(const QcnnModel &model, std::span<const double> params,
                            std::size_t gate_index) {
    if (gate_index >= model.gates.size()) {
        throw IndexError("drop_gate: index " + std::to_string(gate_index) + " out of range");
    }
    return remove_gates(model, params, {gate_index});
}

namespace detail {

/// ceil(fraction * n), tolerant of representation error in the product.
inline std::size_t drop_count(double fraction, std::size_t n) {
    const double raw = fraction * static_cast<double>(n);
    return std::min(n, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

template <class Pred>
std::vector<std::size_t> gate_indices_where(const QcnnModel &model, Pred pred) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < model.gates.size(); ++i) {
        if (pred(model.gates[i])) {
            out.push_back(i);
        }
    }
    return out;
}

/// Choose `count` of `candidates` uniformly without replacement.
inline std::vector<std::size_t> choose(std::vector<std::size_t> candidates, std::size_t count,
                                       std::uint64_t seed) {
    Rng rng(seed);
    seeded_shuffle(candidates, rng);
    candidates.resize(count);
    std::sort(candidates.begin(), candidates.end());
    return candidates;
}

inline void check_fraction(double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ArgumentError("dropout fraction must be in (0, 1]");
    }
}

} // namespace detail

/**
 * @brief Drop ceil(fraction * N) of the N single-qubit parameterized gates,
 * chosen uniformly without replacement. Controlled gates are never touched.
 */
inline DropResult drop_single_qubit_gates(const QcnnModel &model, std::span<const double> params,
                                          double fraction, std::uint64_t seed) {
    detail::check_fraction(fraction);
    auto candidates = detail::gate_indices_where(
        model, [](const GateSpec &g) { return is_single_qubit(g.kind); });
    if (candidates.empty()) {
        throw ArgumentError("drop_single_qubit_gates: model has no single-qubit gates");
    }
    const auto count = detail::drop_count(fraction, candidates.size());
    return remove_gates(model, params, detail::choose(std::move(candidates), count, seed));
}

/// As drop_single_qubit_gates, but over CNOT gates. Parameters are unchanged.
inline DropResult drop_cnot_gates(const QcnnModel &model, std::span<const double> params,
                                  double fraction, std::uint64_t seed) {
    detail::check_fraction(fraction);
    auto candidates = detail::gate_indices_where(
        model, [](const GateSpec &g) { return g.kind == GateKind::CNOT; });
    if (candidates.empty()) {
        throw ArgumentError("drop_cnot_gates: model has no CNOT gates");
    }
    const auto count = detail::drop_count(fraction, candidates.size());
    return remove_gates(model, params, detail::choose(std::move(candidates), count, seed));
}

/// One single-qubit parameterized gate chosen uniformly from `seed`.
inline std::size_t random_single_qubit_gate(const QcnnModel &model, std::uint64_t seed) {
    const auto candidates = detail::gate_indices_where(
        model, [](const GateSpec &g) { return is_single_qubit(g.kind); });
    if (candidates.empty()) {
        throw ArgumentError("model has no single-qubit gates");
    }
    Rng rng(seed);
    return candidates[uniform_index(rng, candidates.size())];
}

// ---------------------------------------------------------------------------
// Soft dropout

struct SoftDropoutPolicy {
    enum class Kind { identity, round, zero, snap, composite };

    Kind kind = Kind::identity;
    std::optional<int> decimals;
    std::optional<double> tau;
    std::optional<double> delta;
    std::vector<SoftDropoutPolicy> parts;
    /// Parameter indices the policy acts on; all indices when absent.
    std::optional<std::vector<std::size_t>> mask;

    static SoftDropoutPolicy identity() { return {}; }
    static SoftDropoutPolicy round(int decimals) {
        SoftDropoutPolicy p;
        p.kind = Kind::round;
        p.decimals = decimals;
        return p;
    }
    static SoftDropoutPolicy zero(double tau) {
        SoftDropoutPolicy p;
        p.kind = Kind::zero;
        p.tau = tau;
        return p;
    }
    static SoftDropoutPolicy snap(double delta) {
        SoftDropoutPolicy p;
        p.kind = Kind::snap;
        p.delta = delta;
        return p;
    }
    static SoftDropoutPolicy composite(std::vector<SoftDropoutPolicy> parts) {
        SoftDropoutPolicy p;
        p.kind = Kind::composite;
        p.parts = std::move(parts);
        return p;
    }

    [[nodiscard]] SoftDropoutPolicy with_mask(std::vector<std::size_t> indices) const {
        SoftDropoutPolicy p = *this;
        p.mask = std::move(indices);
        return p;
    }

    friend bool operator==(const SoftDropoutPolicy &, const SoftDropoutPolicy &) = default;
};

namespace detail {
inline std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}
} // namespace detail

/// Compact label such as "round(3)", "zero(0.05)" or "composite[round(2);snap(0.1)]".
inline std::string describe(const SoftDropoutPolicy &p) {
    using Kind = SoftDropoutPolicy::Kind;
    std::string s;
    switch (p.kind) {
    case Kind::identity: s = "identity"; break;
    case Kind::round: s = "round(" + std::to_string(p.decimals.value_or(0)) + ")"; break;
    case Kind::zero: s = "zero(" + detail::shortest(p.tau.value_or(0)) + ")"; break;
    case Kind::snap: s = "snap(" + detail::shortest(p.delta.value_or(0)) + ")"; break;
    case Kind::composite: {
        s = "composite[";
        for (std::size_t i = 0; i < p.parts.size(); ++i) {
            s += (i ? ";" : "") + describe(p.parts[i]);
        }
        s += "]";
        break;
    }
    }
    if (p.mask) {
        s += "@" + std::to_string(p.mask->size());
    }
    return s;
}

/// Throws ArgumentError unless exactly the fields required by the kind are set.
inline void validate(const SoftDropoutPolicy &p, bool nested = false) {
    using Kind = SoftDropoutPolicy::Kind;
    const auto fail = [&](const std::string &why) {
        throw ArgumentError("soft-dropout policy " + describe(p) + ": " + why);
    };
    const bool has_d = p.decimals.has_value();
    const bool has_t = p.tau.has_value();
    const bool has_s = p.delta.has_value();
    switch (p.kind) {
    case Kind::identity:
        if (has_d || has_t || has_s || !p.parts.empty()) fail("identity takes no fields");
        break;
    case Kind::round:
        if (!has_d || has_t || has_s || !p.parts.empty()) fail("round needs only 'decimals'");
        if (*p.decimals < 1 || *p.decimals > 15) fail("decimals must be in [1, 15]");
        break;
    case Kind::zero:
        if (!has_t || has_d || has_s || !p.parts.empty()) fail("zero needs only 'tau'");
        if (!(*p.tau > 0) || !std::isfinite(*p.tau)) fail("tau must be positive");
        break;
    case Kind::snap:
        if (!has_s || has_d || has_t || !p.parts.empty()) fail("snap needs only 'delta'");
        if (!(*p.delta > 0) || !std::isfinite(*p.delta)) fail("delta must be positive");
        break;
    case Kind::composite:
        if (has_d || has_t || has_s) fail("composite takes only 'parts'");
        if (nested) fail("composites cannot nest");
        if (p.parts.size() < 2) fail("composite needs at least 2 parts");
        for (const auto &part : p.parts) {
            validate(part, true);
        }
        break;
    }
}

namespace detail {

/// Round half away from zero to `decimals` places.
inline double round_to(double v, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::round(v * scale) / scale + 0.0;
}

inline double transform_one(const SoftDropoutPolicy &p, double v) {
    using Kind = SoftDropoutPolicy::Kind;
    switch (p.kind) {
    case Kind::round: return round_to(v, *p.decimals);
    case Kind::zero: return std::abs(v) < *p.tau ? 0.0 : v;
    case Kind::snap: {
        const double nearest = std::round(v);
        return std::abs(v - nearest) <= *p.delta ? nearest + 0.0 : v;
    }
    default: return v;
    }
}

} // namespace detail

/**
 * @brief Apply a soft-dropout policy to trained angles.
 *
 * round(d): half away from zero to d decimals. zero(tau): |v| < tau becomes 0.
 * snap(delta): v within delta of its nearest integer becomes that integer.
 * composite: parts in order. The circuit itself is never modified.
 */
inline ParamVector apply_policy(std::span<const double> params, const SoftDropoutPolicy &policy) {
    validate(policy);
    ParamVector out(params.begin(), params.end());
    if (policy.kind == SoftDropoutPolicy::Kind::composite) {
        for (const auto &part : policy.parts) {
            SoftDropoutPolicy scoped = part;
            if (policy.mask && !scoped.mask) {
                scoped.mask = policy.mask;
            }
            out = apply_policy(out, scoped);
        }
        return out;
    }
    if (policy.mask) {
        for (const auto i : *policy.mask) {
            if (i >= out.size()) {
                throw IndexError("soft-dropout mask index " + std::to_string(i) +
                                 " out of range");
            }
            out[i] = detail::transform_one(policy, out[i]);
        }
    } else {
        for (auto &v : out) {
            v = detail::transform_one(policy, v);
        }
    }
    return out;
}

/// identity; round(1..4); zero(0.01..0.09); snap(0.05..0.25).
inline std::vector<SoftDropoutPolicy> default_grid() {
    std::vector<SoftDropoutPolicy> grid{SoftDropoutPolicy::identity()};
    for (int d = 1; d <= 4; ++d) {
        grid.push_back(SoftDropoutPolicy::round(d));
    }
    for (const double tau : {0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09}) {
        grid.push_back(SoftDropoutPolicy::zero(tau));
    }
    for (const double delta : {0.05, 0.10, 0.15, 0.20, 0.25}) {
        grid.push_back(SoftDropoutPolicy::snap(delta));
    }
    return grid;
}

// Policy JSON: {"kind": "round", "decimals": 3, "mask": [..]} etc.

inline nlohmann::json policy_to_json(const SoftDropoutPolicy &p) {
    using Kind = SoftDropoutPolicy::Kind;
    nlohmann::json j;
    switch (p.kind) {
    case Kind::identity: j["kind"] = "identity"; break;
    case Kind::round: j["kind"] = "round"; j["decimals"] = *p.decimals; break;
    case Kind::zero: j["kind"] = "zero"; j["tau"] = *p.tau; break;
    case Kind::snap: j["kind"] = "snap"; j["delta"] = *p.delta; break;
    case Kind::composite:
        j["kind"] = "composite";
        j["parts"] = nlohmann::json::array();
        for (const auto &part : p.parts) {
            j["parts"].push_back(policy_to_json(part));
        }
        break;
    }
    if (p.mask) {
        j["mask"] = *p.mask;
    }
    return j;
}

inline SoftDropoutPolicy policy_from_json(const nlohmann::json &j) {
    using Kind = SoftDropoutPolicy::Kind;
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw ArgumentError("soft-dropout policy needs a string 'kind'");
    }
    SoftDropoutPolicy p;
    const auto kind = j["kind"].get<std::string>();
    try {
        if (kind == "identity") {
            p.kind = Kind::identity;
        } else if (kind == "round") {
            p.kind = Kind::round;
        } else if (kind == "zero") {
            p.kind = Kind::zero;
        } else if (kind == "snap") {
            p.kind = Kind::snap;
        } else if (kind == "composite") {
            p.kind = Kind::composite;
        } else {
            throw ArgumentError("unknown soft-dropout policy kind '" + kind + "'");
        }
        if (j.contains("decimals")) p.decimals = j["decimals"].get<int>();
        if (j.contains("tau")) p.tau = j["tau"].get<double>();
        if (j.contains("delta")) p.delta = j["delta"].get<double>();
        if (j.contains("parts")) {
            for (const auto &part : j["parts"]) {
                p.parts.push_back(policy_from_json(part));
            }
        }
        if (j.contains("mask")) p.mask = j["mask"].get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception &e) {
        throw ArgumentError("soft-dropout policy '" + kind + "': " + e.what());
    }
    validate(p);
    return p;
}

enum class SelectionMetric { validation_accuracy, gap };

struct SearchReport {
    std::vector<SoftDropoutPolicy> grid;
    std::vector<Metrics> metrics;
    std::size_t selected = 0;
    SelectionMetric selection_metric = SelectionMetric::validation_accuracy;

    [[nodiscard]] const SoftDropoutPolicy &selected_policy() const { return grid[selected]; }
    [[nodiscard]] const Metrics &selected_metrics() const { return metrics[selected]; }
    /// Metrics of the identity policy, i.e. the unmitigated model.
    [[nodiscard]] const Metrics &baseline() const {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid[i].kind == SoftDropoutPolicy::Kind::identity && !grid[i].mask) {
                return metrics[i];
            }
        }
        throw ArgumentError("search report has no identity row");
    }
};

/**
 * @brief Evaluate every policy and select one.
 *
 * An identity policy is prepended when absent, so the unmitigated model is
 * always a candidate. validation_accuracy selects the highest validation
 * accuracy; gap selects the smallest |gap| among policies whose validation
 * accuracy is at least the identity's. Ties go to the earliest grid entry.
 *
 * When `selection` is given, validation accuracy for the selection rule is
 * measured on that set instead; reported metrics still use `validation`.
 */
inline SearchReport soft_dropout_search(const QcnnModel &model, std::span<const double> params,
                                        const EncodedSet &test, const EncodedSet &validation,
                                        std::vector<SoftDropoutPolicy> grid,
                                        SelectionMetric metric = SelectionMetric::validation_accuracy,
                                        const EncodedSet *selection = nullptr) {
    if (test.empty() || validation.empty()) {
        throw ArgumentError("soft_dropout_search: test and validation splits must be nonempty");
    }
    if (grid.empty()) {
        throw ArgumentError("soft_dropout_search: empty policy grid");
    }
    const auto is_identity = [](const SoftDropoutPolicy &p) {
        return p.kind == SoftDropoutPolicy::Kind::identity && !p.mask;
    };
    auto identity_it = std::find_if(grid.begin(), grid.end(), is_identity);
    if (identity_it == grid.end()) {
        grid.insert(grid.begin(), SoftDropoutPolicy::identity());
        identity_it = grid.begin();
    }
    const auto identity_row = static_cast<std::size_t>(identity_it - grid.begin());

    SearchReport report;
    report.selection_metric = metric;
    std::vector<double> select_val(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const ParamVector mitigated = apply_policy(params, grid[i]);
        const Metrics m = training::evaluate(model, mitigated, test, validation);
        report.metrics.push_back(m);
        select_val[i] = selection ? training::accuracy(model, mitigated, *selection)
                                  : m.validation_accuracy;
    }

    std::size_t best = identity_row;
    if (metric == SelectionMetric::validation_accuracy) {
        best = 0;
        for (std::size_t i = 1; i < grid.size(); ++i) {
            if (select_val[i] > select_val[best]) {
                best = i;
            }
        }
    } else {
        const double floor = select_val[identity_row];
        const auto score = [&](std::size_t i) {
            return std::abs(selection ? report.metrics[i].test_accuracy - select_val[i]
                                      : report.metrics[i].gap);
        };
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (select_val[i] >= floor && (!pick || score(i) < score(*pick))) {
                pick = i;
            }
        }
        best = *pick;
    }
    report.grid = std::move(grid);
    report.selected = best;
    return report;
}

// ---------------------------------------------------------------------------
// Repeated hard-dropout trials

enum class DropoutMode { single_qubit_fraction, single_gate, cnot_fraction };

constexpr std::string_view to_string(DropoutMode m) {
    switch (m) {
    case DropoutMode::single_qubit_fraction: return "single_qubit_fraction";
    case DropoutMode::single_gate: return "single_gate";
    case DropoutMode::cnot_fraction: return "cnot_fraction";
    }
    return "?";
}

struct DropoutTrial {
    std::uint64_t seed = 0;
    std::vector<std::size_t> dropped;
    std::size_t n_params = 0;
    Metrics metrics;
};

struct AccuracySummary {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    /// Population standard deviation.
    double std = 0.0;
};

struct DropoutReport {
    DropoutMode mode = DropoutMode::single_qubit_fraction;
    double fraction = 0.0;
    std::uint64_t seed = 0;
    Metrics baseline;
    std::vector<DropoutTrial> trials;
    AccuracySummary test_summary;
    AccuracySummary validation_summary;
};

inline AccuracySummary summarize(std::span<const double> values) {
    AccuracySummary s;
    if (values.empty()) {
        return s;
    }
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    double total = 0.0;
    for (const double v : values) {
        total += v;
    }
    s.mean = total / static_cast<double>(values.size());
    double var = 0.0;
    for (const double v : values) {
        var += (v - s.mean) * (v - s.mean);
    }
    s.std = std::sqrt(var / static_cast<double>(values.size()));
    // Keep min <= mean <= max under rounding.
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

/// Seed used for trial `t` of a suite seeded with `seed`.
constexpr std::uint64_t trial_seed(std::uint64_t seed, std::size_t t) { return mix_seed(seed, t); }

/// One hard-dropout draw of the given mode.
inline DropResult hard_dropout(const QcnnModel &model, std::span<const double> params,
                               DropoutMode mode, double fraction, std::uint64_t seed) {
    switch (mode) {
    case DropoutMode::single_qubit_fraction:
        return drop_single_qubit_gates(model, params, fraction, seed);
    case DropoutMode::cnot_fraction:
        return drop_cnot_gates(model, params, fraction, seed);
    case DropoutMode::single_gate:
        return drop_gate(model, params, random_single_qubit_gate(model, seed));
    }
    throw ArgumentError("unknown dropout mode");
}

/**
 * @brief Run `trials` independent hard-dropout draws and score each.
 *
 * Trial t uses trial_seed(seed, t). `fraction` is ignored in single_gate mode.
 */
inline DropoutReport dropout_trial_suite(const QcnnModel &model, std::span<const double> params,
                                         const EncodedSet &test, const EncodedSet &validation,
                                         DropoutMode mode, double fraction, std::size_t trials,
                                         std::uint64_t seed) {
    if (trials < 1) {
        throw ArgumentError("dropout_trial_suite: trials must be at least 1");
    }
    DropoutReport report;
    report.mode = mode;
    report.fraction = fraction;
    report.seed = seed;
    report.baseline = training::evaluate(model, params, test, validation);
    std::vector<double> test_acc;
    std::vector<double> val_acc;
    for (std::size_t t = 0; t < trials; ++t) {
        DropoutTrial trial;
        trial.seed = trial_seed(seed, t);
        const DropResult dropped = hard_dropout(model, params, mode, fraction, trial.seed);
        trial.dropped = dropped.dropped;
        trial.n_params = dropped.params.size();
        trial.metrics = training::evaluate(dropped.model, dropped.params, test, validation);
        test_acc.push_back(trial.metrics.test_accuracy);
        val_acc.push_back(trial.metrics.validation_accuracy);
        report.trials.push_back(std::move(trial));
    }
    report.test_summary = summarize(test_acc);
    report.validation_summary = summarize(val_acc);
    return report;
}

} // namespace qcnn::mitigation
