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
 * MSE cost, gradients (parameter-shift and central differences), the
 * Nesterov-momentum training loop, and accuracy metrics.
 *
 * All reductions over samples run in ascending sample order, so results are
 * bit-identical regardless of the worker count.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qcnn/data.hpp"
#include "qcnn/errors.hpp"
#include "qcnn/model.hpp"
#include "qcnn/parallel.hpp"
#include "qcnn/rng.hpp"

namespace qcnn::training {

enum class GradientMethod { parameter_shift, finite_difference };

constexpr std::string_view to_string(GradientMethod m) {
    return m == GradientMethod::parameter_shift ? "parameter_shift" : "finite_difference";
}
inline std::optional<GradientMethod> parse_gradient_method(std::string_view s) {
    if (s == "parameter_shift") {
        return GradientMethod::parameter_shift;
    }
    if (s == "finite_difference") {
        return GradientMethod::finite_difference;
    }
    return std::nullopt;
}

/// Central-difference step, used for controlled rotations under either method.
inline constexpr double fd_step = 1e-5;

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::size_t iterations = 100;
    std::size_t batch_size = 25;
    std::uint64_t seed = 0;
    GradientMethod gradient_method = GradientMethod::parameter_shift;
};

struct TrainHistory {
    /// Minibatch cost at the iterate before each update.
    std::vector<double> costs;
    ParamVector final_params;
    TrainConfig config;
};

struct Metrics {
    double test_accuracy = 0.0;
    double validation_accuracy = 0.0;
    double gap = 0.0;

    friend bool operator==(const Metrics &, const Metrics &) = default;
};

/// Encoded input states with labels, ready for repeated evaluation.
struct EncodedSet {
    std::vector<State> inputs;
    std::vector<int> labels;

    [[nodiscard]] std::size_t size() const { return labels.size(); }
    [[nodiscard]] bool empty() const { return labels.empty(); }

    [[nodiscard]] EncodedSet subset(std::span<const std::size_t> indices) const {
        EncodedSet out;
        for (const auto i : indices) {
            out.inputs.push_back(inputs[i]);
            out.labels.push_back(labels[i]);
        }
        return out;
    }
};

inline EncodedSet encode_set(const QcnnModel &model, const data::Dataset &ds) {
    EncodedSet out;
    out.inputs.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto row = ds.row(i);
        out.inputs.push_back(encode(model, row));
        out.labels.push_back(ds.labels[i]);
    }
    return out;
}

/// Model output for every sample, evaluated concurrently.
inline std::vector<double> predictions(const QcnnModel &model, std::span<const double> params,
                                       const EncodedSet &set) {
    std::vector<double> out(set.size());
    parallel_for(set.size(), [&](std::size_t i) { out[i] = forward(model, params, set.inputs[i]); });
    return out;
}

/// C = (1/K) sum_i (y_i - f_i)^2 with the continuous output f.
inline double mse_cost(const QcnnModel &model, std::span<const double> params,
                       const EncodedSet &set) {
    if (set.empty()) {
        throw ArgumentError("mse_cost: empty dataset");
    }
    const auto f = predictions(model, params, set);
    double total = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double r = static_cast<double>(set.labels[i]) - f[i];
        total += r * r;
    }
    return total / static_cast<double>(f.size());
}

namespace detail {

/**
 * @brief df/dtheta_j for one input, for every parameter.
 *
 * Walks the circuit once, keeping the state just before each gate. For every
 * parameter of that gate the shifted gate is applied to a copy and the rest
 * of the circuit is run to obtain the shifted output.
 */
inline std::vector<double> output_derivatives(const QcnnModel &model, ParamVector params,
                                              const State &input, GradientMethod method) {
    std::vector<double> grad(model.n_params, 0.0);
    State prefix = input;
    const std::size_t n_gates = model.gates.size();
    const auto shifted_output = [&](std::size_t gate_index) {
        State work = prefix;
        run_gates(model, params, work, gate_index, n_gates);
        return work.prob_one(model.readout_qubit);
    };
    for (std::size_t g = 0; g < n_gates; ++g) {
        const GateSpec &gate = model.gates[g];
        const bool shift_rule =
            method == GradientMethod::parameter_shift && !is_controlled(gate.kind);
        const double step = shift_rule ? std::numbers::pi / 2 : fd_step;
        for (const std::size_t p : gate.param_indices) {
            const double theta = params[p];
            params[p] = theta + step;
            const double plus = shifted_output(g);
            params[p] = theta - step;
            const double minus = shifted_output(g);
            params[p] = theta;
            grad[p] = shift_rule ? (plus - minus) / 2 : (plus - minus) / (2 * step);
        }
        apply_gate(prefix, gate, params);
    }
    return grad;
}

} // namespace detail

/**
 * @brief Gradient of the MSE cost over `batch`.
 *
 * parameter_shift: Rx/Ry/Rz/U3 angles use [f(t+pi/2) - f(t-pi/2)]/2;
 * controlled rotations use central differences with step fd_step.
 * finite_difference: central differences for every angle.
 */
inline std::vector<double> gradient(const QcnnModel &model, std::span<const double> params,
                                    const EncodedSet &batch, GradientMethod method) {
    if (batch.empty()) {
        throw ArgumentError("gradient: empty batch");
    }
    if (params.size() != model.n_params) {
        throw ArgumentError("gradient: parameter count mismatch");
    }
    const ParamVector base(params.begin(), params.end());
    std::vector<std::vector<double>> per_sample(batch.size());
    std::vector<double> outputs(batch.size());
    parallel_for(batch.size(), [&](std::size_t i) {
        per_sample[i] = detail::output_derivatives(model, base, batch.inputs[i], method);
        outputs[i] = forward(model, base, batch.inputs[i]);
    });
    std::vector<double> grad(model.n_params, 0.0);
    const double scale = 2.0 / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double residual = outputs[i] - static_cast<double>(batch.labels[i]);
        for (std::size_t j = 0; j < grad.size(); ++j) {
            grad[j] += scale * residual * per_sample[i][j];
        }
    }
    return grad;
}

/**
 * @brief One Nesterov update: v' = mu v - eta grad(theta + mu v), theta' = theta + v'.
 *
 * `grad_at` receives the look-ahead point and returns a gradient of the same length.
 */
template <class GradFn>
std::pair<ParamVector, ParamVector> nesterov_step(const ParamVector &params,
                                                  const ParamVector &velocity, GradFn &&grad_at,
                                                  double learning_rate, double momentum) {
    if (velocity.size() != params.size()) {
        throw ArgumentError("nesterov_step: velocity length does not match parameters");
    }
    ParamVector lookahead(params.size());
    for (std::size_t j = 0; j < params.size(); ++j) {
        lookahead[j] = params[j] + momentum * velocity[j];
    }
    const std::vector<double> grad = grad_at(std::as_const(lookahead));
    if (grad.size() != params.size()) {
        throw ArgumentError("nesterov_step: gradient length does not match parameters");
    }
    ParamVector next_params(params.size());
    ParamVector next_velocity(params.size());
    for (std::size_t j = 0; j < params.size(); ++j) {
        next_velocity[j] = momentum * velocity[j] - learning_rate * grad[j];
        next_params[j] = params[j] + next_velocity[j];
    }
    return {std::move(next_params), std::move(next_velocity)};
}

/// Uniform draws in [0, 2 pi), one per parameter, from `seed`.
inline ParamVector initial_params(const QcnnModel &model, std::uint64_t seed) {
    Rng rng(seed);
    ParamVector params(model.n_params);
    for (auto &p : params) {
        p = 2 * std::numbers::pi * uniform01(rng);
    }
    return params;
}

/**
 * @brief Minibatch Nesterov training from a seeded random start.
 *
 * Batches are consecutive slices of a seeded permutation of the training
 * set; a new permutation is drawn whenever fewer than batch_size samples
 * remain. The run is a pure function of (model, train, config).
 */
inline TrainHistory train(const QcnnModel &model, const EncodedSet &train_set,
                          const TrainConfig &config) {
    if (train_set.empty()) {
        throw ArgumentError("train: empty training set");
    }
    if (config.batch_size == 0 || config.batch_size > train_set.size()) {
        throw ArgumentError("train: batch_size must be in [1, " +
                            std::to_string(train_set.size()) + "]");
    }
    if (!(config.learning_rate > 0) || !std::isfinite(config.learning_rate)) {
        throw ArgumentError("train: learning_rate must be positive and finite");
    }
    if (!(config.momentum >= 0 && config.momentum < 1)) {
        throw ArgumentError("train: momentum must be in [0, 1)");
    }

    TrainHistory history;
    history.config = config;
    // Initialization and shuffling draw from separate streams of the seed.
    ParamVector params = initial_params(model, mix_seed(config.seed, 0));
    ParamVector velocity(params.size(), 0.0);
    Rng shuffle_rng(mix_seed(config.seed, 1));

    std::vector<std::size_t> order(train_set.size());
    std::size_t cursor = order.size();
    std::vector<std::size_t> batch_idx(config.batch_size);

    for (std::size_t it = 0; it < config.iterations; ++it) {
        if (cursor + config.batch_size > order.size()) {
            for (std::size_t i = 0; i < order.size(); ++i) {
                order[i] = i;
            }
            seeded_shuffle(order, shuffle_rng);
            cursor = 0;
        }
        std::copy_n(order.begin() + static_cast<std::ptrdiff_t>(cursor), config.batch_size,
                    batch_idx.begin());
        cursor += config.batch_size;
        const EncodedSet batch = train_set.subset(batch_idx);

        const double cost = mse_cost(model, params, batch);
        if (!std::isfinite(cost)) {
            throw NumericError("train: non-finite cost at iteration " + std::to_string(it), it);
        }
        history.costs.push_back(cost);

        auto [next_params, next_velocity] = nesterov_step(
            params, velocity,
            [&](const ParamVector &at) {
                return gradient(model, at, batch, config.gradient_method);
            },
            config.learning_rate, config.momentum);
        for (const double p : next_params) {
            if (!std::isfinite(p)) {
                throw NumericError(
                    "train: non-finite parameter after iteration " + std::to_string(it), it);
            }
        }
        params = std::move(next_params);
        velocity = std::move(next_velocity);
    }
    history.final_params = std::move(params);
    return history;
}

/// Fraction of samples whose thresholded output matches the label; f == threshold counts as 1.
inline double accuracy_from_outputs(std::span<const double> outputs, std::span<const int> labels,
                                    double threshold = 0.5) {
    if (outputs.empty()) {
        throw ArgumentError("accuracy: empty dataset");
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const int predicted = outputs[i] >= threshold ? 1 : 0;
        correct += predicted == labels[i] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(outputs.size());
}

inline double accuracy(const QcnnModel &model, std::span<const double> params,
                       const EncodedSet &set, double threshold = 0.5) {
    if (set.empty()) {
        throw ArgumentError("accuracy: empty dataset");
    }
    return accuracy_from_outputs(predictions(model, params, set), set.labels, threshold);
}

inline Metrics make_metrics(double test_accuracy, double validation_accuracy) {
    return {test_accuracy, validation_accuracy, test_accuracy - validation_accuracy};
}

inline Metrics evaluate(const QcnnModel &model, std::span<const double> params,
                        const EncodedSet &test, const EncodedSet &validation) {
    if (test.empty() || validation.empty()) {
        throw ArgumentError("evaluate: test and validation splits must be nonempty");
    }
    return make_metrics(accuracy(model, params, test), accuracy(model, params, validation));
}

} // namespace qcnn::training
