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
 * Dense-unitary reference for small circuits.
 *
 * Builds the full 2^n x 2^n matrix by Kronecker-embedding each gate and
 * multiplying in circuit order. This never touches the stride kernels in
 * state_vector.hpp and is used as an independent oracle for them.
 */
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "qcnn/errors.hpp"
#include "qcnn/sim/gates.hpp"
#include "qcnn/sim/state_vector.hpp"

namespace qcnn::sim {

inline constexpr std::size_t max_dense_qubits = 6;

/// A concrete gate: a matrix, a target and an optional control.
struct GateOp {
    Gate2x2<double> matrix;
    std::size_t target = 0;
    std::optional<std::size_t> control;
    int control_value = 1;
};

namespace detail {

inline Eigen::Matrix2cd to_eigen(const Gate2x2<double> &g) {
    Eigen::Matrix2cd m;
    m << g(0, 0), g(0, 1), g(1, 0), g(1, 1);
    return m;
}

/// Tensor product over qubits n-1 ... 0 with `factor(q)` on each qubit;
/// qubit n-1 is the leftmost (most significant) factor.
template <class FactorFn> Eigen::MatrixXcd tensor_chain(std::size_t n_qubits, FactorFn factor) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
    for (std::size_t q = n_qubits; q-- > 0;) {
        Eigen::MatrixXcd next = Eigen::kroneckerProduct(out, factor(q)).eval();
        out = std::move(next);
    }
    return out;
}

inline Eigen::MatrixXcd embed(const GateOp &op, std::size_t n_qubits) {
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    const Eigen::Matrix2cd gate = to_eigen(op.matrix);
    if (op.target >= n_qubits || (op.control && *op.control >= n_qubits)) {
        throw IndexError("gate qubit out of range for dense oracle");
    }
    if (!op.control) {
        return tensor_chain(n_qubits, [&](std::size_t q) -> Eigen::Matrix2cd {
            return q == op.target ? gate : id;
        });
    }
    if (*op.control == op.target) {
        throw ArgumentError("control and target must differ");
    }
    Eigen::Matrix2cd active = Eigen::Matrix2cd::Zero();
    Eigen::Matrix2cd idle = Eigen::Matrix2cd::Zero();
    const int cv = op.control_value;
    active(cv, cv) = 1.0;
    idle(1 - cv, 1 - cv) = 1.0;
    // |cv><cv| (x) G  +  |1-cv><1-cv| (x) I, embedded in identity elsewhere.
    const auto on = tensor_chain(n_qubits, [&](std::size_t q) -> Eigen::Matrix2cd {
        if (q == *op.control) {
            return active;
        }
        return q == op.target ? gate : id;
    });
    const auto off = tensor_chain(n_qubits, [&](std::size_t q) -> Eigen::Matrix2cd {
        return q == *op.control ? idle : id;
    });
    return on + off;
}

} // namespace detail

/// Product of all gates in circuit order (first gate rightmost).
inline Eigen::MatrixXcd dense_unitary(std::span<const GateOp> sequence, std::size_t n_qubits) {
    if (n_qubits < 1 || n_qubits > max_dense_qubits) {
        throw CapacityError("dense oracle supports 1.." + std::to_string(max_dense_qubits) +
                            " qubits");
    }
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_qubits);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
    for (const auto &op : sequence) {
        u = (detail::embed(op, n_qubits) * u).eval();
    }
    return u;
}

/// Route a GateOp through the stride kernels.
inline void apply_op(StateVector<double> &state, const GateOp &op) {
    if (op.control) {
        state.apply_controlled(op.matrix, *op.control, op.target, op.control_value);
    } else {
        state.apply_single(op.matrix, op.target);
    }
}

} // namespace qcnn::sim
