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
 * Dense state-vector simulator.
 *
 * Bit convention is little-endian: qubit q corresponds to bit q of the
 * amplitude index, so qubit 0 is the least significant bit.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qcnn/errors.hpp"
#include "qcnn/sim/gates.hpp"

namespace qcnn::sim {

inline constexpr std::size_t max_qubits = 24;

namespace detail {
/// Spread `i` so that a zero bit sits at position `bit`.
constexpr std::size_t insert_zero(std::size_t i, std::size_t bit) {
    const std::size_t low = i & ((std::size_t{1} << bit) - 1);
    return ((i >> bit) << (bit + 1)) | low;
}
} // namespace detail

template <class PrecisionT = double> class StateVector {
  public:
    using ComplexT = std::complex<PrecisionT>;

    /// The all-zero computational basis state on `n_qubits` qubits.
    explicit StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
        if (n_qubits < 1 || n_qubits > max_qubits) {
            throw CapacityError("qubit count " + std::to_string(n_qubits) +
                                " outside [1, " + std::to_string(max_qubits) + "]");
        }
        data_.assign(std::size_t{1} << n_qubits, ComplexT{0});
        data_[0] = ComplexT{1};
    }

    /// Adopt raw amplitudes. The caller is responsible for normalization.
    static StateVector from_amplitudes(std::size_t n_qubits, std::vector<ComplexT> amplitudes) {
        StateVector state(n_qubits);
        if (amplitudes.size() != state.data_.size()) {
            throw ArgumentError("amplitude count does not match 2^n_qubits");
        }
        state.data_ = std::move(amplitudes);
        return state;
    }

    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] std::span<const ComplexT> amplitudes() const noexcept { return data_; }
    [[nodiscard]] std::span<ComplexT> amplitudes() noexcept { return data_; }
    const ComplexT &operator[](std::size_t i) const { return data_[i]; }

    [[nodiscard]] PrecisionT norm_squared() const {
        PrecisionT total{0};
        for (const auto &a : data_) {
            total += std::norm(a);
        }
        return total;
    }

    /// Apply an arbitrary 2x2 matrix to `target`.
    void apply_single(const Gate2x2<PrecisionT> &g, std::size_t target) {
        check_qubit(target);
        const std::size_t stride = std::size_t{1} << target;
        const ComplexT g00 = g(0, 0), g01 = g(0, 1), g10 = g(1, 0), g11 = g(1, 1);
        for (std::size_t k = 0; k < data_.size() / 2; ++k) {
            const std::size_t i0 = detail::insert_zero(k, target);
            const std::size_t i1 = i0 | stride;
            const ComplexT v0 = data_[i0];
            const ComplexT v1 = data_[i1];
            data_[i0] = g00 * v0 + g01 * v1;
            data_[i1] = g10 * v0 + g11 * v1;
        }
    }

    /**
     * @brief Apply `g` to `target` on the subspace where `control` reads
     * `control_value`. A CNOT is `pauli_x()` with control_value 1.
     */
    void apply_controlled(const Gate2x2<PrecisionT> &g, std::size_t control, std::size_t target,
                          int control_value = 1) {
        check_pair(control, target, control_value);
        const ComplexT g00 = g(0, 0), g01 = g(0, 1), g10 = g(1, 0), g11 = g(1, 1);
        for_each_controlled_pair(control, target, control_value,
                                 [&](std::size_t i0, std::size_t i1) {
                                     const ComplexT v0 = data_[i0];
                                     const ComplexT v1 = data_[i1];
                                     data_[i0] = g00 * v0 + g01 * v1;
                                     data_[i1] = g10 * v0 + g11 * v1;
                                 });
    }

    // Specialized kernels. Each is equivalent to the generic path with the
    // corresponding matrix from gates.hpp.

    void apply_rx(PrecisionT theta, std::size_t target) {
        check_qubit(target);
        const PrecisionT c = std::cos(theta / 2);
        const PrecisionT s = std::sin(theta / 2);
        const std::size_t stride = std::size_t{1} << target;
        for (std::size_t k = 0; k < data_.size() / 2; ++k) {
            const std::size_t i0 = detail::insert_zero(k, target);
            const std::size_t i1 = i0 | stride;
            const ComplexT v0 = data_[i0];
            const ComplexT v1 = data_[i1];
            // -i s v = (s v.imag, -s v.real)
            data_[i0] = ComplexT{c * v0.real() + s * v1.imag(), c * v0.imag() - s * v1.real()};
            data_[i1] = ComplexT{c * v1.real() + s * v0.imag(), c * v1.imag() - s * v0.real()};
        }
    }

    void apply_ry(PrecisionT theta, std::size_t target) {
        check_qubit(target);
        const PrecisionT c = std::cos(theta / 2);
        const PrecisionT s = std::sin(theta / 2);
        const std::size_t stride = std::size_t{1} << target;
        for (std::size_t k = 0; k < data_.size() / 2; ++k) {
            const std::size_t i0 = detail::insert_zero(k, target);
            const std::size_t i1 = i0 | stride;
            const ComplexT v0 = data_[i0];
            const ComplexT v1 = data_[i1];
            data_[i0] = c * v0 - s * v1;
            data_[i1] = s * v0 + c * v1;
        }
    }

    void apply_rz(PrecisionT theta, std::size_t target) {
        check_qubit(target);
        const ComplexT lo = std::polar(PrecisionT{1}, -theta / 2);
        const ComplexT hi = std::conj(lo);
        const std::size_t stride = std::size_t{1} << target;
        for (std::size_t i = 0; i < data_.size(); ++i) {
            data_[i] *= (i & stride) ? hi : lo;
        }
    }

    void apply_cnot(std::size_t control, std::size_t target) {
        check_pair(control, target, 1);
        for_each_controlled_pair(control, target, 1, [&](std::size_t i0, std::size_t i1) {
            std::swap(data_[i0], data_[i1]);
        });
    }

    /// P(qubit reads 1): the marginal over all other qubits.
    [[nodiscard]] PrecisionT prob_one(std::size_t qubit) const {
        check_qubit(qubit);
        const std::size_t stride = std::size_t{1} << qubit;
        PrecisionT total{0};
        for (std::size_t k = 0; k < data_.size() / 2; ++k) {
            total += std::norm(data_[detail::insert_zero(k, qubit) | stride]);
        }
        return total;
    }

  private:
    void check_qubit(std::size_t q) const {
        if (q >= n_qubits_) {
            throw IndexError("qubit " + std::to_string(q) + " out of range for " +
                             std::to_string(n_qubits_) + " qubits");
        }
    }

    void check_pair(std::size_t control, std::size_t target, int control_value) const {
        check_qubit(control);
        check_qubit(target);
        if (control == target) {
            throw ArgumentError("control and target must differ");
        }
        if (control_value != 0 && control_value != 1) {
            throw ArgumentError("control value must be 0 or 1");
        }
    }

    template <class Fn>
    void for_each_controlled_pair(std::size_t control, std::size_t target, int control_value,
                                  Fn &&fn) {
        const std::size_t lo = std::min(control, target);
        const std::size_t hi = std::max(control, target);
        const std::size_t cbit = control_value == 1 ? (std::size_t{1} << control) : 0;
        const std::size_t tbit = std::size_t{1} << target;
        for (std::size_t k = 0; k < data_.size() / 4; ++k) {
            const std::size_t base = detail::insert_zero(detail::insert_zero(k, lo), hi) | cbit;
            fn(base, base | tbit);
        }
    }

    std::size_t n_qubits_;
    std::vector<ComplexT> data_;
};

/// |0...0> on `n_qubits` qubits; throws CapacityError outside [1, 24].
template <class PrecisionT = double> StateVector<PrecisionT> new_state(std::size_t n_qubits) {
    return StateVector<PrecisionT>(n_qubits);
}

} // namespace qcnn::sim
