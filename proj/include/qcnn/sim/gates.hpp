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
 * 2x2 gate matrices: Pauli rotations and the U3 gate.
 *
 * Rotations follow R_P(theta) = exp(-i theta P / 2).
 */
#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "qcnn/errors.hpp"

namespace qcnn::sim {

enum class Axis { X, Y, Z };

/**
 * @brief Row-major 2x2 complex matrix acting on one qubit.
 */
template <class PrecisionT = double> struct Gate2x2 {
    using ComplexT = std::complex<PrecisionT>;
    std::array<ComplexT, 4> m{ComplexT{1}, ComplexT{0}, ComplexT{0}, ComplexT{1}};

    constexpr ComplexT &operator()(int row, int col) { return m[2 * row + col]; }
    constexpr const ComplexT &operator()(int row, int col) const { return m[2 * row + col]; }

    static Gate2x2 identity() { return {}; }

    friend Gate2x2 operator*(const Gate2x2 &a, const Gate2x2 &b) {
        Gate2x2 out;
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                out(r, c) = a(r, 0) * b(0, c) + a(r, 1) * b(1, c);
            }
        }
        return out;
    }

    [[nodiscard]] Gate2x2 adjoint() const {
        Gate2x2 out;
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                out(r, c) = std::conj((*this)(c, r));
            }
        }
        return out;
    }
};

namespace detail {
inline void require_finite(double angle, const char *what) {
    if (!std::isfinite(angle)) {
        throw ArgumentError(std::string(what) + ": angle must be finite");
    }
}
} // namespace detail

template <class PrecisionT = double> Gate2x2<PrecisionT> pauli_x() {
    Gate2x2<PrecisionT> g;
    g.m = {0, 1, 1, 0};
    return g;
}

template <class PrecisionT = double>
Gate2x2<PrecisionT> rotation(Axis axis, PrecisionT theta) {
    detail::require_finite(static_cast<double>(theta), "rotation");
    using ComplexT = std::complex<PrecisionT>;
    const PrecisionT c = std::cos(theta / 2);
    const PrecisionT s = std::sin(theta / 2);
    Gate2x2<PrecisionT> g;
    switch (axis) {
    case Axis::X:
        g.m = {ComplexT{c, 0}, ComplexT{0, -s}, ComplexT{0, -s}, ComplexT{c, 0}};
        break;
    case Axis::Y:
        g.m = {ComplexT{c, 0}, ComplexT{-s, 0}, ComplexT{s, 0}, ComplexT{c, 0}};
        break;
    case Axis::Z:
        g.m = {ComplexT{c, -s}, ComplexT{0}, ComplexT{0}, ComplexT{c, s}};
        break;
    }
    return g;
}

/**
 * @brief U3(theta, phi, lambda) = Rz(phi) Rx(-pi/2) Rz(theta) Rx(pi/2) Rz(lambda).
 *
 * The inner conjugation Rx(-pi/2) Rz(theta) Rx(pi/2) equals Ry(theta), so the
 * product is evaluated in closed form as Rz(phi) Ry(theta) Rz(lambda). This
 * differs from the textbook U3 by the global phase exp(-i(phi+lambda)/2).
 */
template <class PrecisionT = double>
Gate2x2<PrecisionT> u3(PrecisionT theta, PrecisionT phi, PrecisionT lam) {
    detail::require_finite(static_cast<double>(theta), "u3");
    detail::require_finite(static_cast<double>(phi), "u3");
    detail::require_finite(static_cast<double>(lam), "u3");
    const PrecisionT c = std::cos(theta / 2);
    const PrecisionT s = std::sin(theta / 2);
    const auto phase = [](PrecisionT a) { return std::polar(PrecisionT{1}, a); };
    Gate2x2<PrecisionT> g;
    g.m = {phase(-(phi + lam) / 2) * c, -phase(-(phi - lam) / 2) * s,
           phase((phi - lam) / 2) * s, phase((phi + lam) / 2) * c};
    return g;
}

} // namespace qcnn::sim
