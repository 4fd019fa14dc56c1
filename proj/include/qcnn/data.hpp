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
 * Datasets, CSV ingestion, PCA reduction, feature scaling, splitting and a
 * synthetic two-Gaussian generator.
 */
#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qcnn/errors.hpp"
#include "qcnn/rng.hpp"

namespace qcnn::data {

/// K samples by k features with binary labels.
struct Dataset {
    Eigen::MatrixXd features;
    std::vector<int> labels;
    std::vector<std::string> feature_names;
    /// Row index in the source dataset; lets splits prove disjointness.
    std::vector<std::size_t> origin;

    [[nodiscard]] std::size_t size() const { return labels.size(); }
    [[nodiscard]] std::size_t n_features() const {
        return static_cast<std::size_t>(features.cols());
    }
    [[nodiscard]] std::vector<double> row(std::size_t i) const {
        std::vector<double> out(n_features());
        for (std::size_t c = 0; c < out.size(); ++c) {
            out[c] = features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
        }
        return out;
    }

    /// Rows `indices` in order.
    [[nodiscard]] Dataset subset(const std::vector<std::size_t> &indices) const {
        Dataset out;
        out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
        out.feature_names = feature_names;
        for (std::size_t i = 0; i < indices.size(); ++i) {
            out.features.row(static_cast<Eigen::Index>(i)) =
                features.row(static_cast<Eigen::Index>(indices[i]));
            out.labels.push_back(labels[indices[i]]);
            out.origin.push_back(origin.empty() ? indices[i] : origin[indices[i]]);
        }
        return out;
    }
};

struct Splits {
    Dataset train;
    Dataset test;
    Dataset validation;
};

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return cells;
}

inline std::optional<double> parse_finite(std::string_view cell) {
    if (!cell.empty() && cell.front() == '+') {
        cell.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

} // namespace detail

/**
 * @brief Load a comma-separated file with a header row.
 *
 * Every column except `label_column` must parse as a finite float64. The
 * label column must hold exactly two distinct values; the lexicographically
 * smaller one becomes class 0.
 */
inline Dataset load_csv(const std::filesystem::path &path, const std::string &label_column) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open dataset " + path.string());
    }
    std::string header_line;
    if (!std::getline(in, header_line)) {
        throw SchemaError(path.string() + ": empty file, header row expected");
    }
    if (header_line.starts_with("\xEF\xBB\xBF")) {
        header_line.erase(0, 3);
    }
    const auto header = detail::split_commas(header_line);
    std::optional<std::size_t> label_idx;
    Dataset ds;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == label_column) {
            label_idx = c;
        } else {
            ds.feature_names.emplace_back(header[c]);
        }
    }
    if (!label_idx) {
        throw SchemaError(path.string() + ": label column '" + label_column + "' not in header");
    }

    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto cells = detail::split_commas(line);
        if (cells.size() != header.size()) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                 std::to_string(header.size()) + " cells, found " +
                                 std::to_string(cells.size()),
                             "", line_no);
        }
        std::vector<double> row;
        row.reserve(cells.size() - 1);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == *label_idx) {
                raw_labels.emplace_back(cells[c]);
                continue;
            }
            const auto value = detail::parse_finite(cells[c]);
            if (!value) {
                throw ParseError(path.string() + ": row " + std::to_string(line_no) +
                                     ", column '" + std::string(header[c]) +
                                     "': not a finite number: '" + std::string(cells[c]) + "'",
                                 std::string(header[c]), line_no);
            }
            row.push_back(*value);
        }
        rows.push_back(std::move(row));
    }

    const std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
    if (distinct.size() != 2) {
        throw SchemaError(path.string() + ": label column must hold exactly 2 distinct values, found " +
                          std::to_string(distinct.size()));
    }
    const std::string &zero_label = *distinct.begin();

    const auto k = static_cast<Eigen::Index>(header.size() - 1);
    ds.features.resize(static_cast<Eigen::Index>(rows.size()), k);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (Eigen::Index c = 0; c < k; ++c) {
            ds.features(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
        }
        ds.labels.push_back(raw_labels[r] == zero_label ? 0 : 1);
        ds.origin.push_back(r);
    }
    return ds;
}

// ---------------------------------------------------------------------------
// PCA

struct PcaTransform {
    Eigen::VectorXd mean;
    /// d x k, rows orthonormal, ordered by descending explained variance.
    Eigen::MatrixXd components;
    Eigen::VectorXd explained_variance;
};

/**
 * @brief Fit PCA by eigendecomposition of the sample covariance.
 *
 * Each component is sign-normalized so its largest-magnitude entry is
 * positive (the first such entry on ties). For zero-variance input the
 * components are the solver's basis for the null covariance, with zero
 * explained variance.
 */
inline PcaTransform pca_fit(const Eigen::MatrixXd &x, std::size_t d) {
    const auto n_rows = x.rows();
    const auto k = x.cols();
    if (n_rows < 2) {
        throw ArgumentError("pca_fit: need at least 2 samples");
    }
    if (d < 1 || d > static_cast<std::size_t>(std::min(n_rows, k))) {
        throw ArgumentError("pca_fit: component count " + std::to_string(d) +
                            " outside [1, min(K, k)]");
    }
    PcaTransform t;
    t.mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - t.mean.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n_rows - 1);

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw NumericError("pca_fit: eigendecomposition failed", 0);
    }
    // Eigenvalues come back ascending.
    const auto di = static_cast<Eigen::Index>(d);
    t.components.resize(di, k);
    t.explained_variance.resize(di);
    for (Eigen::Index i = 0; i < di; ++i) {
        const Eigen::Index src = k - 1 - i;
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        Eigen::Index arg = 0;
        for (Eigen::Index j = 1; j < k; ++j) {
            if (std::abs(v(j)) > std::abs(v(arg)) + 1e-12) {
                arg = j;
            }
        }
        if (v(arg) < 0) {
            v = -v;
        }
        t.components.row(i) = v.transpose();
        t.explained_variance(i) = std::max(0.0, solver.eigenvalues()(src));
    }
    return t;
}

/// (X - mean) * components^T.
inline Eigen::MatrixXd pca_apply(const PcaTransform &t, const Eigen::MatrixXd &x) {
    if (x.cols() != t.mean.size()) {
        throw ArgumentError("pca_apply: expected " + std::to_string(t.mean.size()) +
                            " columns, got " + std::to_string(x.cols()));
    }
    return (x.rowwise() - t.mean.transpose()) * t.components.transpose();
}

// ---------------------------------------------------------------------------
// Scaling

enum class ScaleTarget { qubit_encoding, amplitude_encoding };

/// Per-column min-max map onto [0, pi]; constant columns go to pi/2.
struct MinMaxScaler {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    static MinMaxScaler fit(const Eigen::MatrixXd &x) {
        if (x.rows() == 0) {
            throw ArgumentError("scale_features: empty matrix");
        }
        return {x.colwise().minCoeff().transpose(), x.colwise().maxCoeff().transpose()};
    }

    /// Values outside the fitted range are clamped into [0, pi].
    [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd &x) const {
        if (x.cols() != lo.size()) {
            throw ArgumentError("scaler: column count mismatch");
        }
        Eigen::MatrixXd out(x.rows(), x.cols());
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            const double span = hi(c) - lo(c);
            for (Eigen::Index r = 0; r < x.rows(); ++r) {
                out(r, c) = span > 0.0
                                ? std::clamp((x(r, c) - lo(c)) / span * std::numbers::pi, 0.0,
                                             std::numbers::pi)
                                : std::numbers::pi / 2;
            }
        }
        return out;
    }
};

/**
 * @brief Prepare features for an encoding.
 *
 * Qubit encoding: min-max onto [0, pi]. Amplitude encoding: rows pass through
 * unchanged (the encoder normalizes) but all-zero rows are rejected.
 */
inline Eigen::MatrixXd scale_features(const Eigen::MatrixXd &x, ScaleTarget target) {
    if (x.rows() == 0) {
        throw ArgumentError("scale_features: empty matrix");
    }
    if (target == ScaleTarget::qubit_encoding) {
        return MinMaxScaler::fit(x).apply(x);
    }
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        if (x.row(r).squaredNorm() == 0.0) {
            throw EncodingError("scale_features: row " + std::to_string(r) +
                                " is all zeros and cannot be amplitude-encoded");
        }
    }
    return x;
}

// ---------------------------------------------------------------------------
// Splitting

struct SplitRatios {
    double train = 0.6;
    double test = 0.2;
    double validation = 0.2;
};

struct SplitOptions {
    SplitRatios ratios;
    std::uint64_t seed = 0;
    bool stratified = false;
    /// Append a copy of the test rows to the training set.
    bool merge_test_into_train = false;
};

namespace detail {
/// Partition sizes: train and test rounded to nearest, validation takes the rest.
inline std::array<std::size_t, 3> partition_sizes(std::size_t n, const SplitRatios &r) {
    const auto n_train = static_cast<std::size_t>(std::llround(r.train * static_cast<double>(n)));
    const auto n_test = static_cast<std::size_t>(std::llround(r.test * static_cast<double>(n)));
    if (n_train + n_test > n) {
        return {n_train, n_test, 0};
    }
    return {n_train, n_test, n - n_train - n_test};
}
} // namespace detail

/**
 * @brief Seeded shuffle then contiguous partition by ratios.
 *
 * Stratified mode partitions each class separately and concatenates.
 */
inline Splits split(const Dataset &ds, const SplitOptions &opt) {
    const auto &r = opt.ratios;
    if (!(r.train > 0 && r.test > 0 && r.validation > 0) ||
        std::abs(r.train + r.test + r.validation - 1.0) > 1e-9) {
        throw ArgumentError("split: ratios must be positive and sum to 1");
    }
    Rng rng(opt.seed);
    std::vector<std::size_t> train_idx, test_idx, val_idx;
    const auto partition = [&](std::vector<std::size_t> idx) {
        seeded_shuffle(idx, rng);
        const auto sizes = detail::partition_sizes(idx.size(), r);
        auto it = idx.begin();
        train_idx.insert(train_idx.end(), it, it + static_cast<std::ptrdiff_t>(sizes[0]));
        it += static_cast<std::ptrdiff_t>(sizes[0]);
        test_idx.insert(test_idx.end(), it, it + static_cast<std::ptrdiff_t>(sizes[1]));
        it += static_cast<std::ptrdiff_t>(sizes[1]);
        val_idx.insert(val_idx.end(), it, idx.end());
    };
    if (opt.stratified) {
        for (const int label : {0, 1}) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < ds.size(); ++i) {
                if (ds.labels[i] == label) {
                    idx.push_back(i);
                }
            }
            partition(std::move(idx));
        }
    } else {
        std::vector<std::size_t> idx(ds.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            idx[i] = i;
        }
        partition(std::move(idx));
    }
    if (train_idx.empty() || test_idx.empty() || val_idx.empty()) {
        throw ArgumentError("split: a partition is empty (sizes " +
                            std::to_string(train_idx.size()) + "/" +
                            std::to_string(test_idx.size()) + "/" +
                            std::to_string(val_idx.size()) + ")");
    }
    if (opt.merge_test_into_train) {
        train_idx.insert(train_idx.end(), test_idx.begin(), test_idx.end());
    }
    return {ds.subset(train_idx), ds.subset(test_idx), ds.subset(val_idx)};
}

// ---------------------------------------------------------------------------
// Synthetic data

struct GaussianSpec {
    std::size_t n_per_class = 100;
    std::size_t n_features = 8;
    double separation = 6.0;
    double noise_sd = 1.0;
    std::uint64_t seed = 0;
};

/**
 * @brief Two isotropic Gaussian clouds at -/+ (separation/2) u.
 *
 * u is a seeded random unit vector. Class 0 rows come first, then class 1.
 */
inline Dataset synth_gaussians(const GaussianSpec &spec) {
    if (spec.n_per_class == 0 || spec.n_features == 0 || !(spec.noise_sd > 0) ||
        !(spec.separation >= 0) || !std::isfinite(spec.separation)) {
        throw ArgumentError("synth_gaussians: sizes and noise_sd must be positive");
    }
    Rng rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto k = static_cast<Eigen::Index>(spec.n_features);
    Eigen::VectorXd u(k);
    do {
        for (Eigen::Index j = 0; j < k; ++j) {
            u(j) = normal(rng);
        }
    } while (u.norm() == 0.0);
    u.normalize();

    Dataset ds;
    const auto n = static_cast<Eigen::Index>(2 * spec.n_per_class);
    ds.features.resize(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int label = i < static_cast<Eigen::Index>(spec.n_per_class) ? 0 : 1;
        const double sign = label == 0 ? -1.0 : 1.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            ds.features(i, j) = sign * spec.separation / 2 * u(j) + spec.noise_sd * normal(rng);
        }
        ds.labels.push_back(label);
        ds.origin.push_back(static_cast<std::size_t>(i));
    }
    for (Eigen::Index j = 0; j < k; ++j) {
        ds.feature_names.push_back("x" + std::to_string(j));
    }
    return ds;
}

} // namespace qcnn::data
