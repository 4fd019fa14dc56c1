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
 * Accuracy report rows: CSV (machine-readable) and aligned text tables.
 *
 * CSV columns are exactly `label,test_acc,val_acc,gap`; numbers use the
 * shortest representation that round-trips the double.
 */
#pragma once

#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qcnn/errors.hpp"
#include "qcnn/train.hpp"

namespace qcnn {

struct ReportRow {
    /// baseline or mitigated; the ancilla experiment uses before and after.
    std::string label;
    double test_acc = 0.0;
    double val_acc = 0.0;
    double gap = 0.0;

    friend bool operator==(const ReportRow &, const ReportRow &) = default;
};

inline constexpr std::string_view report_header = "label,test_acc,val_acc,gap";

inline ReportRow make_row(std::string label, const training::Metrics &m) {
    return {std::move(label), m.test_accuracy, m.validation_accuracy, m.gap};
}

inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

inline std::string write_report_csv(const std::vector<ReportRow> &rows) {
    std::string out(report_header);
    out += '\n';
    for (const auto &r : rows) {
        out += r.label + ',' + format_double(r.test_acc) + ',' + format_double(r.val_acc) + ',' +
               format_double(r.gap) + '\n';
    }
    return out;
}

/**
 * @brief Parse and validate a report CSV.
 *
 * Checks the header, the label vocabulary, that every mitigated row follows
 * a baseline row, and that gap == test_acc - val_acc exactly.
 */
inline std::vector<ReportRow> parse_report_csv(std::string_view text) {
    static const std::set<std::string, std::less<>> labels{"baseline", "mitigated", "before",
                                                           "after"};
    std::vector<ReportRow> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != report_header) {
        throw ParseError("report: header must be '" + std::string(report_header) + "'", "header",
                         1);
    }
    std::size_t line_no = 1;
    bool seen_baseline = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) {
            cells.push_back(cell);
        }
        if (cells.size() != 4) {
            throw ParseError("report: expected 4 columns", "row", line_no);
        }
        if (!labels.contains(cells[0])) {
            throw ParseError("report: unknown label '" + cells[0] + "'", "label", line_no);
        }
        ReportRow row;
        row.label = cells[0];
        const char *names[] = {"test_acc", "val_acc", "gap"};
        double *slots[] = {&row.test_acc, &row.val_acc, &row.gap};
        for (int c = 0; c < 3; ++c) {
            const auto &cell = cells[static_cast<std::size_t>(c) + 1];
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), *slots[c]);
            if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
                throw ParseError("report: bad number '" + cell + "'", names[c], line_no);
            }
        }
        if (row.gap != row.test_acc - row.val_acc) {
            throw ParseError("report: gap is not test_acc - val_acc", "gap", line_no);
        }
        if (row.label == "baseline") {
            seen_baseline = true;
        } else if (row.label == "mitigated" && !seen_baseline) {
            throw ParseError("report: mitigated row before any baseline row", "label", line_no);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Aligned table in the layout "Test Acc. | Validation Acc. | Gap".
inline std::string format_table(const std::string &title, const std::vector<ReportRow> &rows,
                                const std::vector<std::string> &notes = {}) {
    std::string out = title + "\n";
    const auto append = [&out](const std::string &line) {
        std::string_view v(line);
        while (!v.empty() && v.back() == ' ') {
            v.remove_suffix(1);
        }
        out.append(v);
        out += '\n';
    };
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-10s  %-9s  %-15s  %-8s", "row", "Test Acc.",
                  "Validation Acc.", "Gap");
    append(buf);
    out += std::string(50, '-') + "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto &r = rows[i];
        std::snprintf(buf, sizeof(buf), "%-10s  %-9.4f  %-15.4f  %-8.4f  ", r.label.c_str(),
                      r.test_acc, r.val_acc, r.gap);
        append(buf + (i < notes.size() ? notes[i] : std::string()));
    }
    return out;
}

} // namespace qcnn
