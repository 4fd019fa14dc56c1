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
 * Exception hierarchy shared by every qcnn module.
 *
 * The CLI maps these onto process exit codes: configuration and usage
 * problems exit 2, numeric failures exit 3, I/O failures exit 4.
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qcnn {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or precondition violation.
class ArgumentError : public Error {
  public:
    using Error::Error;
};

/// Requested size exceeds what the simulator or oracle supports.
class CapacityError : public Error {
  public:
    using Error::Error;
};

/// Qubit, gate or row index out of range.
class IndexError : public Error {
  public:
    using Error::Error;
};

/// Features cannot be turned into a quantum state.
class EncodingError : public Error {
  public:
    using Error::Error;
};

/// Structurally valid input that violates a schema (missing column, bad label set).
class SchemaError : public Error {
  public:
    using Error::Error;
};

/// Malformed text input. Carries the location of the offending token.
class ParseError : public Error {
  public:
    ParseError(const std::string &what, std::string field, std::size_t line = 0)
        : Error(what), field_(std::move(field)), line_(line) {}

    [[nodiscard]] const std::string &field() const noexcept { return field_; }
    /// 1-based line number, 0 when not applicable.
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::string field_;
    std::size_t line_;
};

/// Invalid experiment configuration or command-line usage.
class ConfigError : public Error {
  public:
    using Error::Error;
};

class VersionError : public Error {
  public:
    using Error::Error;
};

/// Non-finite value produced during optimization.
class NumericError : public Error {
  public:
    NumericError(const std::string &what, std::size_t iteration)
        : Error(what), iteration_(iteration) {}
    [[nodiscard]] std::size_t iteration() const noexcept { return iteration_; }

  private:
    std::size_t iteration_;
};

class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace qcnn
