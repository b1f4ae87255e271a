// Copyright 2026 The FlowToll Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FLOWTOLL_ERRORS_H_
#define FLOWTOLL_ERRORS_H_

#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>
#include <utility>

namespace flowtoll {

// Root of every error the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A flow violates conservation, a path is not simple, or a destination is
// unreachable.
class FeasibilityError : public Error {
 public:
  using Error::Error;
};

// A well-formed document describes an instance that breaks an invariant.
class SemanticError : public Error {
 public:
  using Error::Error;
};

// Malformed text. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// An exact oracle refused because enumeration would exceed its cap.
class ResourceCapError : public Error {
 public:
  using Error::Error;
};

// An iterative solver did not reach its tolerance within the iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Path stripping left residual mass with no source-destination path.
class DecompositionError : public Error {
 public:
  using Error::Error;
};

// A result or run broke one of its checked invariants.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

// Wraps a failure from one stage of the mediator pipeline and keeps the
// exit code of the underlying error.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, int exit_code = 3)
      : Error(stage + ": " + what),
        stage_(std::move(stage)),
        exit_code_(exit_code) {}

  const std::string& stage() const { return stage_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string stage_;
  int exit_code_;
};

// 0 success, 2 invariant violation, 3 infeasible input, 4 resource cap.
inline int ExitCodeFor(const std::exception& error) {
  if (const auto* stage = dynamic_cast<const StageError*>(&error)) {
    return stage->exit_code();
  }
  if (dynamic_cast<const ResourceCapError*>(&error)) return 4;
  if (dynamic_cast<const ConvergenceError*>(&error) ||
      dynamic_cast<const DecompositionError*>(&error) ||
      dynamic_cast<const InvariantViolation*>(&error)) {
    return 2;
  }
  return 3;
}

}  // namespace flowtoll

#endif  // FLOWTOLL_ERRORS_H_
