// Copyright 2026 The InSPO Lab Authors.
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace inspo {

enum class ErrorKind {
  kInvalidInput,
  kDomain,
  kGeneration,
  kConvergence,
  kDiverged,
  kParse,
  kIo,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kGeneration: return "generation";
    case ErrorKind::kConvergence: return "convergence";
    case ErrorKind::kDiverged: return "training-diverged";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it onto an exit code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Solver ran out of budget; `gap` is the residual it reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(double gap, const std::string& message)
      : Error(ErrorKind::kConvergence, message), gap_(gap) {}
  double gap() const noexcept { return gap_; }

 private:
  double gap_;
};

// Non-finite loss during training; `step` is the offending optimizer step.
class DivergedError : public Error {
 public:
  DivergedError(long step, const std::string& message)
      : Error(ErrorKind::kDiverged, message), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorKind::kInvalidInput, message);
}

}  // namespace inspo
