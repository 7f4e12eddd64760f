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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "inspo/error.hpp"

namespace inspo {

// Monotone scalarization applied to a preference probability.
struct PsiSpec {
  enum class Kind { kIdentity, kLogOdds, kAffine, kClippedLogOdds };

  Kind kind = Kind::kIdentity;
  double slope = 1.0;      // affine: a > 0
  double intercept = 0.0;  // affine: b
  double epsilon = 1e-6;   // clipped log-odds: eps in (0, 0.5)

  static PsiSpec identity() { return {}; }
  static PsiSpec log_odds() { return {Kind::kLogOdds}; }
  static PsiSpec affine(double a, double b) {
    require(a > 0.0 && std::isfinite(a) && std::isfinite(b),
            "affine psi needs a finite slope > 0");
    return {Kind::kAffine, a, b};
  }
  static PsiSpec clipped_log_odds(double eps = 1e-6) {
    require(eps > 0.0 && eps < 0.5, "clipped log-odds needs eps in (0, 0.5)");
    return {Kind::kClippedLogOdds, 1.0, 0.0, eps};
  }

  std::string name() const {
    switch (kind) {
      case Kind::kIdentity: return "identity";
      case Kind::kLogOdds: return "log-odds";
      case Kind::kAffine: return "affine";
      case Kind::kClippedLogOdds: return "clipped-log-odds";
    }
    return "unknown";
  }

  friend bool operator==(const PsiSpec&, const PsiSpec&) = default;
};

inline double psi_eval(const PsiSpec& psi, double q) {
  if (!(q >= 0.0 && q <= 1.0))
    fail(ErrorKind::kDomain, "psi argument " + std::to_string(q) + " outside [0, 1]");
  switch (psi.kind) {
    case PsiSpec::Kind::kIdentity:
      return q;
    case PsiSpec::Kind::kAffine:
      return psi.slope * q + psi.intercept;
    case PsiSpec::Kind::kLogOdds:
      if (q == 0.0 || q == 1.0)
        fail(ErrorKind::kDomain,
             "log-odds undefined at q = " + std::to_string(q) +
                 "; use clipped-log-odds for boundary-capable models");
      return std::log(q / (1.0 - q));
    case PsiSpec::Kind::kClippedLogOdds: {
      const double c = std::clamp(q, psi.epsilon, 1.0 - psi.epsilon);
      return std::log(c / (1.0 - c));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace inspo
