// Copyright 2026 The Straight Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Randomized identity testing for analytic expressions.
//
// Polynomials (is_polynomial) over Generic or rational Fixed parameters are
// evaluated exactly at random positive rationals p/q, 1 <= p, q <= 10^6; a
// nonzero polynomial vanishes at such a point with probability at most
// degree / 10^6 per sample.
//
// Everything else is evaluated in double precision at random points of the
// annulus r_min <= |z| <= r_max, one point per variable and Generic parameter.
// With S the cancellation scale reported by eval, a sample is
//
//   nonzero  if |value| >  rel_tol * S      (decides NonZero immediately)
//   zero     if |value| <= noise_floor * S
//   gray     otherwise.
//
// Zero needs at least samples/2 valid (non-singular) samples and a strict
// majority of zero samples over gray samples; anything else is Inconclusive.

#ifndef STRAIGHT_ORACLE_HPP_
#define STRAIGHT_ORACLE_HPP_

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "straight/expr.hpp"
#include "straight/ode_system.hpp"

namespace straight {

struct OracleConfig {
  int samples = 32;
  std::uint64_t seed = 0;
  double r_min = 0.3;
  double r_max = 2.0;
  double rel_tol = 1e-9;
  double noise_floor = 1e-13;
  int max_retries = 8;

  // Throws std::invalid_argument unless 0 < r_min < r_max and
  // 0 < noise_floor < rel_tol < 1 and samples > 0.
  void validate() const;
};

enum class Outcome { kZero, kNonZero, kInconclusive };
std::string_view to_string(Outcome o);

struct Witness {
  std::vector<std::pair<VarRef, std::complex<double>>> point;
  // Set on the exact path; `point` then holds the rounded coordinates.
  std::vector<std::pair<VarRef, ComplexRational>> exact_point;
  std::complex<double> value;
  std::optional<ComplexRational> exact_value;
  double scale = 0.0;
};

struct Verdict {
  Outcome outcome = Outcome::kInconclusive;
  std::uint64_t seed = 0;
  int samples_passed = 0;
  int valid_samples = 0;
  int gray_samples = 0;
  bool exact_path = false;
  // Zero claims for expressions with sqrt or log hold on the principal branch.
  bool branch_limited = false;
  std::optional<Witness> witness;
  // 1-based (row, column) of the deciding entry for matrices; (k, 1) for lists.
  std::optional<std::pair<int, int>> entry;
  std::string reason;

  bool zero() const { return outcome == Outcome::kZero; }
  bool nonzero() const { return outcome == Outcome::kNonZero; }
};

Verdict is_zero(const Expr& e, std::span<const ParamDecl> params, const OracleConfig& cfg = {});

// Row-major; stops at the first NonZero entry.
Verdict is_zero_matrix(const std::vector<std::vector<Expr>>& entries,
                       std::span<const ParamDecl> params, const OracleConfig& cfg = {});

Verdict is_zero_list(std::span<const Expr> entries, std::span<const ParamDecl> params,
                     const OracleConfig& cfg = {});

// Re-evaluates `e` at the witness independently of the sampling loop and
// checks that the value is still above rel_tol times its scale.
bool reverify_witness(const Expr& e, const Witness& w, const OracleConfig& cfg = {});

}  // namespace straight

#endif  // STRAIGHT_ORACLE_HPP_
