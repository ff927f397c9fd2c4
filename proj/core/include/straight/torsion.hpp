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

// Torsion invariants of second order systems y''^I = f^I(x, y, y').
//
// A system is straight (its integral curves close up to rational curves)
// exactly when its torsion vanishes identically: the scalar Tresse torsion for
// a single equation, the trace-free Fels matrix for n >= 2.
//
//   phi^I_J = 1/2 d/dx(f^I_{dy^J}) - f^I_{y^J} - 1/4 f^I_{dy^K} f^K_{dy^J}
//   Phi^I_J = phi^I_J - (1/n) phi^K_K delta^I_J
//
//   Tresse  = d^2/dx^2 f_{pp} - 4 d/dx f_{yp} + f_p (4 f_{yp} - d/dx f_{pp})
//             - 3 f_y f_{pp} + 6 f_{yy}                          (p = dy)

#ifndef STRAIGHT_TORSION_HPP_
#define STRAIGHT_TORSION_HPP_

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "straight/expr.hpp"
#include "straight/ode_system.hpp"
#include "straight/oracle.hpp"

namespace straight {

using ExprMatrix = std::vector<std::vector<Expr>>;

enum class Method { kTresse, kFels, kQuartic };
std::string_view to_string(Method m);

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TorsionTelemetry {
  std::size_t dag_nodes = 0;
  std::uint64_t tree_nodes = 0;
  double build_ms = 0.0;
  double oracle_ms = 0.0;
  // tresse_autonomous only: points where the expanded autonomous condition
  // was compared against the Tresse scalar, and how many agreed.
  int autonomous_points = 0;
  int autonomous_agreements = 0;
};

struct TorsionReport {
  Method method = Method::kTresse;
  Expr scalar;          // kTresse
  ExprMatrix matrix;    // kFels
  std::vector<Expr> list;  // kQuartic
  Verdict verdict;
  TorsionTelemetry telemetry;

  bool straight() const { return verdict.zero(); }
};

ExprMatrix phi_matrix(const OdeSystem& sys);
ExprMatrix fels_matrix(const OdeSystem& sys);
TorsionReport fels_torsion(const OdeSystem& sys, const OracleConfig& cfg = {});

// Throws DimensionError unless sys.n == 1.
Expr tresse_invariant(const OdeSystem& sys);
TorsionReport tresse_torsion(const OdeSystem& sys, const OracleConfig& cfg = {});

// Every distinct fourth dy-derivative of every f^I (indices unordered).
std::vector<Expr> quartic_partials(const OdeSystem& sys);
TorsionReport quartic_test(const OdeSystem& sys, const OracleConfig& cfg = {});

// Tresse for n == 1, Fels otherwise.
TorsionReport is_straight(const OdeSystem& sys, const OracleConfig& cfg = {});

// y'' = A y' + B y with constant matrices.
struct LinearConstSystem {
  std::vector<std::vector<ComplexRational>> a;
  std::vector<std::vector<ComplexRational>> b;
};

// Straight iff B + A^2/4 is a scalar multiple of the identity. Exact.
bool classify_linear_const(const LinearConstSystem& ls);

// Floating-point variant; entries of B + A^2/4 are compared relative to
// its largest magnitude.
bool classify_linear_const(const std::vector<std::vector<std::complex<double>>>& a,
                           const std::vector<std::vector<std::complex<double>>>& b,
                           double rel_tol = 1e-10);

OdeSystem to_ode_system(const LinearConstSystem& ls, std::string name = "linear");

// Zero iff g is constant along solutions.
Verdict check_conserved(const OdeSystem& sys, const Expr& g, const OracleConfig& cfg = {});

// Tresse torsion of y'' = f(y, y'). Also evaluates the expanded fourth order
// autonomous condition at sample points and records agreement in telemetry;
// the verdict comes from the Tresse scalar alone. Throws InputError if f
// depends on x.
TorsionReport tresse_autonomous(const Expr& f, std::vector<ParamDecl> params = {},
                                const OracleConfig& cfg = {});

// The expanded autonomous condition itself, as printed in the literature.
Expr autonomous_condition(const Expr& f);

}  // namespace straight

#endif  // STRAIGHT_TORSION_HPP_
