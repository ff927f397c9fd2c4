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

// Immutable expression DAGs over the jet variables x, y^I, dy^I and named
// constants. Every public constructor returns a canonical expression:
//
//   * Sum / Product operands are flattened, sorted, and hold at most one
//     constant, which is folded exactly.
//   * Like terms of a Sum are merged (x + x -> 2*x); equal bases of a Product
//     are merged into integer powers (x*x -> x^2).
//   * Quotients become products with negative powers and Negate becomes a
//     product with -1, so neither survives canonicalization.
//   * A constant times a single Sum is distributed (2*(x + y) -> 2*x + 2*y),
//     so u - u cancels for sums.
//   * Power exponents are nonzero integers other than 1.
//
// Canonicalization is shallow on purpose. Deciding whether an expression is
// identically zero is the job of the zero oracle (oracle.hpp).

#ifndef STRAIGHT_EXPR_HPP_
#define STRAIGHT_EXPR_HPP_

#include <compare>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "straight/rational.hpp"

namespace straight {

enum class VarKind : std::uint8_t { kX, kY, kYDot, kParam };

// A jet coordinate (x, y^I, dy^I) or a named constant.
struct VarRef {
  VarKind kind = VarKind::kX;
  int index = 0;     // 1..n for kY / kYDot, 0 otherwise
  std::string name;  // kParam only

  static VarRef x() { return {VarKind::kX, 0, {}}; }
  static VarRef y(int i) { return {VarKind::kY, i, {}}; }
  static VarRef ydot(int i) { return {VarKind::kYDot, i, {}}; }
  static VarRef param(std::string n) { return {VarKind::kParam, 0, std::move(n)}; }

  bool is_param() const { return kind == VarKind::kParam; }

  // "x", "y3", "dy3" or the parameter name.
  std::string to_string() const;
  std::size_t hash() const;

  friend auto operator<=>(const VarRef&, const VarRef&) = default;
  friend bool operator==(const VarRef&, const VarRef&) = default;
};

enum class Fn : std::uint8_t { kExp, kLog, kSin, kCos, kSqrt };
std::string_view fn_name(Fn fn);

enum class NodeKind : std::uint8_t {
  kConst,
  kVar,
  kSum,
  kProduct,
  kPower,
  kQuotient,
  kApply,
  kNegate,
};

namespace detail {
struct Node;
}

// Shared handle to an immutable node. Copies are cheap and thread-safe.
class Expr {
 public:
  // Const 0.
  Expr();

  static Expr constant(ComplexRational value);
  static Expr integer(long value) { return constant(ComplexRational(value)); }
  static Expr rational(long num, long den);
  static Expr variable(VarRef var);

  NodeKind kind() const;
  bool is_const() const { return kind() == NodeKind::kConst; }
  bool is_zero() const;
  bool is_one() const;

  // Valid only for the matching kind.
  const ComplexRational& value() const;
  const VarRef& var() const;
  std::span<const Expr> operands() const;
  long exponent() const;
  Fn fn() const;

  std::size_t hash() const;
  // Conservative membership test: false means `v` certainly does not occur.
  bool may_contain(const VarRef& v) const;
  const detail::Node* id() const { return node_.get(); }

  // Structural equality.
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  friend struct ExprFactory;
  explicit Expr(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const detail::Node> node_;
};

namespace detail {
struct Node {
  NodeKind kind = NodeKind::kConst;
  ComplexRational value;
  VarRef var;
  std::vector<Expr> operands;
  long exponent = 0;
  Fn fn = Fn::kExp;
  std::size_t hash = 0;
  std::uint64_t var_mask = 0;
};
}  // namespace detail

// Canonicalizing constructors.
Expr make_sum(std::vector<Expr> terms);
Expr make_product(std::vector<Expr> factors);
Expr make_power(const Expr& base, long exponent);
Expr make_quotient(const Expr& numerator, const Expr& denominator);
Expr make_apply(Fn fn, const Expr& arg);
Expr make_negate(const Expr& arg);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

// Uncanonicalized constructors, for building raw trees that are later passed
// through build(). Operands are taken as given.
namespace raw {
Expr sum(std::vector<Expr> terms);
Expr product(std::vector<Expr> factors);
Expr power(const Expr& base, long exponent);
Expr quotient(const Expr& numerator, const Expr& denominator);
Expr apply(Fn fn, const Expr& arg);
Expr negate(const Expr& arg);
}  // namespace raw

// Canonical equivalent of an arbitrary (possibly raw) tree. Idempotent.
Expr build(const Expr& e);

// Simultaneous substitution followed by canonicalization.
Expr substitute(const Expr& e, const std::map<VarRef, Expr>& replacements);

// True iff `e` has no transcendental node, no negative power of a
// subexpression containing x, y or dy, and only real rational constants.
bool is_polynomial(const Expr& e);

// Distinct variables of `e`, sorted.
std::vector<VarRef> free_vars(const Expr& e);
bool contains_fn(const Expr& e, Fn fn);

// Number of distinct nodes, and the size the expression would have as a
// tree (saturating).
std::size_t dag_size(const Expr& e);
std::uint64_t tree_size(const Expr& e);

// Text form in the parser's grammar; reparses to a structurally equal Expr.
std::string to_string(const Expr& e);

// Raised by eval on division by zero, log(0), 0 to a negative power, or a
// non-finite intermediate value.
class EvalSingular : public std::runtime_error {
 public:
  EvalSingular(const std::string& what, std::string subexpression)
      : std::runtime_error(what + " in " + subexpression),
        subexpression_(std::move(subexpression)) {}
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

struct EvalTelemetry {
  // Largest |value| over all evaluated nodes.
  double max_abs = 0.0;
  // First-order rounding magnitude of the result: terms of a Sum contribute
  // their own scales, so for a flat top-level Sum this is the sum of term
  // magnitudes. |value| / scale measures cancellation.
  double scale = 0.0;
  std::size_t nodes = 0;
};

class EvalContext {
 public:
  EvalContext() = default;
  explicit EvalContext(std::map<VarRef, std::complex<double>> assignment)
      : assignment_(std::move(assignment)) {}

  void assign(const VarRef& v, std::complex<double> value) { assignment_[v] = value; }
  const std::map<VarRef, std::complex<double>>& assignment() const { return assignment_; }

  EvalTelemetry telemetry;

 private:
  std::map<VarRef, std::complex<double>> assignment_;
};

// Complex evaluation with principal branches for sqrt and log. Throws
// std::invalid_argument if a variable is unassigned.
std::complex<double> eval(const Expr& e, EvalContext& ctx);

// Exact evaluation for expressions without Apply nodes.
ComplexRational eval_exact(const Expr& e, const std::map<VarRef, ComplexRational>& assignment);

}  // namespace straight

#endif  // STRAIGHT_EXPR_HPP_
