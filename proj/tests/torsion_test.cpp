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

#include <doctest.h>

#include "straight/calculus.hpp"
#include "straight/parser.hpp"
#include "straight/torsion.hpp"
#include "support/test_support.hpp"

namespace straight {
namespace {

using namespace straight::testing;
using RMatrix = std::vector<std::vector<ComplexRational>>;

OdeSystem scalar(const std::string& rhs, std::vector<ParamDecl> params = {}) {
  return {"s", 1, {parse_expr(rhs)}, std::move(params)};
}

RMatrix random_matrix(Rng& rng, int n) {
  RMatrix m(n, std::vector<ComplexRational>(n));
  for (auto& row : m) {
    for (auto& v : row) v = random_rational(rng);
  }
  return m;
}

// B = a I - A^2 / 4.
RMatrix straight_b(const RMatrix& a, const Rational& scalar_part) {
  const std::size_t n = a.size();
  RMatrix b(n, std::vector<ComplexRational>(n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      ComplexRational acc;
      for (std::size_t k = 0; k < n; ++k) acc += a[r][k] * a[k][c];
      b[r][c] = ComplexRational(Rational(-1, 4)) * acc;
      if (r == c) b[r][c] += ComplexRational(scalar_part);
    }
  }
  return b;
}

// Non-scalar rational perturbation.
RMatrix perturbation(Rng& rng, int n) {
  for (;;) {
    RMatrix e = random_matrix(rng, n);
    bool scalar_matrix = true;
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        if (r != c && !e[r][c].is_zero()) scalar_matrix = false;
      }
      if (!(e[r][r] == e[0][0])) scalar_matrix = false;
    }
    if (!scalar_matrix) return e;
  }
}

RMatrix add(RMatrix a, const RMatrix& b) {
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t c = 0; c < a.size(); ++c) a[r][c] += b[r][c];
  }
  return a;
}

TEST_CASE("phi_matrix: examples") {
  const OdeSystem zero{"z", 2, {Expr(), Expr()}, {}};
  for (const auto& row : phi_matrix(zero)) {
    for (const Expr& e : row) CHECK(e.is_zero());
  }

  const std::vector<ParamDecl> w = {ParamDecl::generic("w1"), ParamDecl::generic("w2")};
  const OdeSystem osc{"osc", 2, {parse_expr("w1^2*y1", {.n = 2}), parse_expr("w2^2*y2", {.n = 2})},
                      w};
  const ExprMatrix phi = phi_matrix(osc);
  CHECK(is_zero(phi[0][0] + parse_expr("w1^2"), w).zero());
  CHECK(is_zero(phi[1][1] + parse_expr("w2^2"), w).zero());
  CHECK(is_zero(phi[0][1], w).zero());
  CHECK(is_zero(phi[1][0], w).zero());
}

TEST_CASE("phi_matrix: linear normal form gives -a I") {
  Rng rng(51);
  for (int t = 0; t < 10; ++t) {
    const RMatrix a = random_matrix(rng, 2);
    const Rational s = random_rational(rng);
    const OdeSystem sys = to_ode_system({a, straight_b(a, s)});
    const ExprMatrix phi = phi_matrix(sys);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        const Expr entry = r == c ? phi[r][c] + Expr::constant(s) : phi[r][c];
        CHECK(is_zero(entry, {}).zero());
      }
    }
  }
}

TEST_CASE("fels_torsion: examples") {
  const OdeSystem equal{"eq", 2, {parse_expr("w^2*y1", {.n = 2}), parse_expr("w^2*y2", {.n = 2})},
                        {ParamDecl::generic("w")}};
  CHECK(fels_torsion(equal).straight());

  const std::vector<ParamDecl> w = {ParamDecl::generic("w1"), ParamDecl::generic("w2")};
  const OdeSystem distinct{
      "ne", 2, {parse_expr("w1^2*y1", {.n = 2}), parse_expr("w2^2*y2", {.n = 2})}, w};
  const TorsionReport r = fels_torsion(distinct);
  REQUIRE(r.verdict.nonzero());
  CHECK(*r.verdict.entry == std::make_pair(1, 1));
  // Witness value equals (w2^2 - w1^2)/2 at the witness point.
  std::map<VarRef, cplx> pt(r.verdict.witness->point.begin(), r.verdict.witness->point.end());
  const cplx want = (std::pow(pt[VarRef::param("w2")], 2) - std::pow(pt[VarRef::param("w1")], 2)) /
                    2.0;
  CHECK(rel_err(r.verdict.witness->value, want) < 1e-12);
}

TEST_CASE("fels_torsion: n = 1 is the structural zero matrix") {
  Rng rng(52);
  const std::vector<VarRef> jet = {VarRef::x(), VarRef::y(1), VarRef::ydot(1)};
  for (int t = 0; t < 50; ++t) {
    const OdeSystem sys{"r", 1, {build(random_raw_tree(rng, jet, 4))}, {}};
    const ExprMatrix m = fels_matrix(sys);
    REQUIRE(m.size() == 1);
    CHECK(m[0][0].is_zero());
  }
  CHECK(fels_torsion(scalar("6*y^2")).straight());
}

TEST_CASE("property: Fels matrix is trace-free") {
  Rng rng(53);
  std::uniform_int_distribution<int> dim(2, 3);
  for (int t = 0; t < 50; ++t) {
    const int n = dim(rng);
    std::vector<VarRef> jet = {VarRef::x()};
    for (int k = 1; k <= n; ++k) {
      jet.push_back(VarRef::y(k));
      jet.push_back(VarRef::ydot(k));
    }
    OdeSystem sys{"r", n, {}, {}};
    for (int k = 0; k < n; ++k) sys.rhs.push_back(random_polynomial(rng, jet, 3, 4));
    const ExprMatrix m = fels_matrix(sys);
    std::vector<Expr> diag;
    for (int k = 0; k < n; ++k) diag.push_back(m[k][k]);
    OracleConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(t);
    CHECK(is_zero(make_sum(diag), {}, cfg).zero());
  }
}

TEST_CASE("tresse_torsion: examples") {
  const TorsionReport zero = tresse_torsion(scalar("0"));
  CHECK(zero.scalar.is_zero());
  CHECK(zero.straight());

  const TorsionReport cubic = tresse_torsion(scalar("6*y^2"));
  CHECK(cubic.scalar == Expr::integer(72));
  CHECK(cubic.verdict.nonzero());

  CHECK(tresse_torsion(scalar("1/(4*y^3)")).verdict.nonzero());
  CHECK_THROWS_AS(tresse_invariant(OdeSystem{"two", 2, {Expr(), Expr()}, {}}), DimensionError);
}

TEST_CASE("tresse: 72 for y'' = 6 y^2 from nested finite differences") {
  const JetFn f = [](ld, ld y, ld) { return 6 * y * y; };
  Rng rng(54);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int k = 0; k < 5; ++k) {
    const ld t = fd_tresse(f, u(rng), u(rng), u(rng), 1e-3L);
    CHECK(std::abs(static_cast<double>(t) - 72.0) < 1e-3);
  }
}

TEST_CASE("tresse: symbolic invariant matches nested finite differences") {
  struct Case {
    const char* rhs;
    JetFn f;
  };
  const std::vector<Case> cases = {
      {"2*y^3 + x*y + 1/3", [](ld x, ld y, ld) { return 2 * y * y * y + x * y + 1.0L / 3; }},
      {"(1 - y^2)*dy/2 - y", [](ld, ld y, ld p) { return (1 - y * y) * p / 2 - y; }},
      {"-(1/2*dy + 3/4*x*y*dy)/x", [](ld x, ld y, ld p) { return -(p / 2 + 0.75L * x * y * p) / x; }},
      {"dy^2/y - dy/x + (y^2 + 2)/x + y^3 - 1/y",
       [](ld x, ld y, ld p) { return p * p / y - p / x + (y * y + 2) / x + y * y * y - 1 / y; }},
      {"sin(x)*dy^3 + exp(y)*dy", [](ld x, ld y, ld p) { return std::sin(x) * p * p * p + std::exp(y) * p; }},
  };
  Rng rng(55);
  std::uniform_real_distribution<double> u(0.6, 1.4);
  for (const Case& c : cases) {
    const Expr t = tresse_invariant(scalar(c.rhs));
    for (int k = 0; k < 3; ++k) {
      const double x = u(rng), y = u(rng), p = u(rng);
      EvalContext ctx({{VarRef::x(), x}, {VarRef::y(1), y}, {VarRef::ydot(1), p}});
      const cplx symbolic = eval(t, ctx);
      const double numeric = static_cast<double>(fd_tresse(c.f, x, y, p, 2e-3L));
      CHECK_MESSAGE(std::abs(symbolic - numeric) < 2e-3 * std::max(1.0, ctx.telemetry.scale),
                    c.rhs);
    }
  }
}

TEST_CASE("tresse: hand-derived closed forms") {
  const std::vector<ParamDecl> a = {ParamDecl::generic("a")};
  const std::vector<ParamDecl> ab = {ParamDecl::generic("a"), ParamDecl::generic("b")};
  // Emden-Fowler: -6 a (a - 1) y^(a - 2).
  const Expr ef = tresse_invariant(scalar("-x*dy - exp(a*log(y))", a));
  CHECK(is_zero(ef + parse_expr("6*a*(a - 1)*exp((a - 2)*log(y))"), a).zero());
  // Lagerstrom: 4 b (a/x + b y).
  const Expr lag = tresse_invariant(scalar("-(a*dy + b*x*y*dy)/x", ab));
  CHECK(is_zero(lag - parse_expr("4*b*(a/x + b*y)"), ab).zero());
  // van der Pol: -4 a dy - 8 a^2 y (1 - y^2).
  const Expr vdp = tresse_invariant(scalar("a*(1 - y^2)*dy - y", a));
  CHECK(is_zero(vdp - parse_expr("-4*a*dy - 8*a^2*y*(1 - y^2)"), a).zero());
}

TEST_CASE("property: Tresse vanishes on linear equations with variable coefficients") {
  Rng rng(56);
  const std::vector<VarRef> xs = {VarRef::x()};
  for (int t = 0; t < 30; ++t) {
    const Expr a = build(random_raw_tree(rng, xs, 3));
    const Expr b = build(random_raw_tree(rng, xs, 3));
    const Expr c = build(random_raw_tree(rng, xs, 2));
    const OdeSystem sys{"lin", 1, {a * P() + b * Y() + c}, {}};
    CHECK_FALSE(tresse_torsion(sys).verdict.nonzero());
  }
}

TEST_CASE("quartic_test: examples") {
  CHECK(quartic_test(scalar("1/(4*y^3)")).straight());
  CHECK(quartic_test(scalar("sin(x)*y + exp(y)*dy + x*y*dy^2 + cos(x*y)*dy^3")).straight());
  const TorsionReport r = quartic_test(scalar("dy^4"));
  REQUIRE(r.verdict.nonzero());
  CHECK(r.verdict.witness->value == cplx(24.0));
  CHECK(quartic_partials(OdeSystem{"two", 2, {Expr(), Expr()}, {}}).size() == 10);
}

TEST_CASE("is_straight: examples") {
  const TorsionReport airy = is_straight(scalar("x*y"));
  CHECK(airy.method == Method::kTresse);
  CHECK(airy.straight());
  CHECK(is_straight(scalar("6*y^2 + x")).verdict.nonzero());
  Rng rng(57);
  const RMatrix a = random_matrix(rng, 2);
  const TorsionReport lin = is_straight(to_ode_system({a, straight_b(a, random_rational(rng))}));
  CHECK(lin.method == Method::kFels);
  CHECK(lin.straight());
}

TEST_CASE("classify_linear_const: examples") {
  const RMatrix zero2(2, std::vector<ComplexRational>(2));
  RMatrix three = zero2;
  three[0][0] = three[1][1] = ComplexRational(3);
  CHECK(classify_linear_const({zero2, three}));
  RMatrix diag12 = zero2;
  diag12[0][0] = ComplexRational(1);
  diag12[1][1] = ComplexRational(2);
  CHECK_FALSE(classify_linear_const({zero2, diag12}));
  CHECK_THROWS_AS(classify_linear_const({zero2, RMatrix(3, std::vector<ComplexRational>(3))}),
                  std::invalid_argument);
}

TEST_CASE("property: classifier agrees with the Fels verdict") {
  Rng rng(58);
  std::uniform_int_distribution<int> dim(2, 3);
  for (int t = 0; t < 100; ++t) {
    const int n = dim(rng);
    const RMatrix a = random_matrix(rng, n);
    const RMatrix b = straight_b(a, random_rational(rng));
    const RMatrix b_off = add(b, perturbation(rng, n));
    for (const RMatrix& bb : {b, b_off}) {
      const LinearConstSystem ls{a, bb};
      const bool exact = classify_linear_const(ls);
      std::vector<std::vector<cplx>> ad(n, std::vector<cplx>(n)), bd = ad;
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
          ad[r][c] = a[r][c].to_complex();
          bd[r][c] = bb[r][c].to_complex();
        }
      }
      CHECK(classify_linear_const(ad, bd) == exact);
      CHECK(fels_torsion(to_ode_system(ls)).straight() == exact);
    }
    CHECK(classify_linear_const({a, b}));
    CHECK_FALSE(classify_linear_const({a, b_off}));
  }
}

TEST_CASE("check_conserved: examples") {
  const OdeSystem cubic = scalar("6*y^2");
  CHECK(check_conserved(cubic, parse_expr("dy^2 - 4*y^3")).zero());
  const Verdict y = check_conserved(cubic, parse_expr("y"));
  REQUIRE(y.nonzero());
  std::map<VarRef, cplx> pt(y.witness->point.begin(), y.witness->point.end());
  CHECK(y.witness->value == pt[VarRef::ydot(1)]);

  const OdeSystem ell = scalar("y*(y - 1)/2 + (y - 1/2)*dy^2/(y*(y - 1))");
  CHECK(check_conserved(ell, parse_expr("y - dy^2/(y*(y - 1))")).zero());
}

TEST_CASE("tresse_autonomous: examples") {
  CHECK(tresse_autonomous(parse_expr("6*y^2")).verdict.nonzero());
  CHECK(tresse_autonomous(parse_expr("c"), {ParamDecl::generic("c")}).straight());
  CHECK(tresse_autonomous(parse_expr("a*dy + b*y"),
                          {ParamDecl::generic("a"), ParamDecl::generic("b")})
            .straight());
  CHECK_THROWS_AS(tresse_autonomous(parse_expr("x*y")), InputError);
  CHECK_THROWS_AS(tresse_autonomous(parse_expr("y2", {.n = 2})), InputError);
}

TEST_CASE("tresse_autonomous: displayed condition is compared but does not decide") {
  const TorsionReport r = tresse_autonomous(parse_expr("dy^2/y + y^3"));
  CHECK(r.telemetry.autonomous_points > 0);
  CHECK(r.telemetry.autonomous_agreements <= r.telemetry.autonomous_points);
  // For f = 6 y^2 both reduce to 6 f_yy = 72.
  const TorsionReport c = tresse_autonomous(parse_expr("6*y^2"));
  CHECK(c.telemetry.autonomous_agreements == c.telemetry.autonomous_points);
}

TEST_CASE("autonomous condition differs from the Tresse specialization in two terms") {
  // Expanding D = p d/dy + f d/dp by hand gives -3 f f_ypp and -3 f_y f_pp
  // where the expanded condition has -3 f_ypp and -3 f_y f_yp.
  const VarRef vy = VarRef::y(1), vp = VarRef::ydot(1);
  for (const char* text : {"dy^2/y + y^3", "y*dy^2", "sin(y)*dy^3 + exp(y*dy)", "dy^5*y^2 + y"}) {
    const Expr f = parse_expr(text);
    auto d = [&](std::vector<VarRef> vars) { return nth_partial(f, vars); };
    const Expr f_ypp = d({vy, vp, vp}), f_y = d({vy}), f_yp = d({vy, vp}), f_pp = d({vp, vp});
    const Expr corrected = make_sum({autonomous_condition(f), make_product({Expr::integer(3), f_ypp}),
                                     make_product({Expr::integer(-3), f, f_ypp}),
                                     make_product({Expr::integer(3), f_y, f_yp}),
                                     make_product({Expr::integer(-3), f_y, f_pp})});
    const Expr tresse = tresse_invariant(scalar(text));
    CHECK_MESSAGE(is_zero(tresse - corrected, {}).zero(), text);
    CHECK_MESSAGE(is_zero(tresse - autonomous_condition(f), {}).nonzero(), text);
  }
}

TEST_CASE("telemetry records sizes") {
  const TorsionReport r = is_straight(scalar("dy^2/y - dy/x + y^3"));
  CHECK(r.telemetry.dag_nodes > 0);
  CHECK(r.telemetry.tree_nodes >= r.telemetry.dag_nodes);
}

}  // namespace
}  // namespace straight
