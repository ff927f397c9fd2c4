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

#include "straight/torsion.hpp"

#include <chrono>
#include <map>
#include <cmath>
#include <numbers>
#include <random>

#include "straight/calculus.hpp"

namespace straight {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kTresse:
      return "tresse";
    case Method::kFels:
      return "fels";
    case Method::kQuartic:
      return "quartic";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Expr y(int i) { return Expr::variable(VarRef::y(i)); }
Expr p(int i) { return Expr::variable(VarRef::ydot(i)); }

void record_sizes(TorsionTelemetry& t, std::span<const Expr> exprs) {
  for (const Expr& e : exprs) {
    t.dag_nodes += dag_size(e);
    const std::uint64_t s = tree_size(e);
    t.tree_nodes = UINT64_MAX - t.tree_nodes < s ? UINT64_MAX : t.tree_nodes + s;
  }
}

}  // namespace

ExprMatrix phi_matrix(const OdeSystem& sys) {
  const int n = sys.n;
  // fp[I][J] = d f^I / d dy^J
  ExprMatrix fp(n, std::vector<Expr>(n));
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) fp[i - 1][j - 1] = partial(sys.f(i), VarRef::ydot(j));
  }
  ExprMatrix phi(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::vector<Expr> terms;
      terms.push_back(Expr::rational(1, 2) * total_derivative(fp[i][j], sys));
      terms.push_back(-partial(sys.f(i + 1), VarRef::y(j + 1)));
      for (int k = 0; k < n; ++k) {
        terms.push_back(make_product({Expr::rational(-1, 4), fp[i][k], fp[k][j]}));
      }
      phi[i][j] = make_sum(std::move(terms));
    }
  }
  return phi;
}

ExprMatrix fels_matrix(const OdeSystem& sys) {
  ExprMatrix phi = phi_matrix(sys);
  const int n = sys.n;
  std::vector<Expr> diag;
  for (int k = 0; k < n; ++k) diag.push_back(phi[k][k]);
  const Expr trace_part = make_product({Expr::rational(-1, n), make_sum(std::move(diag))});
  for (int k = 0; k < n; ++k) phi[k][k] = phi[k][k] + trace_part;
  return phi;
}

TorsionReport fels_torsion(const OdeSystem& sys, const OracleConfig& cfg) {
  TorsionReport report;
  report.method = Method::kFels;
  auto start = Clock::now();
  report.matrix = fels_matrix(sys);
  report.telemetry.build_ms = ms_since(start);
  for (const auto& row : report.matrix) record_sizes(report.telemetry, row);
  start = Clock::now();
  report.verdict = is_zero_matrix(report.matrix, sys.params, cfg);
  report.telemetry.oracle_ms = ms_since(start);
  return report;
}

Expr tresse_invariant(const OdeSystem& sys) {
  if (sys.n != 1) {
    throw DimensionError("Tresse torsion needs a single equation, got n = " +
                         std::to_string(sys.n));
  }
  const Expr& f = sys.f(1);
  const VarRef vy = VarRef::y(1);
  const VarRef vp = VarRef::ydot(1);
  const Expr f_y = partial(f, vy);
  const Expr f_p = partial(f, vp);
  const Expr f_pp = partial(f_p, vp);
  const Expr f_yp = partial(f_p, vy);
  const Expr f_yy = partial(f_y, vy);
  const Expr d_fpp = total_derivative(f_pp, sys);
  const Expr dd_fpp = total_derivative(d_fpp, sys);
  const Expr d_fyp = total_derivative(f_yp, sys);
  return make_sum({
      dd_fpp,
      make_product({Expr::integer(-4), d_fyp}),
      f_p * (make_product({Expr::integer(4), f_yp}) - d_fpp),
      make_product({Expr::integer(-3), f_y, f_pp}),
      make_product({Expr::integer(6), f_yy}),
  });
}

TorsionReport tresse_torsion(const OdeSystem& sys, const OracleConfig& cfg) {
  TorsionReport report;
  report.method = Method::kTresse;
  auto start = Clock::now();
  report.scalar = tresse_invariant(sys);
  report.telemetry.build_ms = ms_since(start);
  record_sizes(report.telemetry, std::span<const Expr>(&report.scalar, 1));
  start = Clock::now();
  report.verdict = is_zero(report.scalar, sys.params, cfg);
  report.telemetry.oracle_ms = ms_since(start);
  return report;
}

std::vector<Expr> quartic_partials(const OdeSystem& sys) {
  std::vector<Expr> out;
  const int n = sys.n;
  for (int i = 1; i <= n; ++i) {
    for (int a = 1; a <= n; ++a) {
      const Expr da = partial(sys.f(i), VarRef::ydot(a));
      for (int b = a; b <= n; ++b) {
        const Expr db = partial(da, VarRef::ydot(b));
        for (int c = b; c <= n; ++c) {
          const Expr dc = partial(db, VarRef::ydot(c));
          for (int d = c; d <= n; ++d) out.push_back(partial(dc, VarRef::ydot(d)));
        }
      }
    }
  }
  return out;
}

TorsionReport quartic_test(const OdeSystem& sys, const OracleConfig& cfg) {
  TorsionReport report;
  report.method = Method::kQuartic;
  auto start = Clock::now();
  report.list = quartic_partials(sys);
  report.telemetry.build_ms = ms_since(start);
  record_sizes(report.telemetry, report.list);
  start = Clock::now();
  report.verdict = is_zero_list(report.list, sys.params, cfg);
  report.telemetry.oracle_ms = ms_since(start);
  return report;
}

TorsionReport is_straight(const OdeSystem& sys, const OracleConfig& cfg) {
  return sys.n == 1 ? tresse_torsion(sys, cfg) : fels_torsion(sys, cfg);
}

namespace {

template <typename T>
using Matrix = std::vector<std::vector<T>>;

template <typename T>
Matrix<T> residual(const Matrix<T>& a, const Matrix<T>& b, const T& quarter) {
  const std::size_t n = a.size();
  if (b.size() != n) throw std::invalid_argument("A and B must have the same dimension");
  for (std::size_t r = 0; r < n; ++r) {
    if (a[r].size() != n || b[r].size() != n) {
      throw std::invalid_argument("A and B must be square");
    }
  }
  Matrix<T> m = b;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      T acc{};
      for (std::size_t k = 0; k < n; ++k) acc += a[r][k] * a[k][c];
      m[r][c] += quarter * acc;
    }
  }
  return m;
}

}  // namespace

bool classify_linear_const(const LinearConstSystem& ls) {
  const auto m = residual(ls.a, ls.b, ComplexRational(Rational(1, 4)));
  const std::size_t n = m.size();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (r != c && !m[r][c].is_zero()) return false;
    }
    if (!(m[r][r] == m[0][0])) return false;
  }
  return true;
}

bool classify_linear_const(const std::vector<std::vector<std::complex<double>>>& a,
                           const std::vector<std::vector<std::complex<double>>>& b,
                           double rel_tol) {
  const auto m = residual(a, b, std::complex<double>(0.25));
  const std::size_t n = m.size();
  double largest = 0.0;
  for (const auto& row : m) {
    for (const auto& v : row) largest = std::max(largest, std::abs(v));
  }
  const double tol = rel_tol * std::max(largest, 1.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (r != c && std::abs(m[r][c]) > tol) return false;
    }
    if (std::abs(m[r][r] - m[0][0]) > tol) return false;
  }
  return true;
}

OdeSystem to_ode_system(const LinearConstSystem& ls, std::string name) {
  OdeSystem sys;
  sys.name = std::move(name);
  sys.n = static_cast<int>(ls.a.size());
  for (int i = 0; i < sys.n; ++i) {
    std::vector<Expr> terms;
    for (int j = 0; j < sys.n; ++j) {
      terms.push_back(Expr::constant(ls.a[i][j]) * p(j + 1));
      terms.push_back(Expr::constant(ls.b[i][j]) * y(j + 1));
    }
    sys.rhs.push_back(make_sum(std::move(terms)));
  }
  return sys;
}

Verdict check_conserved(const OdeSystem& sys, const Expr& g, const OracleConfig& cfg) {
  return is_zero(total_derivative(g, sys), sys.params, cfg);
}

Expr autonomous_condition(const Expr& f) {
  const VarRef vy = VarRef::y(1);
  const VarRef vp = VarRef::ydot(1);
  auto d = [&](std::initializer_list<VarRef> vars) {
    return nth_partial(f, std::span<const VarRef>(vars.begin(), vars.size()));
  };
  const Expr pv = p(1);
  const Expr f_y = d({vy});
  const Expr f_p = d({vp});
  const Expr f_yy = d({vy, vy});
  const Expr f_yp = d({vy, vp});
  const Expr f_ppp = d({vp, vp, vp});
  const Expr f_ypp = d({vy, vp, vp});
  const Expr f_yyp = d({vy, vy, vp});
  const Expr f_yypp = d({vy, vy, vp, vp});
  const Expr f_yppp = d({vy, vp, vp, vp});
  const Expr f_pppp = d({vp, vp, vp, vp});
  return make_sum({
      make_product({make_power(pv, 2), f_yypp}),
      make_product({Expr::integer(2), pv, f, f_yppp}),
      make_product({make_power(f, 2), f_pppp}),
      make_product({pv, f_ppp, f_y}),
      make_product({Expr::integer(-3), f_ypp}),
      make_product({Expr::integer(-4), pv, f_yyp}),
      make_product({Expr::integer(4), f_p, f_yp}),
      make_product({Expr::integer(-1), pv, f_p, f_ypp}),
      make_product({Expr::integer(-3), f_y, f_yp}),
      make_product({Expr::integer(6), f_yy}),
  });
}

TorsionReport tresse_autonomous(const Expr& f, std::vector<ParamDecl> params,
                                const OracleConfig& cfg) {
  for (const VarRef& v : free_vars(f)) {
    if (v.kind == VarKind::kX) throw InputError("autonomous equation must not depend on x");
    if ((v.kind == VarKind::kY || v.kind == VarKind::kYDot) && v.index != 1) {
      throw InputError("autonomous equation is scalar; found " + v.to_string());
    }
  }
  OdeSystem sys{"autonomous", 1, {f}, std::move(params)};
  TorsionReport report = tresse_torsion(sys, cfg);

  const Expr displayed = autonomous_condition(f);
  std::map<std::string, const ParamDecl*> by_name;
  for (const ParamDecl& pd : sys.params) by_name[pd.name] = &pd;
  std::vector<VarRef> vars = free_vars(report.scalar + displayed);
  std::mt19937_64 rng(cfg.seed ^ 0xa5a5a5a5ULL);
  std::uniform_real_distribution<double> radius2(cfg.r_min * cfg.r_min, cfg.r_max * cfg.r_max);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int s = 0; s < cfg.samples; ++s) {
    EvalContext ctx;
    for (const VarRef& v : vars) {
      if (v.is_param()) {
        auto it = by_name.find(v.name);
        if (it != by_name.end() && it->second->policy == ParamPolicy::kFixed) {
          ctx.assign(v, it->second->value.to_complex());
          continue;
        }
      }
      ctx.assign(v, std::polar(std::sqrt(radius2(rng)), angle(rng)));
    }
    try {
      const std::complex<double> t = eval(report.scalar, ctx);
      const double t_scale = ctx.telemetry.scale;
      const std::complex<double> c = eval(displayed, ctx);
      const double c_scale = ctx.telemetry.scale;
      ++report.telemetry.autonomous_points;
      if (std::abs(t - c) <= cfg.rel_tol * (t_scale + c_scale)) {
        ++report.telemetry.autonomous_agreements;
      }
    } catch (const EvalSingular&) {
      continue;
    }
  }
  return report;
}

}  // namespace straight
