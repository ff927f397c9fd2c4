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

#include "straight/calculus.hpp"

#include <unordered_map>

namespace straight {

namespace {

class Differentiator {
 public:
  explicit Differentiator(const VarRef& v) : var_(v) {}

  Expr run(const Expr& e) {
    if (!e.may_contain(var_)) return Expr::integer(0);
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    Expr d = compute(e);
    memo_.emplace(e.id(), d);
    return d;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.kind()) {
      case NodeKind::kConst:
        return Expr::integer(0);
      case NodeKind::kVar:
        return Expr::integer(e.var() == var_ ? 1 : 0);
      case NodeKind::kSum: {
        std::vector<Expr> terms;
        for (const Expr& t : e.operands()) {
          Expr d = run(t);
          if (!d.is_zero()) terms.push_back(std::move(d));
        }
        return make_sum(std::move(terms));
      }
      case NodeKind::kProduct: {
        auto ops = e.operands();
        std::vector<Expr> terms;
        for (std::size_t k = 0; k < ops.size(); ++k) {
          Expr d = run(ops[k]);
          if (d.is_zero()) continue;
          std::vector<Expr> factors;
          factors.reserve(ops.size());
          for (std::size_t j = 0; j < ops.size(); ++j) {
            if (j != k) factors.push_back(ops[j]);
          }
          factors.push_back(std::move(d));
          terms.push_back(make_product(std::move(factors)));
        }
        return make_sum(std::move(terms));
      }
      case NodeKind::kPower: {
        const Expr& base = e.operands()[0];
        Expr d = run(base);
        if (d.is_zero()) return d;
        return make_product({Expr::integer(e.exponent()), make_power(base, e.exponent() - 1), d});
      }
      case NodeKind::kQuotient: {
        const Expr& num = e.operands()[0];
        const Expr& den = e.operands()[1];
        return make_quotient(run(num) * den - num * run(den), make_power(den, 2));
      }
      case NodeKind::kApply: {
        const Expr& u = e.operands()[0];
        Expr du = run(u);
        if (du.is_zero()) return du;
        switch (e.fn()) {
          case Fn::kExp:
            return e * du;
          case Fn::kLog:
            return make_quotient(du, u);
          case Fn::kSin:
            return make_apply(Fn::kCos, u) * du;
          case Fn::kCos:
            return -(make_apply(Fn::kSin, u) * du);
          case Fn::kSqrt:
            return make_product({Expr::rational(1, 2), du, make_power(e, -1)});
        }
        break;
      }
      case NodeKind::kNegate:
        return -run(e.operands()[0]);
    }
    return Expr::integer(0);
  }

  const VarRef& var_;
  std::unordered_map<const detail::Node*, Expr> memo_;
};

}  // namespace

Expr partial(const Expr& e, const VarRef& v) {
  Differentiator d(v);
  return d.run(e);
}

Expr nth_partial(const Expr& e, std::span<const VarRef> vars) {
  Expr acc = e;
  for (const VarRef& v : vars) {
    if (acc.is_const()) return Expr::integer(0);
    acc = partial(acc, v);
  }
  return acc;
}

Expr total_derivative(const Expr& g, const OdeSystem& sys) {
  std::vector<Expr> terms{partial(g, VarRef::x())};
  for (int k = 1; k <= sys.n; ++k) {
    Expr gy = partial(g, VarRef::y(k));
    if (!gy.is_zero()) terms.push_back(gy * Expr::variable(VarRef::ydot(k)));
    Expr gp = partial(g, VarRef::ydot(k));
    if (!gp.is_zero()) terms.push_back(gp * sys.f(k));
  }
  return make_sum(std::move(terms));
}

}  // namespace straight
