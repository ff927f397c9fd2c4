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

#include "straight/expr.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace straight {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  std::uint64_t z = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return static_cast<std::size_t>(z ^ (z >> 31));
}

std::size_t hash_string(std::string_view s) {
  // FNV-1a; std::hash is not required to be stable across runs.
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return static_cast<std::size_t>(h);
}

}  // namespace

std::string VarRef::to_string() const {
  switch (kind) {
    case VarKind::kX:
      return "x";
    case VarKind::kY:
      return "y" + std::to_string(index);
    case VarKind::kYDot:
      return "dy" + std::to_string(index);
    case VarKind::kParam:
      return name;
  }
  return {};
}

std::size_t VarRef::hash() const {
  return mix(mix(static_cast<std::size_t>(kind) + 1, static_cast<std::size_t>(index)),
             hash_string(name));
}

std::string_view fn_name(Fn fn) {
  switch (fn) {
    case Fn::kExp:
      return "exp";
    case Fn::kLog:
      return "log";
    case Fn::kSin:
      return "sin";
    case Fn::kCos:
      return "cos";
    case Fn::kSqrt:
      return "sqrt";
  }
  return "?";
}

struct ExprFactory {
  static Expr make(detail::Node node) {
    std::size_t h = mix(0x51ed270b, static_cast<std::size_t>(node.kind));
    std::uint64_t mask = 0;
    switch (node.kind) {
      case NodeKind::kConst:
        h = mix(h, node.value.hash());
        break;
      case NodeKind::kVar: {
        const std::size_t vh = node.var.hash();
        h = mix(h, vh);
        mask = std::uint64_t{1} << (vh % 64);
        break;
      }
      default:
        for (const Expr& op : node.operands) {
          h = mix(h, op.hash());
          mask |= op.id()->var_mask;
        }
        h = mix(h, static_cast<std::size_t>(node.exponent));
        h = mix(h, static_cast<std::size_t>(node.fn));
        break;
    }
    node.hash = h;
    node.var_mask = mask;
    return Expr(std::make_shared<const detail::Node>(std::move(node)));
  }
};

namespace {

Expr make_node(NodeKind kind, std::vector<Expr> operands, long exponent = 0,
               Fn fn = Fn::kExp) {
  detail::Node node;
  node.kind = kind;
  node.operands = std::move(operands);
  node.exponent = exponent;
  node.fn = fn;
  return ExprFactory::make(std::move(node));
}

const Expr& zero_expr() {
  static const Expr kZero = Expr::integer(0);
  return kZero;
}

}  // namespace

Expr::Expr() : Expr(zero_expr()) {}

Expr Expr::constant(ComplexRational value) {
  detail::Node node;
  node.kind = NodeKind::kConst;
  node.value = std::move(value);
  return ExprFactory::make(std::move(node));
}

Expr Expr::rational(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return constant(ComplexRational(q));
}

Expr Expr::variable(VarRef var) {
  detail::Node node;
  node.kind = NodeKind::kVar;
  node.var = std::move(var);
  return ExprFactory::make(std::move(node));
}

NodeKind Expr::kind() const { return node_->kind; }
bool Expr::is_zero() const { return is_const() && node_->value.is_zero(); }
bool Expr::is_one() const { return is_const() && node_->value.is_one(); }
const ComplexRational& Expr::value() const { return node_->value; }
const VarRef& Expr::var() const { return node_->var; }
std::span<const Expr> Expr::operands() const { return node_->operands; }
long Expr::exponent() const { return node_->exponent; }
Fn Expr::fn() const { return node_->fn; }
std::size_t Expr::hash() const { return node_->hash; }

bool Expr::may_contain(const VarRef& v) const {
  return (node_->var_mask & (std::uint64_t{1} << (v.hash() % 64))) != 0;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const detail::Node& x = *a.node_;
  const detail::Node& y = *b.node_;
  if (x.hash != y.hash || x.kind != y.kind) return false;
  switch (x.kind) {
    case NodeKind::kConst:
      return x.value == y.value;
    case NodeKind::kVar:
      return x.var == y.var;
    default:
      if (x.exponent != y.exponent || x.fn != y.fn ||
          x.operands.size() != y.operands.size()) {
        return false;
      }
      for (std::size_t k = 0; k < x.operands.size(); ++k) {
        if (!(x.operands[k] == y.operands[k])) return false;
      }
      return true;
  }
}

namespace raw {

Expr sum(std::vector<Expr> terms) { return make_node(NodeKind::kSum, std::move(terms)); }
Expr product(std::vector<Expr> factors) {
  return make_node(NodeKind::kProduct, std::move(factors));
}
Expr power(const Expr& base, long exponent) {
  return make_node(NodeKind::kPower, {base}, exponent);
}
Expr quotient(const Expr& numerator, const Expr& denominator) {
  return make_node(NodeKind::kQuotient, {numerator, denominator});
}
Expr apply(Fn fn, const Expr& arg) { return make_node(NodeKind::kApply, {arg}, 0, fn); }
Expr negate(const Expr& arg) { return make_node(NodeKind::kNegate, {arg}); }

}  // namespace raw

namespace {

// Sort key: constants, then powers of single variables ordered by variable,
// then everything else by hash.
bool canonical_less(const Expr& a, const Expr& b) {
  auto group = [](const Expr& e) -> int {
    if (e.is_const()) return 0;
    if (e.kind() == NodeKind::kVar) return 1;
    if (e.kind() == NodeKind::kPower && e.operands()[0].kind() == NodeKind::kVar) return 1;
    return 2;
  };
  const int ga = group(a);
  const int gb = group(b);
  if (ga != gb) return ga < gb;
  if (ga == 1) {
    const Expr& va = a.kind() == NodeKind::kVar ? a : a.operands()[0];
    const Expr& vb = b.kind() == NodeKind::kVar ? b : b.operands()[0];
    if (va.var() != vb.var()) return va.var() < vb.var();
    const long ea = a.kind() == NodeKind::kVar ? 1 : a.exponent();
    const long eb = b.kind() == NodeKind::kVar ? 1 : b.exponent();
    return ea < eb;
  }
  if (a.kind() != b.kind()) return a.kind() < b.kind();
  return a.hash() < b.hash();
}

// Buckets structurally equal keys; preserves first-occurrence order.
template <typename Payload>
class Grouper {
 public:
  Payload& slot(const Expr& key, const Payload& init, bool& fresh) {
    auto [lo, hi] = index_.equal_range(key.hash());
    for (auto it = lo; it != hi; ++it) {
      if (entries_[it->second].first == key) {
        fresh = false;
        return entries_[it->second].second;
      }
    }
    fresh = true;
    index_.emplace(key.hash(), entries_.size());
    entries_.emplace_back(key, init);
    return entries_.back().second;
  }
  std::vector<std::pair<Expr, Payload>>& entries() { return entries_; }

 private:
  std::unordered_multimap<std::size_t, std::size_t> index_;
  std::vector<std::pair<Expr, Payload>> entries_;
};

struct TermGroup {
  ComplexRational coef;
  Expr original;
  int members = 0;
};

struct FactorGroup {
  long exponent = 0;
  Expr original;
  int members = 0;
};

long checked_mul(long a, long b) {
  long r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("exponent overflow");
  return r;
}

long checked_add(long a, long b) {
  long r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("exponent overflow");
  return r;
}

}  // namespace

Expr make_sum(std::vector<Expr> terms) {
  ComplexRational constant;
  std::vector<Expr> flat;
  flat.reserve(terms.size());
  for (Expr& t : terms) {
    if (t.kind() == NodeKind::kSum) {
      for (const Expr& inner : t.operands()) {
        if (inner.is_const()) {
          constant += inner.value();
        } else {
          flat.push_back(inner);
        }
      }
    } else if (t.is_const()) {
      constant += t.value();
    } else {
      flat.push_back(std::move(t));
    }
  }

  Grouper<TermGroup> groups;
  for (const Expr& t : flat) {
    ComplexRational coef(1);
    Expr rest = t;
    if (t.kind() == NodeKind::kProduct && t.operands()[0].is_const()) {
      coef = t.operands()[0].value();
      auto ops = t.operands();
      if (ops.size() == 2) {
        rest = ops[1];
      } else {
        rest = raw::product(std::vector<Expr>(ops.begin() + 1, ops.end()));
      }
    }
    bool fresh = false;
    TermGroup& g = groups.slot(rest, TermGroup{ComplexRational(0), t, 0}, fresh);
    g.coef += coef;
    ++g.members;
  }

  std::vector<Expr> out;
  for (auto& [rest, g] : groups.entries()) {
    if (g.coef.is_zero()) continue;
    if (g.members == 1) {
      out.push_back(g.original);
    } else if (g.coef.is_one()) {
      out.push_back(rest);
    } else {
      out.push_back(make_product({Expr::constant(g.coef), rest}));
    }
  }
  std::vector<Expr> finished;
  for (Expr& e : out) {
    if (e.is_const()) {
      constant += e.value();
    } else {
      finished.push_back(std::move(e));
    }
  }
  if (finished.empty()) return Expr::constant(constant);
  if (finished.size() == 1 && constant.is_zero()) return finished.front();
  std::stable_sort(finished.begin(), finished.end(), canonical_less);
  if (!constant.is_zero()) finished.insert(finished.begin(), Expr::constant(constant));
  return make_node(NodeKind::kSum, std::move(finished));
}

Expr make_product(std::vector<Expr> factors) {
  ComplexRational coef(1);
  std::vector<Expr> flat;
  flat.reserve(factors.size());
  auto absorb = [&](const Expr& f) {
    if (f.is_const()) {
      coef *= f.value();
    } else {
      flat.push_back(f);
    }
  };
  for (const Expr& f : factors) {
    if (f.kind() == NodeKind::kProduct) {
      for (const Expr& inner : f.operands()) absorb(inner);
    } else {
      absorb(f);
    }
  }
  if (coef.is_zero()) return Expr::integer(0);

  Grouper<FactorGroup> groups;
  for (const Expr& f : flat) {
    const bool is_pow = f.kind() == NodeKind::kPower;
    const Expr& base = is_pow ? f.operands()[0] : f;
    const long k = is_pow ? f.exponent() : 1;
    bool fresh = false;
    FactorGroup& g = groups.slot(base, FactorGroup{0, f, 0}, fresh);
    g.exponent = checked_add(g.exponent, k);
    ++g.members;
  }

  std::vector<Expr> out;
  for (auto& [base, g] : groups.entries()) {
    if (g.exponent == 0) continue;
    Expr e = g.members == 1 ? g.original : make_power(base, g.exponent);
    if (e.is_const()) {
      coef *= e.value();
    } else if (e.kind() == NodeKind::kProduct) {
      for (const Expr& inner : e.operands()) {
        if (inner.is_const()) {
          coef *= inner.value();
        } else {
          out.push_back(inner);
        }
      }
    } else {
      out.push_back(std::move(e));
    }
  }
  if (coef.is_zero()) return Expr::integer(0);
  if (out.empty()) return Expr::constant(coef);
  if (out.size() == 1 && coef.is_one()) return out.front();
  if (out.size() == 1 && out.front().kind() == NodeKind::kSum) {
    // c*(a + b) -> c*a + c*b, so that u - u cancels for sums.
    std::vector<Expr> terms;
    terms.reserve(out.front().operands().size());
    for (const Expr& t : out.front().operands()) {
      terms.push_back(make_product({Expr::constant(coef), t}));
    }
    return make_sum(std::move(terms));
  }
  std::stable_sort(out.begin(), out.end(), canonical_less);
  if (!coef.is_one()) out.insert(out.begin(), Expr::constant(coef));
  return make_node(NodeKind::kProduct, std::move(out));
}

Expr make_power(const Expr& base, long exponent) {
  if (exponent == 0) return Expr::integer(1);
  if (exponent == 1) return base;
  switch (base.kind()) {
    case NodeKind::kConst:
      if (base.is_zero() && exponent < 0) return raw::power(base, exponent);
      return Expr::constant(base.value().pow(exponent));
    case NodeKind::kPower:
      return make_power(base.operands()[0], checked_mul(base.exponent(), exponent));
    case NodeKind::kProduct: {
      std::vector<Expr> parts;
      parts.reserve(base.operands().size());
      for (const Expr& f : base.operands()) parts.push_back(make_power(f, exponent));
      return make_product(std::move(parts));
    }
    default:
      return raw::power(base, exponent);
  }
}

Expr make_quotient(const Expr& numerator, const Expr& denominator) {
  if (denominator.is_zero()) return raw::quotient(numerator, denominator);
  return make_product({numerator, make_power(denominator, -1)});
}

Expr make_apply(Fn fn, const Expr& arg) {
  if (arg.is_const()) {
    const ComplexRational& v = arg.value();
    switch (fn) {
      case Fn::kExp:
        if (v.is_zero()) return Expr::integer(1);
        break;
      case Fn::kLog:
        if (v.is_one()) return Expr::integer(0);
        break;
      case Fn::kSin:
        if (v.is_zero()) return Expr::integer(0);
        break;
      case Fn::kCos:
        if (v.is_zero()) return Expr::integer(1);
        break;
      case Fn::kSqrt:
        if (v.is_zero() || v.is_one()) return arg;
        break;
    }
  }
  return raw::apply(fn, arg);
}

Expr make_negate(const Expr& arg) { return make_product({Expr::integer(-1), arg}); }

Expr operator+(const Expr& a, const Expr& b) { return make_sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return make_sum({a, make_negate(b)}); }
Expr operator*(const Expr& a, const Expr& b) { return make_product({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return make_quotient(a, b); }
Expr operator-(const Expr& a) { return make_negate(a); }

namespace {

template <typename Leaf>
Expr rebuild(const Expr& e, std::unordered_map<const detail::Node*, Expr>& memo,
             const Leaf& leaf) {
  if (auto it = memo.find(e.id()); it != memo.end()) return it->second;
  Expr result;
  auto rec = [&](const Expr& c) { return rebuild(c, memo, leaf); };
  switch (e.kind()) {
    case NodeKind::kConst:
    case NodeKind::kVar:
      result = leaf(e);
      break;
    case NodeKind::kSum:
    case NodeKind::kProduct: {
      std::vector<Expr> ops;
      ops.reserve(e.operands().size());
      for (const Expr& c : e.operands()) ops.push_back(rec(c));
      result = e.kind() == NodeKind::kSum ? make_sum(std::move(ops))
                                          : make_product(std::move(ops));
      break;
    }
    case NodeKind::kPower:
      result = make_power(rec(e.operands()[0]), e.exponent());
      break;
    case NodeKind::kQuotient:
      result = make_quotient(rec(e.operands()[0]), rec(e.operands()[1]));
      break;
    case NodeKind::kApply:
      result = make_apply(e.fn(), rec(e.operands()[0]));
      break;
    case NodeKind::kNegate:
      result = make_negate(rec(e.operands()[0]));
      break;
  }
  memo.emplace(e.id(), result);
  return result;
}

}  // namespace

Expr build(const Expr& e) {
  std::unordered_map<const detail::Node*, Expr> memo;
  return rebuild(e, memo, [](const Expr& leaf) { return leaf; });
}

Expr substitute(const Expr& e, const std::map<VarRef, Expr>& replacements) {
  std::unordered_map<const detail::Node*, Expr> memo;
  return rebuild(e, memo, [&](const Expr& leaf) {
    if (leaf.kind() == NodeKind::kVar) {
      if (auto it = replacements.find(leaf.var()); it != replacements.end()) {
        return it->second;
      }
    }
    return leaf;
  });
}

namespace {

template <typename Visit>
void for_each_node(const Expr& e, Visit&& visit) {
  std::unordered_set<const detail::Node*> seen;
  std::vector<Expr> stack{e};
  while (!stack.empty()) {
    Expr cur = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(cur.id()).second) continue;
    visit(cur);
    for (const Expr& c : cur.operands()) stack.push_back(c);
  }
}

}  // namespace

std::vector<VarRef> free_vars(const Expr& e) {
  std::set<VarRef> vars;
  for_each_node(e, [&](const Expr& n) {
    if (n.kind() == NodeKind::kVar) vars.insert(n.var());
  });
  return {vars.begin(), vars.end()};
}

bool contains_fn(const Expr& e, Fn fn) {
  bool found = false;
  for_each_node(e, [&](const Expr& n) {
    if (n.kind() == NodeKind::kApply && n.fn() == fn) found = true;
  });
  return found;
}

bool is_polynomial(const Expr& e) {
  auto has_jet_var = [](const Expr& sub) {
    for (const VarRef& v : free_vars(sub)) {
      if (!v.is_param()) return true;
    }
    return false;
  };
  bool ok = true;
  for_each_node(e, [&](const Expr& n) {
    if (!ok) return;
    switch (n.kind()) {
      case NodeKind::kApply:
        ok = false;
        break;
      case NodeKind::kConst:
        ok = n.value().is_real();
        break;
      case NodeKind::kPower:
        if (n.exponent() < 0 && has_jet_var(n.operands()[0])) ok = false;
        break;
      case NodeKind::kQuotient:
        if (has_jet_var(n.operands()[1])) ok = false;
        break;
      default:
        break;
    }
  });
  return ok;
}

std::size_t dag_size(const Expr& e) {
  std::size_t count = 0;
  for_each_node(e, [&](const Expr&) { ++count; });
  return count;
}

std::uint64_t tree_size(const Expr& e) {
  std::unordered_map<const detail::Node*, std::uint64_t> memo;
  std::function<std::uint64_t(const Expr&)> rec = [&](const Expr& n) -> std::uint64_t {
    if (auto it = memo.find(n.id()); it != memo.end()) return it->second;
    std::uint64_t total = 1;
    for (const Expr& c : n.operands()) {
      const std::uint64_t s = rec(c);
      total = (std::numeric_limits<std::uint64_t>::max() - total < s)
                  ? std::numeric_limits<std::uint64_t>::max()
                  : total + s;
    }
    memo.emplace(n.id(), total);
    return total;
  };
  return rec(e);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

struct OutputLimitReached {};

class Printer {
 public:
  explicit Printer(std::size_t limit) : limit_(limit) {}

  void put(std::string_view s) {
    out_.append(s);
    if (out_.size() > limit_) throw OutputLimitReached{};
  }

  // Binding strength of the printed form: 1 sum, 2 product/quotient,
  // 3 unary minus, 4 power, 5 atom.
  static int precedence(const Expr& e) {
    switch (e.kind()) {
      case NodeKind::kConst: {
        const ComplexRational& v = e.value();
        if (v.is_real()) {
          if (sgn(v.re()) < 0) return 3;
          return v.re().get_den() == 1 ? 5 : 2;
        }
        return sgn(v.re()) == 0 && abs(v.im()) != 1 ? 2 : 5;
      }
      case NodeKind::kVar:
      case NodeKind::kApply:
        return 5;
      case NodeKind::kSum:
        return 1;
      case NodeKind::kProduct:
      case NodeKind::kQuotient:
        return 2;
      case NodeKind::kPower:
        return e.exponent() > 0 ? 4 : 2;
      case NodeKind::kNegate:
        return 3;
    }
    return 5;
  }

  void print(const Expr& e, int min_prec) {
    const bool parens = precedence(e) < min_prec;
    if (parens) put("(");
    print_bare(e);
    if (parens) put(")");
  }

  std::string take() { return std::move(out_); }
  std::string& buffer() { return out_; }

 private:
  static bool negative_real(const Expr& e) {
    return e.is_const() && e.value().is_real() && sgn(e.value().re()) < 0;
  }

  void print_bare(const Expr& e) {
    switch (e.kind()) {
      case NodeKind::kConst:
        put(e.value().to_string());
        return;
      case NodeKind::kVar:
        put(e.var().to_string());
        return;
      case NodeKind::kSum:
        print_sum(e);
        return;
      case NodeKind::kProduct:
        print_product(e);
        return;
      case NodeKind::kPower:
        if (e.exponent() > 0) {
          print(e.operands()[0], 5);
          put("^" + std::to_string(e.exponent()));
        } else {
          put("1/");
          print_power_abs(e);
        }
        return;
      case NodeKind::kQuotient:
        print(e.operands()[0], 2);
        put("/");
        print(e.operands()[1], 3);
        return;
      case NodeKind::kApply:
        put(fn_name(e.fn()));
        put("(");
        print(e.operands()[0], 0);
        put(")");
        return;
      case NodeKind::kNegate:
        put("-");
        print(e.operands()[0], 3);
        return;
    }
  }

  void print_power_abs(const Expr& p) {
    const long k = p.exponent() < 0 ? -p.exponent() : p.exponent();
    if (k == 1) {
      print(p.operands()[0], 3);
    } else {
      print(p.operands()[0], 5);
      put("^" + std::to_string(k));
    }
  }

  void print_sum(const Expr& e) {
    bool first = true;
    std::vector<Expr> ordered;
    for (const Expr& t : e.operands()) {
      if (!t.is_const()) ordered.push_back(t);
    }
    for (const Expr& t : e.operands()) {
      if (t.is_const()) ordered.push_back(t);
    }
    for (const Expr& t : ordered) {
      if (first) {
        print(t, 0);
        first = false;
        continue;
      }
      if (negative_real(t)) {
        put(" - ");
        print(Expr::constant(-t.value()), 2);
      } else if (t.kind() == NodeKind::kProduct && negative_real(t.operands()[0])) {
        put(" - ");
        print(make_negate(t), 2);
      } else {
        put(" + ");
        print(t, 2);
      }
    }
  }

  void print_product(const Expr& e) {
    std::vector<Expr> num;
    std::vector<Expr> den;
    std::optional<ComplexRational> coef;
    for (const Expr& f : e.operands()) {
      if (f.is_const()) {
        coef = f.value();
      } else if (f.kind() == NodeKind::kPower && f.exponent() < 0) {
        den.push_back(f);
      } else {
        num.push_back(f);
      }
    }
    bool wrote = false;
    if (coef) {
      if (coef->is_real() && coef->re() == -1 && !num.empty() &&
          num.front().kind() != NodeKind::kSum) {
        put("-");
      } else {
        print(Expr::constant(*coef), 2);
        wrote = true;
      }
    }
    for (const Expr& f : num) {
      if (wrote) put("*");
      print(f, 3);
      wrote = true;
    }
    if (!wrote) put("1");
    for (const Expr& f : den) {
      put("/");
      print_power_abs(f);
    }
  }

  std::string out_;
  std::size_t limit_;
};

}  // namespace

std::string to_string(const Expr& e) {
  Printer p(std::numeric_limits<std::size_t>::max());
  p.print(e, 0);
  return p.take();
}

namespace detail {

std::string to_string_limited(const Expr& e, std::size_t limit) {
  Printer p(limit);
  try {
    p.print(e, 0);
  } catch (const OutputLimitReached&) {
    std::string s = p.buffer().substr(0, limit);
    s += "...";
    return s;
  }
  return p.take();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Evaluation

namespace {

using Complex = std::complex<double>;

Complex ipow(Complex base, long exponent) {
  auto e = static_cast<unsigned long>(exponent < 0 ? -exponent : exponent);
  Complex result(1.0, 0.0);
  while (e != 0) {
    if (e & 1UL) result *= base;
    e >>= 1UL;
    if (e != 0) base *= base;
  }
  return exponent < 0 ? Complex(1.0, 0.0) / result : result;
}

struct Valued {
  Complex value;
  double scale;
};

class Evaluator {
 public:
  explicit Evaluator(EvalContext& ctx) : ctx_(ctx) {}

  Valued run(const Expr& e) {
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    Valued v = compute(e);
    if (!std::isfinite(v.value.real()) || !std::isfinite(v.value.imag())) {
      singular("non-finite value", e);
    }
    v.scale = std::max(v.scale, std::abs(v.value));
    ctx_.telemetry.max_abs = std::max(ctx_.telemetry.max_abs, std::abs(v.value));
    ++ctx_.telemetry.nodes;
    memo_.emplace(e.id(), v);
    return v;
  }

 private:
  [[noreturn]] static void singular(const std::string& what, const Expr& e) {
    throw EvalSingular(what, detail::to_string_limited(e, 160));
  }

  Valued compute(const Expr& e) {
    switch (e.kind()) {
      case NodeKind::kConst: {
        const Complex v = e.value().to_complex();
        return {v, std::abs(v)};
      }
      case NodeKind::kVar: {
        const auto& a = ctx_.assignment();
        auto it = a.find(e.var());
        if (it == a.end()) {
          throw std::invalid_argument("no value assigned to " + e.var().to_string());
        }
        return {it->second, std::abs(it->second)};
      }
      case NodeKind::kSum: {
        Valued acc{0.0, 0.0};
        for (const Expr& t : e.operands()) {
          const Valued v = run(t);
          acc.value += v.value;
          acc.scale += v.scale;
        }
        return acc;
      }
      case NodeKind::kProduct: {
        auto ops = e.operands();
        std::vector<Valued> vals;
        vals.reserve(ops.size());
        for (const Expr& f : ops) vals.push_back(run(f));
        // scale = sum_i S_i * prod_{j != i} |v_j|
        std::vector<double> suffix(vals.size() + 1, 1.0);
        for (std::size_t k = vals.size(); k-- > 0;) {
          suffix[k] = suffix[k + 1] * std::abs(vals[k].value);
        }
        Complex value(1.0, 0.0);
        double prefix = 1.0;
        double scale = 0.0;
        for (std::size_t k = 0; k < vals.size(); ++k) {
          scale += vals[k].scale * prefix * suffix[k + 1];
          prefix *= std::abs(vals[k].value);
          value *= vals[k].value;
        }
        return {value, scale};
      }
      case NodeKind::kPower: {
        const Valued b = run(e.operands()[0]);
        const long k = e.exponent();
        const double mag = std::abs(b.value);
        if (k < 0 && mag == 0.0) singular("zero raised to a negative power", e);
        const Complex v = ipow(b.value, k);
        const double dk = static_cast<double>(k < 0 ? -k : k);
        double scale = 0.0;
        if (mag > 0.0) {
          scale = dk * std::abs(v) / mag * b.scale;
        } else {
          scale = std::pow(b.scale, static_cast<double>(k));
        }
        return {v, scale};
      }
      case NodeKind::kQuotient: {
        const Valued n = run(e.operands()[0]);
        const Valued d = run(e.operands()[1]);
        const double dm = std::abs(d.value);
        if (dm == 0.0) singular("division by zero", e);
        return {n.value / d.value, n.scale / dm + std::abs(n.value) * d.scale / (dm * dm)};
      }
      case NodeKind::kApply: {
        const Valued u = run(e.operands()[0]);
        switch (e.fn()) {
          case Fn::kExp: {
            const Complex v = std::exp(u.value);
            return {v, std::abs(v) * std::max(1.0, u.scale)};
          }
          case Fn::kLog: {
            const double um = std::abs(u.value);
            if (um == 0.0) singular("log of zero", e);
            return {std::log(u.value), u.scale / um};
          }
          case Fn::kSin:
            return {std::sin(u.value), std::abs(std::cos(u.value)) * u.scale};
          case Fn::kCos:
            return {std::cos(u.value), std::abs(std::sin(u.value)) * u.scale};
          case Fn::kSqrt: {
            const Complex v = std::sqrt(u.value);
            const double vm = std::abs(v);
            return {v, vm > 0.0 ? u.scale / (2.0 * vm) : std::sqrt(u.scale)};
          }
        }
        break;
      }
      case NodeKind::kNegate: {
        const Valued u = run(e.operands()[0]);
        return {-u.value, u.scale};
      }
    }
    return {0.0, 0.0};
  }

  EvalContext& ctx_;
  std::unordered_map<const detail::Node*, Valued> memo_;
};

class ExactEvaluator {
 public:
  explicit ExactEvaluator(const std::map<VarRef, ComplexRational>& a) : assignment_(a) {}

  const ComplexRational& run(const Expr& e) {
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    ComplexRational v = compute(e);
    return memo_.emplace(e.id(), std::move(v)).first->second;
  }

 private:
  ComplexRational compute(const Expr& e) {
    switch (e.kind()) {
      case NodeKind::kConst:
        return e.value();
      case NodeKind::kVar: {
        auto it = assignment_.find(e.var());
        if (it == assignment_.end()) {
          throw std::invalid_argument("no value assigned to " + e.var().to_string());
        }
        return it->second;
      }
      case NodeKind::kSum: {
        ComplexRational acc;
        for (const Expr& t : e.operands()) acc += run(t);
        return acc;
      }
      case NodeKind::kProduct: {
        ComplexRational acc(1);
        for (const Expr& f : e.operands()) {
          acc *= run(f);
          if (acc.is_zero()) break;
        }
        return acc;
      }
      case NodeKind::kPower: {
        const ComplexRational& b = run(e.operands()[0]);
        if (b.is_zero() && e.exponent() < 0) {
          throw EvalSingular("zero raised to a negative power",
                             detail::to_string_limited(e, 160));
        }
        return b.pow(e.exponent());
      }
      case NodeKind::kQuotient: {
        const ComplexRational& d = run(e.operands()[1]);
        if (d.is_zero()) {
          throw EvalSingular("division by zero", detail::to_string_limited(e, 160));
        }
        return run(e.operands()[0]) / d;
      }
      case NodeKind::kApply:
        throw std::invalid_argument("exact evaluation of transcendental function " +
                                    std::string(fn_name(e.fn())));
      case NodeKind::kNegate:
        return -run(e.operands()[0]);
    }
    return {};
  }

  const std::map<VarRef, ComplexRational>& assignment_;
  std::unordered_map<const detail::Node*, ComplexRational> memo_;
};

}  // namespace

std::complex<double> eval(const Expr& e, EvalContext& ctx) {
  ctx.telemetry = {};
  Evaluator ev(ctx);
  const Valued v = ev.run(e);
  ctx.telemetry.scale = v.scale;
  return v.value;
}

ComplexRational eval_exact(const Expr& e, const std::map<VarRef, ComplexRational>& assignment) {
  ExactEvaluator ev(assignment);
  return ev.run(e);
}

}  // namespace straight
