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

#include "straight/oracle.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace straight {

void OracleConfig::validate() const {
  if (samples <= 0) throw std::invalid_argument("samples must be positive");
  if (max_retries < 0) throw std::invalid_argument("max_retries must be non-negative");
  if (!(0.0 < r_min && r_min < r_max)) {
    throw std::invalid_argument("annulus needs 0 < r_min < r_max");
  }
  if (!(0.0 < noise_floor && noise_floor < rel_tol && rel_tol < 1.0)) {
    throw std::invalid_argument("tolerances need 0 < noise_floor < rel_tol < 1");
  }
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::kZero:
      return "zero";
    case Outcome::kNonZero:
      return "nonzero";
    case Outcome::kInconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

namespace {

constexpr long kRationalRange = 1000000;

struct Sampled {
  std::vector<VarRef> random;  // drawn per sample, in sorted order
  std::vector<std::pair<VarRef, ComplexRational>> fixed;
};

Sampled classify_vars(const Expr& e, std::span<const ParamDecl> params) {
  std::map<std::string, const ParamDecl*> by_name;
  for (const ParamDecl& p : params) by_name[p.name] = &p;
  Sampled out;
  for (const VarRef& v : free_vars(e)) {
    if (v.is_param()) {
      auto it = by_name.find(v.name);
      if (it != by_name.end() && it->second->policy == ParamPolicy::kFixed) {
        out.fixed.emplace_back(v, it->second->value);
        continue;
      }
    }
    out.random.push_back(v);
  }
  return out;
}

Verdict exact_path(const Expr& e, const Sampled& vars, const OracleConfig& cfg) {
  Verdict verdict;
  verdict.seed = cfg.seed;
  verdict.exact_path = true;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<long> pick(1, kRationalRange);

  std::map<VarRef, ComplexRational> point;
  for (const auto& [v, value] : vars.fixed) point[v] = value;

  for (int s = 0; s < cfg.samples; ++s) {
    bool valid = false;
    for (int attempt = 0; attempt <= cfg.max_retries && !valid; ++attempt) {
      for (const VarRef& v : vars.random) {
        const long p = pick(rng);
        const long q = pick(rng);
        Rational r(p, q);
        r.canonicalize();
        point[v] = ComplexRational(r);
      }
      ComplexRational value;
      try {
        value = eval_exact(e, point);
      } catch (const EvalSingular&) {
        continue;
      }
      valid = true;
      ++verdict.valid_samples;
      if (value.is_zero()) {
        ++verdict.samples_passed;
        continue;
      }
      Witness w;
      for (const auto& [var, coord] : point) {
        w.point.emplace_back(var, coord.to_complex());
        w.exact_point.emplace_back(var, coord);
      }
      w.value = value.to_complex();
      w.exact_value = value;
      w.scale = std::abs(w.value);
      verdict.outcome = Outcome::kNonZero;
      verdict.witness = std::move(w);
      return verdict;
    }
  }
  if (verdict.valid_samples * 2 < cfg.samples) {
    verdict.outcome = Outcome::kInconclusive;
    verdict.reason = "too few non-singular samples (" + std::to_string(verdict.valid_samples) +
                     " of " + std::to_string(cfg.samples) + ")";
    return verdict;
  }
  verdict.outcome = Outcome::kZero;
  return verdict;
}

Verdict numeric_path(const Expr& e, const Sampled& vars, const OracleConfig& cfg) {
  Verdict verdict;
  verdict.seed = cfg.seed;
  verdict.branch_limited = contains_fn(e, Fn::kSqrt) || contains_fn(e, Fn::kLog);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> radius2(cfg.r_min * cfg.r_min, cfg.r_max * cfg.r_max);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

  EvalContext ctx;
  for (const auto& [v, value] : vars.fixed) ctx.assign(v, value.to_complex());

  int zero_votes = 0;
  for (int s = 0; s < cfg.samples; ++s) {
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
      for (const VarRef& v : vars.random) {
        ctx.assign(v, std::polar(std::sqrt(radius2(rng)), angle(rng)));
      }
      std::complex<double> value;
      try {
        value = eval(e, ctx);
      } catch (const EvalSingular&) {
        continue;
      }
      ++verdict.valid_samples;
      const double mag = std::abs(value);
      const double scale = ctx.telemetry.scale;
      if (mag > cfg.rel_tol * scale) {
        Witness w;
        for (const auto& [var, coord] : ctx.assignment()) w.point.emplace_back(var, coord);
        w.value = value;
        w.scale = scale;
        verdict.outcome = Outcome::kNonZero;
        verdict.witness = std::move(w);
        return verdict;
      }
      ++verdict.samples_passed;
      if (mag <= cfg.noise_floor * scale) {
        ++zero_votes;
      } else {
        ++verdict.gray_samples;
      }
      break;
    }
  }
  if (verdict.valid_samples * 2 < cfg.samples) {
    verdict.outcome = Outcome::kInconclusive;
    verdict.reason = "too few non-singular samples (" + std::to_string(verdict.valid_samples) +
                     " of " + std::to_string(cfg.samples) + ")";
    return verdict;
  }
  if (verdict.gray_samples > 0 && zero_votes <= verdict.gray_samples) {
    verdict.outcome = Outcome::kInconclusive;
    verdict.reason = std::to_string(verdict.gray_samples) + " of " +
                     std::to_string(verdict.valid_samples) +
                     " samples between noise floor and tolerance";
    return verdict;
  }
  verdict.outcome = Outcome::kZero;
  return verdict;
}

}  // namespace

Verdict is_zero(const Expr& e, std::span<const ParamDecl> params, const OracleConfig& cfg) {
  cfg.validate();
  if (e.is_const()) {
    Verdict v;
    v.seed = cfg.seed;
    v.exact_path = true;
    if (e.value().is_zero()) {
      v.outcome = Outcome::kZero;
      v.samples_passed = v.valid_samples = cfg.samples;
    } else {
      v.outcome = Outcome::kNonZero;
      Witness w;
      w.value = e.value().to_complex();
      w.exact_value = e.value();
      w.scale = std::abs(w.value);
      v.witness = std::move(w);
    }
    return v;
  }
  const Sampled vars = classify_vars(e, params);
  bool exact = is_polynomial(e);
  for (const auto& [v, value] : vars.fixed) {
    if (!value.is_real()) exact = false;
  }
  return exact ? exact_path(e, vars, cfg) : numeric_path(e, vars, cfg);
}

Verdict is_zero_matrix(const std::vector<std::vector<Expr>>& entries,
                       std::span<const ParamDecl> params, const OracleConfig& cfg) {
  Verdict combined;
  combined.seed = cfg.seed;
  combined.outcome = Outcome::kZero;
  std::optional<Verdict> inconclusive;
  for (std::size_t r = 0; r < entries.size(); ++r) {
    for (std::size_t c = 0; c < entries[r].size(); ++c) {
      Verdict v = is_zero(entries[r][c], params, cfg);
      v.entry = std::make_pair(static_cast<int>(r) + 1, static_cast<int>(c) + 1);
      if (v.nonzero()) return v;
      if (v.outcome == Outcome::kInconclusive) {
        if (!inconclusive) inconclusive = v;
        continue;
      }
      combined.samples_passed += v.samples_passed;
      combined.valid_samples += v.valid_samples;
      combined.gray_samples += v.gray_samples;
      combined.branch_limited = combined.branch_limited || v.branch_limited;
    }
  }
  if (inconclusive) return *inconclusive;
  bool all_exact = true;
  for (const auto& row : entries) {
    for (const Expr& e : row) all_exact = all_exact && (e.is_const() || is_polynomial(e));
  }
  combined.exact_path = all_exact;
  return combined;
}

Verdict is_zero_list(std::span<const Expr> entries, std::span<const ParamDecl> params,
                     const OracleConfig& cfg) {
  std::vector<std::vector<Expr>> column;
  column.reserve(entries.size());
  for (const Expr& e : entries) column.push_back({e});
  return is_zero_matrix(column, params, cfg);
}

bool reverify_witness(const Expr& e, const Witness& w, const OracleConfig& cfg) {
  if (!w.exact_point.empty() || (e.is_const() && w.exact_value)) {
    std::map<VarRef, ComplexRational> point(w.exact_point.begin(), w.exact_point.end());
    try {
      return !eval_exact(e, point).is_zero();
    } catch (const EvalSingular&) {
      return false;
    }
  }
  EvalContext ctx({w.point.begin(), w.point.end()});
  try {
    const std::complex<double> value = eval(e, ctx);
    return std::abs(value) > cfg.rel_tol * ctx.telemetry.scale;
  } catch (const EvalSingular&) {
    return false;
  }
}

}  // namespace straight
