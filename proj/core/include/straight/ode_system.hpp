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

#ifndef STRAIGHT_ODE_SYSTEM_HPP_
#define STRAIGHT_ODE_SYSTEM_HPP_

#include <string>
#include <vector>

#include "straight/expr.hpp"
#include "straight/rational.hpp"

namespace straight {

enum class ParamPolicy { kGeneric, kGenericNonzero, kFixed };

struct ParamDecl {
  std::string name;
  ParamPolicy policy = ParamPolicy::kGeneric;
  ComplexRational value;  // kFixed only

  static ParamDecl generic(std::string n) { return {std::move(n), ParamPolicy::kGeneric, {}}; }
  static ParamDecl generic_nonzero(std::string n) {
    return {std::move(n), ParamPolicy::kGenericNonzero, {}};
  }
  static ParamDecl fixed(std::string n, ComplexRational v) {
    return {std::move(n), ParamPolicy::kFixed, std::move(v)};
  }
};

// d^2 y^I / dx^2 = rhs[I-1](x, y, dy), I = 1..n.
struct OdeSystem {
  std::string name;
  int n = 1;
  std::vector<Expr> rhs;
  std::vector<ParamDecl> params;

  const Expr& f(int i) const { return rhs.at(static_cast<std::size_t>(i - 1)); }
};

enum class Expectation { kStraight, kNotStraight, kUnspecified };

struct CorpusEntry {
  OdeSystem system;
  Expectation expect = Expectation::kUnspecified;
  std::vector<Expr> conserved;
  std::vector<std::string> notes;
  int line = 0;  // line of the `system` header

  // Entries noted `soft` or `transcription-uncertain` do not gate.
  bool gating() const;
};

std::string_view to_string(Expectation e);

}  // namespace straight

#endif  // STRAIGHT_ODE_SYSTEM_HPP_
