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

#ifndef STRAIGHT_CALCULUS_HPP_
#define STRAIGHT_CALCULUS_HPP_

#include <span>

#include "straight/expr.hpp"
#include "straight/ode_system.hpp"

namespace straight {

// Exact symbolic partial derivative. Every other variable, parameters
// included, is held constant.
Expr partial(const Expr& e, const VarRef& v);

// partial(partial(e, vars[0]), vars[1]) ...
Expr nth_partial(const Expr& e, std::span<const VarRef> vars);

// Derivative along solutions of `sys`:
//   dg/dx = g_x + sum_I g_{y^I} dy^I + sum_I g_{dy^I} f^I.
Expr total_derivative(const Expr& g, const OdeSystem& sys);

}  // namespace straight

#endif  // STRAIGHT_CALCULUS_HPP_
