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

// Expression grammar:
//
//   expr   := term (("+" | "-") term)*
//   term   := factor (("*" | "/") factor)*
//   factor := "-" factor | atom ("^" integer)*        ^ is right-associative
//   atom   := number | "i" | ident | fn "(" expr ")" | "(" expr ")"
//   fn     := "exp" | "log" | "sin" | "cos" | "sqrt"
//
// Reserved identifiers: x, y, dy, yK, dyK (K >= 1), i and the function names.
// Any other identifier is a parameter. y and dy mean y1 and dy1, and are only
// accepted for single equations. Exponents may carry a sign ("x^-2").
//
// Corpus files are line oriented; '#' starts a comment line:
//
//   system <name>
//     n <positive integer>
//     param <ident> generic | generic-nonzero | = <constant expr>
//     f<K> = <expr>                       exactly one per K = 1..n
//     conserved <expr>
//     expect straight | not-straight | unspecified
//     note <free text>
//   end

#ifndef STRAIGHT_PARSER_HPP_
#define STRAIGHT_PARSER_HPP_

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "straight/expr.hpp"
#include "straight/ode_system.hpp"

namespace straight {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column,
             std::vector<std::string> expected = {});

  int line() const { return line_; }
  int column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  int line_;
  int column_;
  std::vector<std::string> expected_;
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& message, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct ParseOptions {
  // Dimension of the owning system; y/dy aliases require n == 1. Indices are
  // not range-checked here (see validate_system).
  int n = 1;
  // Position of the text inside a larger file, for error locations.
  int line = 1;
  int column = 1;
};

Expr parse_expr(std::string_view text, const ParseOptions& options = {});

std::vector<CorpusEntry> parse_corpus(std::string_view text);

// Throws ValidationError if `sys` uses an index outside 1..n, an undeclared
// parameter, or a reserved parameter name.
void validate_system(const OdeSystem& sys, int line = 0);

}  // namespace straight

#endif  // STRAIGHT_PARSER_HPP_
