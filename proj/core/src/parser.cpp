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

#include "straight/parser.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace straight {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (k != 0) out += ", ";
    out += items[k];
  }
  return out;
}

}  // namespace

ParseError::ParseError(const std::string& message, int line, int column,
                       std::vector<std::string> expected)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " +
                         message +
                         (expected.empty() ? "" : " (expected " + join(expected) + ")")),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

bool CorpusEntry::gating() const {
  for (const std::string& note : notes) {
    if (note.rfind("soft", 0) == 0) return false;
    if (note.find("transcription-uncertain") != std::string::npos) return false;
  }
  return true;
}

std::string_view to_string(Expectation e) {
  switch (e) {
    case Expectation::kStraight:
      return "straight";
    case Expectation::kNotStraight:
      return "not-straight";
    case Expectation::kUnspecified:
      return "unspecified";
  }
  return "unspecified";
}

namespace {

enum class Tok { kNumber, kIdent, kPlus, kMinus, kStar, kSlash, kCaret, kLParen, kRParen, kEnd };

std::string describe(Tok t) {
  switch (t) {
    case Tok::kNumber:
      return "number";
    case Tok::kIdent:
      return "identifier";
    case Tok::kPlus:
      return "'+'";
    case Tok::kMinus:
      return "'-'";
    case Tok::kStar:
      return "'*'";
    case Tok::kSlash:
      return "'/'";
    case Tok::kCaret:
      return "'^'";
    case Tok::kLParen:
      return "'('";
    case Tok::kRParen:
      return "')'";
    case Tok::kEnd:
      return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  int column = 0;  // 0-based offset in the expression text
};

std::optional<Fn> function_named(std::string_view name) {
  if (name == "exp") return Fn::kExp;
  if (name == "log") return Fn::kLog;
  if (name == "sin") return Fn::kSin;
  if (name == "cos") return Fn::kCos;
  if (name == "sqrt") return Fn::kSqrt;
  return std::nullopt;
}

// Parses "y3"/"dy3"-style names; returns the index or 0.
int indexed_name(std::string_view name, std::string_view prefix) {
  if (name.size() <= prefix.size() || name.substr(0, prefix.size()) != prefix) return 0;
  std::string_view digits = name.substr(prefix.size());
  if (digits.front() == '0') return 0;
  int value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || value < 1) return 0;
  return value;
}

bool is_reserved(std::string_view name) {
  return name == "x" || name == "y" || name == "dy" || name == "i" ||
         function_named(name).has_value() || indexed_name(name, "y") > 0 ||
         indexed_name(name, "dy") > 0;
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run(const ParseOptions& opt) {
    std::vector<Token> out;
    while (true) {
      while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
      Token tok;
      tok.column = static_cast<int>(pos_);
      if (pos_ == text_.size()) {
        out.push_back(tok);
        return out;
      }
      const char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        tok.kind = Tok::kNumber;
        tok.text = number();
      } else if (std::isalpha(static_cast<unsigned char>(c))) {
        tok.kind = Tok::kIdent;
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                        text_[pos_] == '_')) {
          ++pos_;
        }
        tok.text = std::string(text_.substr(start, pos_ - start));
      } else {
        switch (c) {
          case '+':
            tok.kind = Tok::kPlus;
            break;
          case '-':
            tok.kind = Tok::kMinus;
            break;
          case '*':
            tok.kind = Tok::kStar;
            break;
          case '/':
            tok.kind = Tok::kSlash;
            break;
          case '^':
            tok.kind = Tok::kCaret;
            break;
          case '(':
            tok.kind = Tok::kLParen;
            break;
          case ')':
            tok.kind = Tok::kRParen;
            break;
          default:
            throw ParseError(std::string("unexpected character '") + c + "'", opt.line,
                             opt.column + static_cast<int>(pos_));
        }
        tok.text = std::string(1, c);
        ++pos_;
      }
      out.push_back(std::move(tok));
    }
  }

 private:
  bool digit_at(std::size_t p) const {
    return p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]));
  }

  std::string number() {
    const std::size_t start = pos_;
    while (digit_at(pos_)) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (digit_at(pos_)) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (digit_at(p)) {
        pos_ = p;
        while (digit_at(pos_)) ++pos_;
      }
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, const ParseOptions& opt)
      : tokens_(std::move(tokens)), opt_(opt) {}

  Expr parse() {
    Expr e = expr();
    expect(Tok::kEnd, {"operator", "end of input"});
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }
  bool accept(Tok t) {
    if (peek().kind != t) return false;
    ++pos_;
    return true;
  }

  [[noreturn]] void fail(const std::string& message, std::vector<std::string> expected) const {
    throw ParseError(message, opt_.line, opt_.column + peek().column, std::move(expected));
  }

  [[noreturn]] void fail_at(std::size_t token, const std::string& message) const {
    throw ParseError(message, opt_.line, opt_.column + tokens_[token].column);
  }

  void expect(Tok t, std::vector<std::string> expected) {
    if (!accept(t)) {
      fail("unexpected " + (peek().kind == Tok::kEnd ? describe(Tok::kEnd)
                                                     : "'" + peek().text + "'"),
           std::move(expected));
    }
  }

  Expr expr() {
    std::vector<Expr> terms{term()};
    while (true) {
      if (accept(Tok::kPlus)) {
        terms.push_back(term());
      } else if (accept(Tok::kMinus)) {
        terms.push_back(make_negate(term()));
      } else {
        break;
      }
    }
    return terms.size() == 1 ? terms.front() : make_sum(std::move(terms));
  }

  // All factors are combined at once so that a leading constant is not
  // distributed over a parenthesized sum before the remaining factors arrive.
  Expr term() {
    std::vector<Expr> factors{factor()};
    while (true) {
      if (accept(Tok::kStar)) {
        factors.push_back(factor());
      } else if (accept(Tok::kSlash)) {
        const std::size_t at = pos_;
        const Expr den = factor();
        if (den.is_zero()) fail_at(at, "division by zero");
        factors.push_back(make_power(den, -1));
      } else {
        return factors.size() == 1 ? factors.front() : make_product(std::move(factors));
      }
    }
  }

  Expr factor() {
    if (accept(Tok::kMinus)) return make_negate(factor());
    Expr base = atom();
    if (!accept(Tok::kCaret)) return base;
    const std::size_t at = pos_;
    const long k = exponent();
    if (base.is_zero() && k < 0) fail_at(at, "zero to a negative power");
    return make_power(base, k);
  }

  // Signed integer, optionally parenthesized, with right-associative chains.
  long exponent() {
    const bool paren = accept(Tok::kLParen);
    const bool negative = accept(Tok::kMinus);
    if (peek().kind != Tok::kNumber) fail("exponent must be an integer", {"integer"});
    const Token& tok = advance();
    long value = 0;
    auto [ptr, ec] =
        std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
    if (ec != std::errc() || ptr != tok.text.data() + tok.text.size()) {
      --pos_;
      fail("exponent must be an integer", {"integer"});
    }
    if (paren) expect(Tok::kRParen, {"')'"});
    if (accept(Tok::kCaret)) {
      const long inner = exponent();
      if (inner < 0) fail("negative exponent of an exponent", {"integer"});
      long acc = 1;
      for (long k = 0; k < inner; ++k) {
        if (__builtin_mul_overflow(acc, value, &acc)) fail("exponent overflow", {});
      }
      value = acc;
    }
    return negative ? -value : value;
  }

  Expr atom() {
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::kNumber: {
        advance();
        try {
          return Expr::constant(ComplexRational(rational_from_decimal(tok.text)));
        } catch (const std::invalid_argument& e) {
          --pos_;
          fail(e.what(), {"number"});
        }
      }
      case Tok::kLParen: {
        advance();
        Expr inner = expr();
        expect(Tok::kRParen, {"')'", "operator"});
        return inner;
      }
      case Tok::kIdent: {
        advance();
        if (auto fn = function_named(tok.text)) {
          expect(Tok::kLParen, {"'('"});
          Expr arg = expr();
          expect(Tok::kRParen, {"')'", "operator"});
          return make_apply(*fn, arg);
        }
        return identifier(tok);
      }
      default:
        fail("unexpected " + (tok.kind == Tok::kEnd ? describe(Tok::kEnd) : "'" + tok.text + "'"),
             {"number", "identifier", "'('", "'-'"});
    }
  }

  Expr identifier(const Token& tok) {
    const std::string& name = tok.text;
    if (name == "i") return Expr::constant(ComplexRational::imaginary_unit());
    if (name == "x") return Expr::variable(VarRef::x());
    if (name == "y" || name == "dy") {
      if (opt_.n != 1) {
        throw ValidationError("'" + name + "' is only an alias when n = 1; use " + name + "1..",
                              opt_.line);
      }
      return Expr::variable(name == "y" ? VarRef::y(1) : VarRef::ydot(1));
    }
    if (int k = indexed_name(name, "dy"); k > 0) return Expr::variable(VarRef::ydot(k));
    if (int k = indexed_name(name, "y"); k > 0) return Expr::variable(VarRef::y(k));
    return Expr::variable(VarRef::param(name));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  ParseOptions opt_;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_identifier(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

// Splits "keyword rest"; `rest_column` is the 1-based column where rest starts.
std::pair<std::string_view, std::string_view> split_keyword(std::string_view line,
                                                            int& rest_column) {
  const std::size_t lead = line.size() - line.substr(line.find_first_not_of(" \t")).size();
  std::string_view body = line.substr(lead);
  std::size_t end = 0;
  while (end < body.size() && !std::isspace(static_cast<unsigned char>(body[end])) &&
         body[end] != '=') {
    ++end;
  }
  std::string_view rest = body.substr(end);
  std::size_t skip = 0;
  while (skip < rest.size() && std::isspace(static_cast<unsigned char>(rest[skip]))) ++skip;
  rest_column = static_cast<int>(lead + end + skip) + 1;
  return {body.substr(0, end), trim(rest)};
}

struct PendingExpr {
  std::string text;
  int line = 0;
  int column = 0;
};

struct PendingSystem {
  std::string name;
  int line = 0;
  std::optional<int> n;
  int n_line = 0;
  std::vector<ParamDecl> params;
  std::map<int, PendingExpr> rhs;
  std::vector<PendingExpr> conserved;
  std::optional<Expectation> expect;
  std::vector<std::string> notes;
};

CorpusEntry finish(const PendingSystem& p) {
  if (!p.n) throw ValidationError("system '" + p.name + "' has no 'n' line", p.line);
  const int n = *p.n;
  CorpusEntry entry;
  entry.line = p.line;
  entry.system.name = p.name;
  entry.system.n = n;
  entry.system.params = p.params;
  for (const auto& [k, pending] : p.rhs) {
    if (k > n) {
      throw ValidationError("f" + std::to_string(k) + " given but n = " + std::to_string(n),
                            pending.line);
    }
  }
  for (int k = 1; k <= n; ++k) {
    auto it = p.rhs.find(k);
    if (it == p.rhs.end()) {
      throw ValidationError("system '" + p.name + "' is missing f" + std::to_string(k), p.line);
    }
    ParseOptions opt{n, it->second.line, it->second.column};
    Expr f = parse_expr(it->second.text, opt);
    OdeSystem probe{p.name, n, {f}, p.params};
    validate_system(probe, it->second.line);
    entry.system.rhs.push_back(std::move(f));
  }
  for (const PendingExpr& c : p.conserved) {
    ParseOptions opt{n, c.line, c.column};
    Expr g = parse_expr(c.text, opt);
    OdeSystem probe{p.name, n, {g}, p.params};
    validate_system(probe, c.line);
    entry.conserved.push_back(std::move(g));
  }
  entry.expect = p.expect.value_or(Expectation::kUnspecified);
  entry.notes = p.notes;
  return entry;
}

}  // namespace

Expr parse_expr(std::string_view text, const ParseOptions& options) {
  Lexer lexer(text);
  // Token columns are 0-based offsets; ParseOptions::column is 1-based.
  Parser parser(lexer.run(options), options);
  return parser.parse();
}

void validate_system(const OdeSystem& sys, int line) {
  if (sys.n < 1) throw ValidationError("n must be positive", line);
  std::set<std::string> declared;
  for (const ParamDecl& p : sys.params) {
    if (!valid_identifier(p.name) || is_reserved(p.name)) {
      throw ValidationError("'" + p.name + "' is not a valid parameter name", line);
    }
    if (!declared.insert(p.name).second) {
      throw ValidationError("parameter '" + p.name + "' declared twice", line);
    }
  }
  for (const Expr& f : sys.rhs) {
    for (const VarRef& v : free_vars(f)) {
      switch (v.kind) {
        case VarKind::kX:
          break;
        case VarKind::kY:
        case VarKind::kYDot:
          if (v.index < 1 || v.index > sys.n) {
            throw ValidationError("'" + v.to_string() + "' is out of range for n = " +
                                      std::to_string(sys.n),
                                  line);
          }
          break;
        case VarKind::kParam:
          if (!declared.contains(v.name)) {
            throw ValidationError("undeclared parameter '" + v.name + "'", line);
          }
          break;
      }
    }
  }
}

std::vector<CorpusEntry> parse_corpus(std::string_view text) {
  std::vector<CorpusEntry> entries;
  std::optional<PendingSystem> cur;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    std::string_view raw = text.substr(start, stop - start);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    start = stop + 1;
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') {
      if (stop == text.size()) break;
      continue;
    }
    int rest_col = 1;
    auto [keyword, rest] = split_keyword(raw, rest_col);

    if (!cur) {
      if (keyword != "system") {
        throw ParseError("expected 'system'", line_no, 1, {"'system'"});
      }
      if (rest.empty() || rest.find_first_of(" \t") != std::string_view::npos) {
        throw ParseError("system name must be a single token", line_no, rest_col, {"name"});
      }
      cur.emplace();
      cur->name = std::string(rest);
      cur->line = line_no;
    } else if (keyword == "end") {
      entries.push_back(finish(*cur));
      cur.reset();
    } else if (keyword == "n") {
      int n = 0;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), n);
      if (ec != std::errc() || ptr != rest.data() + rest.size() || n < 1) {
        throw ParseError("'n' needs a positive integer", line_no, rest_col,
                         {"positive integer"});
      }
      if (cur->n) throw ValidationError("duplicate 'n' line", line_no);
      cur->n = n;
      cur->n_line = line_no;
    } else if (keyword == "param") {
      int col = 1;
      std::string_view body = raw.substr(static_cast<std::size_t>(rest_col - 1));
      auto [name, spec] = split_keyword(body, col);
      const int spec_col = rest_col + col - 1;
      if (!valid_identifier(name)) {
        throw ParseError("bad parameter name", line_no, rest_col, {"identifier"});
      }
      if (is_reserved(name)) {
        throw ValidationError("parameter name '" + std::string(name) + "' is reserved", line_no);
      }
      if (spec == "generic") {
        cur->params.push_back(ParamDecl::generic(std::string(name)));
      } else if (spec == "generic-nonzero") {
        cur->params.push_back(ParamDecl::generic_nonzero(std::string(name)));
      } else if (!spec.empty() && spec.front() == '=') {
        std::string_view value_text = trim(spec.substr(1));
        const int value_col = spec_col + 1 +
                              static_cast<int>(spec.size() - 1 - value_text.size());
        Expr v = parse_expr(value_text, ParseOptions{1, line_no, value_col});
        if (!v.is_const()) {
          throw ValidationError("fixed value of '" + std::string(name) + "' is not a constant",
                                line_no);
        }
        cur->params.push_back(ParamDecl::fixed(std::string(name), v.value()));
      } else {
        throw ParseError("bad parameter policy", line_no, spec_col,
                         {"'generic'", "'generic-nonzero'", "'='"});
      }
    } else if (keyword.size() > 1 && keyword.front() == 'f' && indexed_name(keyword, "f") > 0) {
      const int k = indexed_name(keyword, "f");
      if (rest.empty() || rest.front() != '=') {
        throw ParseError("expected '=' after " + std::string(keyword), line_no, rest_col,
                         {"'='"});
      }
      if (cur->rhs.contains(k)) {
        throw ValidationError("duplicate " + std::string(keyword), line_no);
      }
      std::string_view body = rest.substr(1);
      const std::size_t ws = body.size() - trim(body).size();
      cur->rhs[k] = PendingExpr{std::string(trim(body)), line_no,
                                rest_col + 1 + static_cast<int>(ws)};
    } else if (keyword == "conserved") {
      cur->conserved.push_back(PendingExpr{std::string(rest), line_no, rest_col});
    } else if (keyword == "expect") {
      if (rest == "straight") {
        cur->expect = Expectation::kStraight;
      } else if (rest == "not-straight") {
        cur->expect = Expectation::kNotStraight;
      } else if (rest == "unspecified") {
        cur->expect = Expectation::kUnspecified;
      } else {
        throw ParseError("bad expectation", line_no, rest_col,
                         {"'straight'", "'not-straight'", "'unspecified'"});
      }
    } else if (keyword == "note") {
      cur->notes.emplace_back(rest);
    } else {
      throw ParseError("unknown keyword '" + std::string(keyword) + "'", line_no, 1,
                       {"'n'", "'param'", "'fK ='", "'conserved'", "'expect'", "'note'",
                        "'end'"});
    }
    if (stop == text.size()) break;
  }
  if (cur) throw ParseError("system '" + cur->name + "' is not closed", line_no, 1, {"'end'"});
  return entries;
}

}  // namespace straight
