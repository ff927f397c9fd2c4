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
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <regex>

#include "straight/cli/analysis.hpp"
#include "straight/parser.hpp"
#include "support/test_support.hpp"

namespace straight::cli {
namespace {

using namespace straight::testing;
using nlohmann::json;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

// Runs the installed tool; stderr is discarded.
RunResult run_tool(const std::string& args) {
  const std::string cmd = std::string(STRAIGHT_TOOL) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string corpus(const std::string& name) { return std::string(STRAIGHT_CORPUS_DIR) + "/" + name; }

std::string strip_wall_ms(const std::string& text) {
  static const std::regex wall(R"("wall_ms": [-0-9.eE+]+)");
  return std::regex_replace(text, wall, "\"wall_ms\": 0");
}

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = std::string(STRAIGHT_BINARY_DIR) + "/" + name;
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

void check_golden(const std::string& name, const std::string& actual) {
  const std::string path = std::string(STRAIGHT_GOLDEN_DIR) + "/" + name;
  if (std::getenv("STRAIGHT_UPDATE_GOLDEN") != nullptr) {
    std::ofstream(path, std::ios::binary) << actual;
  }
  CHECK_MESSAGE(read_text(path) == actual, "golden mismatch: " << path);
}

TEST_CASE("report: schema") {
  AnalysisRecord r;
  r.name = "airy";
  r.method = "tresse";
  r.classification = Classification::kStraight;
  r.expected = Expectation::kStraight;
  r.match = true;
  r.samples = 32;
  const json j = json::parse(report({r}, Format::kJson));
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 1);
  for (const char* key :
       {"name", "n", "method", "classification", "expected", "match", "seed", "samples", "wall_ms"}) {
    CHECK_MESSAGE(j[0].contains(key), key);
  }
  CHECK(j[0]["classification"] == "straight");
  CHECK(j[0]["match"] == true);
}

TEST_CASE("report: empty input") {
  CHECK(report({}, Format::kJson) == "[]");
}

TEST_CASE("report: witness serialization") {
  AnalysisRecord r;
  r.name = "w";
  Witness w;
  w.point = {{VarRef::x(), cplx(0.5, -1.0)}, {VarRef::param("a"), cplx(2.0, 0.0)}};
  w.value = cplx(3.0, 4.0);
  r.witness = w;
  const json j = json::parse(report({r}, Format::kJson));
  CHECK(j[0]["witness"]["x"] == json::array({0.5, -1.0}));
  CHECK(j[0]["witness"]["a"] == json::array({2.0, 0.0}));
  CHECK(j[0]["witness_value"] == json::array({3.0, 4.0}));
  CHECK(j[0]["expected"].is_null());
  CHECK(j[0]["match"].is_null());
}

TEST_CASE("report: text rows are aligned") {
  AnalysisRecord a, b;
  a.name = "short";
  b.name = "a-much-longer-name";
  const std::string text = report({a, b}, Format::kText);
  std::istringstream in(text);
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  CHECK(header.find(" n ") == row1.find(" 1 "));
  CHECK(row1.find(" 1 ") == row2.find(" 1 "));
}

TEST_CASE("exit_code ignores non-gating mismatches") {
  AnalysisRecord soft;
  soft.match = false;
  soft.gating = false;
  CHECK(exit_code({soft}) == 0);
  AnalysisRecord hard;
  hard.match = false;
  CHECK(exit_code({soft, hard}) == 1);
  AnalysisRecord none;
  CHECK(exit_code({none}) == 0);
}

TEST_CASE("analyze_entries keeps input order under parallelism") {
  const auto entries = load_corpus("table2.notstraight");
  AnalysisOptions serial;
  serial.jobs = 1;
  AnalysisOptions parallel;
  parallel.jobs = 8;
  const auto a = analyze_entries(entries, serial);
  const auto b = analyze_entries(entries, parallel);
  REQUIRE(a.size() == entries.size());
  REQUIRE(b.size() == entries.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].name == entries[k].system.name);
    CHECK(b[k].name == entries[k].system.name);
  }
  CHECK(strip_wall_ms(report(a, Format::kJson)) == strip_wall_ms(report(b, Format::kJson)));
}

TEST_CASE("analyze_entry: method choice and conserved checks") {
  CorpusEntry e;
  e.system = {"cubic", 1, {parse_expr("6*y^2")}, {}};
  e.conserved = {parse_expr("dy^2 - 4*y^3")};
  e.expect = Expectation::kNotStraight;
  AnalysisOptions opts;
  const AnalysisRecord r = analyze_entry(e, opts);
  CHECK(r.classification == Classification::kNotStraight);
  CHECK(r.match == true);
  REQUIRE(r.conserved.size() == 1);
  CHECK(r.conserved.front().outcome == Outcome::kZero);
  CHECK(r.quartic == Outcome::kZero);

  e.conserved = {parse_expr("y")};
  CHECK(analyze_entry(e, opts).match == false);

  opts.method = MethodChoice::kQuartic;
  e.conserved.clear();
  const AnalysisRecord q = analyze_entry(e, opts);
  CHECK(q.method == "quartic");
  CHECK(q.classification == Classification::kStraight);

  opts.method = MethodChoice::kFels;
  CHECK(analyze_entry(e, opts).classification == Classification::kStraight);

  opts.method = MethodChoice::kTresse;
  e.system = {"two", 2, {Expr(), Expr()}, {}};
  const AnalysisRecord err = analyze_entry(e, opts);
  CHECK(err.classification == Classification::kInconclusive);
  CHECK_FALSE(err.error.empty());
}

TEST_CASE("cli: straight corpus classifies straight") {
  const RunResult r = run_tool("analyze --json " + corpus("table1.straight"));
  CHECK(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j.size() == 21);
  for (const auto& rec : j) CHECK(rec["classification"] == "straight");
}

TEST_CASE("cli: inline Painleve I is not straight") {
  const RunResult r = run_tool("analyze --json --rhs '6*y^2 + x'");
  CHECK(r.exit_code == 0);
  const json j = json::parse(r.out);
  REQUIRE(j.size() == 1);
  CHECK(j[0]["classification"] == "not-straight");
  CHECK(run_tool("analyze --rhs '6*y^2 + x' --expect not-straight").exit_code == 0);
  CHECK(run_tool("analyze --rhs '6*y^2 + x' --expect straight").exit_code == 1);
}

TEST_CASE("cli: inline systems with parameters") {
  CHECK(run_tool("analyze --rhs 'w^2*y1' --rhs 'w^2*y2' --expect straight").exit_code == 0);
  CHECK(run_tool("analyze --rhs 'w1^2*y1' --rhs 'w2^2*y2' --expect not-straight").exit_code == 0);
  CHECK(run_tool("analyze --rhs 'a*(1 - y^2)*dy - y' --param a=0 --expect straight").exit_code ==
        0);
  CHECK(run_tool("analyze --rhs 'a*y' --param a=bogus-policy").exit_code == 2);
}

TEST_CASE("cli: exit codes") {
  CHECK(run_tool("analyze " + corpus("table1.straight") + " --expect-invert").exit_code == 1);
  CHECK(run_tool("analyze " + corpus("duals")).exit_code == 0);
  const std::string bad_syntax = write_temp("bad_syntax.ode", "system s\n  n 1\n  f1 = (y\nend\n");
  CHECK(run_tool("analyze " + bad_syntax).exit_code == 2);
  const std::string bad_index = write_temp("bad_index.ode", "system s\n  n 1\n  f2 = y\nend\n");
  CHECK(run_tool("analyze " + bad_index).exit_code == 2);
  CHECK(run_tool("analyze").exit_code == 2);
  CHECK(run_tool("analyze --samples 0 --rhs x").exit_code == 2);
  CHECK(run_tool("analyze --method nope --rhs x").exit_code == 2);
  CHECK(run_tool("analyze --method tresse --rhs y1 --rhs y2").exit_code == 2);
  CHECK(run_tool("analyze /nonexistent/file").exit_code == 2);
  CHECK(run_tool("frobnicate").exit_code == 2);
}

TEST_CASE("cli: empty corpus gives an empty array") {
  const std::string empty = write_temp("empty.ode", "# nothing\n");
  const RunResult r = run_tool("analyze --json " + empty);
  CHECK(r.exit_code == 0);
  CHECK(r.out == "[]\n");
}

TEST_CASE("cli: json is reproducible except wall time") {
  const std::string args = "analyze --json --seed 17 --jobs 4 " + corpus("table2.notstraight") +
                           " " + corpus("duals") + " " + corpus("oscillators");
  const RunResult a = run_tool(args);
  const RunResult b = run_tool(args);
  CHECK(a.exit_code == 0);
  CHECK(strip_wall_ms(a.out) == strip_wall_ms(b.out));
  const RunResult serial = run_tool("analyze --json --seed 17 --jobs 1 " +
                                    corpus("table2.notstraight") + " " + corpus("duals") + " " +
                                    corpus("oscillators"));
  CHECK(strip_wall_ms(a.out) == strip_wall_ms(serial.out));
  const RunResult other_seed = run_tool("analyze --json --seed 18 " + corpus("table2.notstraight"));
  CHECK(strip_wall_ms(other_seed.out) != strip_wall_ms(a.out));
}

TEST_CASE("cli: golden reports") {
  check_golden("oscillators.json",
               strip_wall_ms(run_tool("analyze --json --jobs 1 " + corpus("oscillators")).out));
  check_golden("table2.degenerate.json",
               strip_wall_ms(run_tool("analyze --json " + corpus("table2.degenerate")).out));
  check_golden("painleve1.json",
               strip_wall_ms(run_tool("analyze --json --name painleve-1 --expect not-straight "
                                      "--rhs '6*y^2 + x' --seed 3")
                                 .out));
}

TEST_CASE("cli: text report") {
  const RunResult r = run_tool("analyze " + corpus("oscillators"));
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("oscillators-equal") != std::string::npos);
  CHECK(r.out.find("not-straight") != std::string::npos);
  CHECK(r.out.rfind("name", 0) == 0);
}

}  // namespace
}  // namespace straight::cli
