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

// straight analyze [FILE...] [--rhs EXPR...] [options]

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "straight/cli/analysis.hpp"
#include "straight/parser.hpp"

namespace {

constexpr int kExitUsage = 2;

struct Args {
  std::vector<std::string> files;
  std::vector<std::string> rhs;
  std::vector<std::string> params;
  std::vector<std::string> conserved;
  std::string name = "inline";
  std::string expect = "unspecified";
  std::uint64_t seed = 0;
  int samples = 32;
  double tol = 1e-9;
  bool json = false;
  std::string format = "text";
  int jobs = 0;
  std::string method = "auto";
  bool expect_invert = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

straight::ParamDecl parse_param(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("--param expects NAME=generic|generic-nonzero|VALUE, got '" +
                                spec + "'");
  }
  const std::string name = spec.substr(0, eq);
  const std::string value = spec.substr(eq + 1);
  if (value == "generic") return straight::ParamDecl::generic(name);
  if (value == "generic-nonzero") return straight::ParamDecl::generic_nonzero(name);
  const straight::Expr v = straight::parse_expr(value);
  if (!v.is_const()) throw std::invalid_argument("--param " + name + ": value must be constant");
  return straight::ParamDecl::fixed(name, v.value());
}

straight::CorpusEntry inline_entry(const Args& args) {
  straight::CorpusEntry entry;
  entry.system.name = args.name;
  entry.system.n = static_cast<int>(args.rhs.size());
  const straight::ParseOptions opts{entry.system.n, 1, 1};
  for (const std::string& r : args.rhs) entry.system.rhs.push_back(straight::parse_expr(r, opts));
  for (const std::string& g : args.conserved) {
    entry.conserved.push_back(straight::parse_expr(g, opts));
  }
  for (const std::string& p : args.params) entry.system.params.push_back(parse_param(p));
  std::set<std::string> declared;
  for (const auto& p : entry.system.params) declared.insert(p.name);
  std::vector<straight::Expr> all = entry.system.rhs;
  all.insert(all.end(), entry.conserved.begin(), entry.conserved.end());
  for (const straight::Expr& e : all) {
    for (const straight::VarRef& v : straight::free_vars(e)) {
      if (v.is_param() && declared.insert(v.name).second) {
        entry.system.params.push_back(straight::ParamDecl::generic(v.name));
      }
    }
  }
  straight::validate_system(entry.system, 1);
  if (args.expect == "straight") {
    entry.expect = straight::Expectation::kStraight;
  } else if (args.expect == "not-straight") {
    entry.expect = straight::Expectation::kNotStraight;
  }
  return entry;
}

int run(const Args& args) {
  namespace cli = straight::cli;
  cli::AnalysisOptions options;
  options.oracle.seed = args.seed;
  options.oracle.samples = args.samples;
  options.oracle.rel_tol = args.tol;
  options.oracle.noise_floor = std::min(options.oracle.noise_floor, args.tol * 1e-4);
  options.jobs = args.jobs;
  options.method = *cli::parse_method(args.method);
  options.expect_invert = args.expect_invert;
  try {
    options.oracle.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "straight: " << e.what() << '\n';
    return kExitUsage;
  }

  std::vector<straight::CorpusEntry> entries;
  std::string where = "<inline>";
  try {
    for (const std::string& path : args.files) {
      where = path;
      auto parsed = straight::parse_corpus(read_file(path));
      entries.insert(entries.end(), std::make_move_iterator(parsed.begin()),
                     std::make_move_iterator(parsed.end()));
    }
    where = "<inline>";
    if (!args.rhs.empty()) entries.push_back(inline_entry(args));
  } catch (const straight::ParseError& e) {
    std::cerr << where << ':' << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << where << ": error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (entries.empty() && args.files.empty()) {
    std::cerr << "straight: nothing to analyze (give a corpus file or --rhs)\n";
    return kExitUsage;
  }
  if (options.method == cli::MethodChoice::kTresse) {
    for (const auto& e : entries) {
      if (e.system.n != 1) {
        std::cerr << "straight: --method tresse needs n = 1, system '" << e.system.name
                  << "' has n = " << e.system.n << '\n';
        return kExitUsage;
      }
    }
  }

  const auto records = cli::analyze_entries(entries, options);
  const bool json = args.json || args.format == "json";
  std::cout << cli::report(records, json ? cli::Format::kJson : cli::Format::kText);
  if (json) std::cout << '\n';
  return cli::exit_code(records);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Torsion-based straightness checks for second order ODE systems", "straight"};
  app.require_subcommand(1);
  Args args;
  CLI::App* analyze = app.add_subcommand("analyze", "Analyze corpus files or an inline system");
  analyze->add_option("files", args.files, "Corpus files")->check(CLI::ExistingFile);
  analyze->add_option("--rhs", args.rhs, "Right-hand side f^K, once per equation");
  analyze->add_option("--param", args.params, "NAME=generic|generic-nonzero|VALUE");
  analyze->add_option("--conserved", args.conserved, "Candidate conserved quantity");
  analyze->add_option("--name", args.name, "Name of the inline system");
  analyze->add_option("--expect", args.expect, "Expectation for the inline system")
      ->check(CLI::IsMember({"straight", "not-straight", "unspecified"}));
  analyze->add_option("--seed", args.seed, "Oracle seed")->capture_default_str();
  analyze->add_option("--samples", args.samples, "Oracle samples")->capture_default_str();
  analyze->add_option("--tol", args.tol, "Oracle relative tolerance")->capture_default_str();
  analyze->add_flag("--json", args.json, "Emit JSON");
  analyze->add_option("--format", args.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  analyze->add_option("--jobs", args.jobs, "Parallel entries (0 = logical cores)")
      ->check(CLI::NonNegativeNumber);
  analyze->add_option("--method", args.method, "Torsion method")
      ->check(CLI::IsMember({"auto", "tresse", "fels", "quartic"}))
      ->capture_default_str();
  analyze->add_flag("--expect-invert", args.expect_invert, "Invert every expectation");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  return run(args);
}
