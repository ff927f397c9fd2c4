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

// Batch analysis of corpus entries and report serialization.

#ifndef STRAIGHT_CLI_ANALYSIS_HPP_
#define STRAIGHT_CLI_ANALYSIS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "straight/ode_system.hpp"
#include "straight/oracle.hpp"
#include "straight/torsion.hpp"

namespace straight::cli {

enum class MethodChoice { kAuto, kTresse, kFels, kQuartic };
enum class Classification { kStraight, kNotStraight, kInconclusive };
enum class Format { kText, kJson };

std::string_view to_string(MethodChoice m);
std::string_view to_string(Classification c);
std::optional<MethodChoice> parse_method(std::string_view s);

struct AnalysisOptions {
  OracleConfig oracle;
  MethodChoice method = MethodChoice::kAuto;
  int jobs = 0;  // 0 = hardware concurrency
  // Flip every expectation; exercises the mismatch path.
  bool expect_invert = false;
};

struct ConservedResult {
  std::string expr;
  Outcome outcome = Outcome::kInconclusive;
};

struct AnalysisRecord {
  std::string name;
  int n = 1;
  std::string method;
  Classification classification = Classification::kInconclusive;
  Expectation expected = Expectation::kUnspecified;
  std::optional<bool> match;  // unset without an expectation
  bool gating = true;
  std::optional<Witness> witness;
  std::optional<std::pair<int, int>> entry;
  std::string reason;
  bool branch_limited = false;
  bool exact_path = false;
  std::optional<Outcome> quartic;
  std::vector<ConservedResult> conserved;
  std::uint64_t seed = 0;
  int samples = 0;
  std::size_t dag_nodes = 0;
  std::uint64_t tree_nodes = 0;
  double wall_ms = 0.0;
  std::string error;  // set when the analysis itself failed
};

AnalysisRecord analyze_entry(const CorpusEntry& entry, const AnalysisOptions& options);

// Records come back in input order.
std::vector<AnalysisRecord> analyze_entries(const std::vector<CorpusEntry>& entries,
                                            const AnalysisOptions& options);

std::string report(const std::vector<AnalysisRecord>& records, Format format);

// 1 if any gating record mismatches its expectation, else 0.
int exit_code(const std::vector<AnalysisRecord>& records);

}  // namespace straight::cli

#endif  // STRAIGHT_CLI_ANALYSIS_HPP_
