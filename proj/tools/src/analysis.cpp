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

#include "straight/cli/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace straight::cli {

std::string_view to_string(MethodChoice m) {
  switch (m) {
    case MethodChoice::kAuto:
      return "auto";
    case MethodChoice::kTresse:
      return "tresse";
    case MethodChoice::kFels:
      return "fels";
    case MethodChoice::kQuartic:
      return "quartic";
  }
  return "auto";
}

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::kStraight:
      return "straight";
    case Classification::kNotStraight:
      return "not-straight";
    case Classification::kInconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

std::optional<MethodChoice> parse_method(std::string_view s) {
  for (MethodChoice m : {MethodChoice::kAuto, MethodChoice::kTresse, MethodChoice::kFels,
                         MethodChoice::kQuartic}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

namespace {

Classification classify(const Verdict& v) {
  switch (v.outcome) {
    case Outcome::kZero:
      return Classification::kStraight;
    case Outcome::kNonZero:
      return Classification::kNotStraight;
    case Outcome::kInconclusive:
      break;
  }
  return Classification::kInconclusive;
}

Expectation invert(Expectation e) {
  switch (e) {
    case Expectation::kStraight:
      return Expectation::kNotStraight;
    case Expectation::kNotStraight:
      return Expectation::kStraight;
    case Expectation::kUnspecified:
      break;
  }
  return e;
}

TorsionReport run_method(const OdeSystem& sys, MethodChoice method, const OracleConfig& cfg) {
  switch (method) {
    case MethodChoice::kAuto:
      return is_straight(sys, cfg);
    case MethodChoice::kTresse:
      return tresse_torsion(sys, cfg);
    case MethodChoice::kFels:
      return fels_torsion(sys, cfg);
    case MethodChoice::kQuartic:
      return quartic_test(sys, cfg);
  }
  return is_straight(sys, cfg);
}

}  // namespace

AnalysisRecord analyze_entry(const CorpusEntry& entry, const AnalysisOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  AnalysisRecord rec;
  rec.name = entry.system.name;
  rec.n = entry.system.n;
  rec.expected = options.expect_invert ? invert(entry.expect) : entry.expect;
  rec.gating = entry.gating();
  rec.seed = options.oracle.seed;
  rec.samples = options.oracle.samples;
  try {
    const TorsionReport tr = run_method(entry.system, options.method, options.oracle);
    rec.method = std::string(to_string(tr.method));
    rec.classification = classify(tr.verdict);
    rec.witness = tr.verdict.witness;
    rec.entry = tr.verdict.entry;
    rec.reason = tr.verdict.reason;
    rec.branch_limited = tr.verdict.branch_limited;
    rec.exact_path = tr.verdict.exact_path;
    rec.dag_nodes = tr.telemetry.dag_nodes;
    rec.tree_nodes = tr.telemetry.tree_nodes;
    rec.quartic = tr.method == Method::kQuartic
                      ? tr.verdict.outcome
                      : quartic_test(entry.system, options.oracle).verdict.outcome;
    for (const Expr& g : entry.conserved) {
      rec.conserved.push_back(
          {to_string(g), check_conserved(entry.system, g, options.oracle).outcome});
    }
  } catch (const std::exception& e) {
    rec.method = std::string(to_string(options.method));
    rec.classification = Classification::kInconclusive;
    rec.error = e.what();
  }
  if (rec.expected != Expectation::kUnspecified) {
    const bool want_straight = rec.expected == Expectation::kStraight;
    bool ok = rec.classification == (want_straight ? Classification::kStraight
                                                   : Classification::kNotStraight);
    for (const ConservedResult& c : rec.conserved) ok = ok && c.outcome == Outcome::kZero;
    rec.match = ok;
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                    .count();
  return rec;
}

std::vector<AnalysisRecord> analyze_entries(const std::vector<CorpusEntry>& entries,
                                            const AnalysisOptions& options) {
  std::vector<AnalysisRecord> out(entries.size());
  int jobs = options.jobs > 0 ? options.jobs
                              : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(entries.size(), 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < entries.size(); k = next++) {
      out[k] = analyze_entry(entries[k], options);
    }
  };
  if (jobs <= 1) {
    worker();
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  pool.clear();
  return out;
}

namespace {

nlohmann::json complex_json(std::complex<double> z) { return {z.real(), z.imag()}; }

nlohmann::json to_json(const AnalysisRecord& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["n"] = r.n;
  j["method"] = r.method;
  j["classification"] = to_string(r.classification);
  j["expected"] = r.expected == Expectation::kUnspecified ? nlohmann::json(nullptr)
                                                          : nlohmann::json(to_string(r.expected));
  j["match"] = r.match ? nlohmann::json(*r.match) : nlohmann::json(nullptr);
  j["gating"] = r.gating;
  j["seed"] = r.seed;
  j["samples"] = r.samples;
  j["wall_ms"] = r.wall_ms;
  j["dag_nodes"] = r.dag_nodes;
  j["tree_nodes"] = r.tree_nodes;
  j["exact_path"] = r.exact_path;
  j["branch_limited"] = r.branch_limited;
  if (r.quartic) j["quartic"] = to_string(*r.quartic);
  if (r.witness) {
    nlohmann::json w = nlohmann::json::object();
    for (const auto& [var, z] : r.witness->point) w[var.to_string()] = complex_json(z);
    j["witness"] = std::move(w);
    j["witness_value"] = complex_json(r.witness->value);
    if (r.witness->exact_value) j["witness_exact"] = r.witness->exact_value->to_string();
  }
  if (r.entry) j["entry"] = {r.entry->first, r.entry->second};
  if (!r.conserved.empty()) {
    nlohmann::json cs = nlohmann::json::array();
    for (const ConservedResult& c : r.conserved) {
      cs.push_back({{"expr", c.expr}, {"outcome", to_string(c.outcome)}});
    }
    j["conserved"] = std::move(cs);
  }
  if (!r.reason.empty()) j["reason"] = r.reason;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

std::string match_cell(const AnalysisRecord& r) {
  if (!r.match) return "-";
  if (*r.match) return "ok";
  return r.gating ? "MISMATCH" : "mismatch (soft)";
}

std::string note_cell(const AnalysisRecord& r) {
  std::string note;
  auto add = [&](const std::string& s) {
    if (!note.empty()) note += "; ";
    note += s;
  };
  if (!r.gating) add("non-gating");
  if (r.branch_limited && r.classification == Classification::kStraight) add("branch-limited");
  if (r.entry && r.classification == Classification::kNotStraight) {
    add("entry (" + std::to_string(r.entry->first) + "," + std::to_string(r.entry->second) + ")");
  }
  for (const ConservedResult& c : r.conserved) {
    add("conserved " + std::string(to_string(c.outcome)));
  }
  if (!r.reason.empty()) add(r.reason);
  if (!r.error.empty()) add("error: " + r.error);
  return note;
}

std::string text_report(const std::vector<AnalysisRecord>& records) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"name", "n", "method", "classification", "expected", "match", "quartic", "ms",
                  "notes"});
  for (const AnalysisRecord& r : records) {
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.1f", r.wall_ms);
    rows.push_back({r.name, std::to_string(r.n), r.method, std::string(to_string(r.classification)),
                    r.expected == Expectation::kUnspecified ? "-"
                                                            : std::string(to_string(r.expected)),
                    match_cell(r), r.quartic ? std::string(to_string(*r.quartic)) : "-", ms,
                    note_cell(r)});
  }
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += row[c];
      if (c + 1 < row.size()) line += std::string(width[c] - row[c].size() + 2, ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  return out.str();
}

}  // namespace

std::string report(const std::vector<AnalysisRecord>& records, Format format) {
  if (format == Format::kText) return text_report(records);
  nlohmann::json arr = nlohmann::json::array();
  for (const AnalysisRecord& r : records) arr.push_back(to_json(r));
  return records.empty() ? "[]" : arr.dump(2);
}

int exit_code(const std::vector<AnalysisRecord>& records) {
  for (const AnalysisRecord& r : records) {
    if (r.gating && r.match && !*r.match) return 1;
  }
  return 0;
}

}  // namespace straight::cli
