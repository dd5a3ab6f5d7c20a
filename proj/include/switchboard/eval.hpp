/*
 * Copyright 2026 The Switchboard Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Offline and wire-path evaluation of routing strategies: precision@1 over
// examples with at least one gold agent, selection share per agent, accuracy
// per domain and the constant single-agent baselines.

#ifndef SWITCHBOARD_EVAL_HPP_
#define SWITCHBOARD_EVAL_HPP_

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "switchboard/core_model.hpp"
#include "switchboard/gateway.hpp"

namespace switchboard {

// Selection share key used for examples where nothing was selected.
inline constexpr std::string_view kNoSelectionKey = "(none)";

struct Selection {
  std::string query_id;
  std::optional<std::string> agent_id;
};

using GoldMap = std::map<std::string, std::set<std::string>>;

// Fraction of selections that hit the gold set; a missing selection is wrong.
// Throws kNotFound when a query id has no gold entry. Empty input gives 0.
double precision_at_1(std::span<const Selection> selections,
                      const GoldMap& gold);

// Fraction of examples whose gold set contains `agent_id`.
double individual_agent_baseline(std::span<const LabeledExample* const> examples,
                                 std::string_view agent_id,
                                 std::span<const std::string> known_agents);

std::map<std::string, double> per_domain_breakdown(
    std::span<const Selection> selections, const GoldMap& gold,
    const std::map<std::string, std::string>& domain_of);

struct EvalReport {
  std::string strategy;
  std::size_t n_agents = 0;
  std::size_t n_evaluated = 0;
  double overall_precision_at_1 = 0.0;
  // Column order for tables.
  std::vector<std::string> agents;
  std::map<std::string, double> per_agent_selection_share;
  std::map<std::string, double> per_domain_accuracy;
  std::map<std::string, std::size_t> per_domain_count;
  std::map<std::string, double> individual_agent_baselines;

  bool operator==(const EvalReport&) const = default;
};

struct EvalOptions {
  Split split = Split::kTest;
  // Evaluate only examples with at least one gold agent.
  bool require_gold = true;
  // Restrict the agent pool (e.g. the four largest agents). Gold sets are
  // intersected with it. Empty means every dataset agent.
  std::vector<std::string> agent_subset;
  FallbackPhrases fallback_phrases;
  // 0 picks hardware concurrency.
  unsigned threads = 0;
};

struct EvalRun {
  EvalReport report;
  std::vector<Selection> selections;
};

// Offline replay: candidates come straight from the recorded responses, no
// network. Scorer failures abort the run.
EvalRun run_eval(const Strategy& strategy, const Dataset& dataset,
                 const EvalOptions& options = {});

// Goes through ask() and the given transport for every example.
EvalRun run_eval_wire(const Strategy& strategy, const Dataset& dataset,
                      std::shared_ptr<AgentTransport> transport,
                      const AskOptions& ask_options,
                      const EvalOptions& options = {});

enum class ReportFormat { kTable, kRecords };

std::string format_report_table(const EvalReport& report);
// One {"strategy","metric","key","value"} record per line.
std::string format_report_records(const EvalReport& report);
EvalReport parse_report_records(std::istream& in);
void emit_report(const EvalReport& report, ReportFormat format,
                 const std::string& path);

}  // namespace switchboard

#endif  // SWITCHBOARD_EVAL_HPP_
