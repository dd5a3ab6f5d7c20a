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

#include "switchboard/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <istream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "switchboard/error.hpp"

namespace switchboard {

using json = nlohmann::json;

double precision_at_1(std::span<const Selection> selections,
                      const GoldMap& gold) {
  if (selections.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& s : selections) {
    auto it = gold.find(s.query_id);
    if (it == gold.end()) {
      throw Error(ErrorCode::kNotFound, "no gold entry for query \"" + s.query_id + "\"");
    }
    if (s.agent_id && it->second.count(*s.agent_id)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(selections.size());
}

double individual_agent_baseline(std::span<const LabeledExample* const> examples,
                                 std::string_view agent_id,
                                 std::span<const std::string> known_agents) {
  if (std::find(known_agents.begin(), known_agents.end(), agent_id) ==
      known_agents.end()) {
    throw Error(ErrorCode::kNotFound, "unknown agent \"" + std::string(agent_id) + "\"");
  }
  if (examples.empty()) return 0.0;
  std::size_t hits = 0;
  for (const LabeledExample* example : examples) {
    if (example->gold_agents.count(std::string(agent_id))) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

std::map<std::string, double> per_domain_breakdown(
    std::span<const Selection> selections, const GoldMap& gold,
    const std::map<std::string, std::string>& domain_of) {
  std::map<std::string, std::vector<Selection>> grouped;
  for (const auto& s : selections) {
    auto it = domain_of.find(s.query_id);
    if (it == domain_of.end()) {
      throw Error(ErrorCode::kNotFound, "no domain for query \"" + s.query_id + "\"");
    }
    grouped[it->second].push_back(s);
  }
  std::map<std::string, double> out;
  for (const auto& [domain, group] : grouped) out[domain] = precision_at_1(group, gold);
  return out;
}

namespace {

struct EvalItem {
  const LabeledExample* example;
  std::set<std::string> gold;  // restricted to the agent pool
};

struct Pool {
  std::vector<std::string> agents;
  std::set<std::string> members;
};

Pool agent_pool(const Dataset& dataset, const EvalOptions& options) {
  Pool pool;
  if (options.agent_subset.empty()) {
    pool.agents = dataset.agent_ids();
  } else {
    for (const auto& raw : options.agent_subset) {
      const std::string id = normalize_id(raw);
      if (!dataset.find_agent(id)) {
        throw Error(ErrorCode::kNotFound, "agent subset names unknown agent \"" + id + "\"");
      }
      if (std::find(pool.agents.begin(), pool.agents.end(), id) == pool.agents.end()) {
        pool.agents.push_back(id);
      }
    }
  }
  pool.members.insert(pool.agents.begin(), pool.agents.end());
  return pool;
}

std::vector<EvalItem> eval_items(const Dataset& dataset, const Pool& pool,
                                 const EvalOptions& options) {
  std::vector<EvalItem> items;
  for (const auto& example : dataset.examples) {
    if (example.query.split != options.split) continue;
    EvalItem item{&example, {}};
    for (const auto& agent : example.gold_agents) {
      if (pool.members.count(agent)) item.gold.insert(agent);
    }
    if (options.require_gold && item.gold.empty()) continue;
    items.push_back(std::move(item));
  }
  return items;
}

// Runs `fn(i)` for every index on a fixed partition and rethrows the error of
// the lowest failing index, so failures do not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    run(0, n);
  } else {
    std::vector<std::thread> workers;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(n, t * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      workers.emplace_back(run, begin, end);
    }
    for (auto& w : workers) w.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

EvalReport aggregate(const Strategy& strategy, const Pool& pool,
                     const std::vector<EvalItem>& items,
                     const std::vector<Selection>& selections) {
  EvalReport report;
  report.strategy = std::string(strategy_name(strategy.kind));
  if (strategy.kind != StrategyKind::kQaExamples) {
    report.strategy += "/" + strategy.scorer.describe();
  }
  report.n_agents = pool.agents.size();
  report.agents = pool.agents;
  report.n_evaluated = items.size();

  GoldMap gold;
  std::map<std::string, std::string> domain_of;
  std::vector<const LabeledExample*> examples;
  std::vector<LabeledExample> restricted;
  restricted.reserve(items.size());
  for (const auto& item : items) {
    gold[item.example->query.id] = item.gold;
    domain_of[item.example->query.id] = item.example->query.domain;
    LabeledExample copy;
    copy.query = item.example->query;
    copy.gold_agents = item.gold;
    restricted.push_back(std::move(copy));
  }
  for (const auto& r : restricted) examples.push_back(&r);

  report.overall_precision_at_1 = precision_at_1(selections, gold);
  for (const auto& agent : pool.agents) {
    report.per_agent_selection_share[agent] = 0.0;
    report.individual_agent_baselines[agent] =
        individual_agent_baseline(examples, agent, pool.agents);
  }
  if (!selections.empty()) {
    std::map<std::string, std::size_t> counts;
    for (const auto& s : selections) {
      ++counts[s.agent_id ? *s.agent_id : std::string(kNoSelectionKey)];
    }
    for (const auto& [agent, count] : counts) {
      report.per_agent_selection_share[agent] =
          static_cast<double>(count) / static_cast<double>(selections.size());
    }
  }
  report.per_domain_accuracy = per_domain_breakdown(selections, gold, domain_of);
  for (const auto& item : items) ++report.per_domain_count[item.example->query.domain];
  return report;
}

}  // namespace

EvalRun run_eval(const Strategy& strategy, const Dataset& dataset,
                 const EvalOptions& options) {
  if (strategy.kind == StrategyKind::kQaExamples && !strategy.router_model) {
    throw Error(ErrorCode::kInvalidArgument, "qa-examples evaluation needs a trained router");
  }
  const Pool pool = agent_pool(dataset, options);
  const std::vector<EvalItem> items = eval_items(dataset, pool, options);

  std::vector<SkillSentences> skills;
  SimilarityFn similarity;
  if (strategy.kind == StrategyKind::kQaDescriptions) {
    std::vector<AgentProfile> profiles;
    for (const auto& id : pool.agents) profiles.push_back(*dataset.find_agent(id));
    skills = skills_from_profiles(profiles, strategy.description_mode);
    similarity = description_similarity(strategy.scorer, skills);
  }

  std::vector<Selection> selections(items.size());
  parallel_for(items.size(), options.threads, [&](std::size_t i) {
    const LabeledExample& example = *items[i].example;
    Selection& out = selections[i];
    out.query_id = example.query.id;
    switch (strategy.kind) {
      case StrategyKind::kQaExamples: {
        for (const auto& c : route_by_examples(*strategy.router_model, example.query.text)) {
          if (pool.members.count(c.agent_id)) {
            out.agent_id = c.agent_id;
            break;
          }
        }
        break;
      }
      case StrategyKind::kQaDescriptions: {
        const auto ranked = route_by_description(example.query.text, skills, similarity);
        if (!ranked.empty()) out.agent_id = ranked.front().agent_id;
        break;
      }
      case StrategyKind::kQr: {
        std::vector<Candidate> candidates;
        for (const auto& agent : pool.agents) {
          auto it = example.responses.find(agent);
          if (it == example.responses.end()) continue;
          const ResponseStatus status =
              classify_response(it->second.text, options.fallback_phrases);
          if (status == ResponseStatus::kFallback && strategy.filter_fallbacks) continue;
          candidates.push_back({agent, it->second.text});
        }
        const auto scores = score_candidates(strategy.scorer, example.query.text, candidates);
        out.agent_id = select_best(scores).selected_agent;
        break;
      }
    }
  });

  return {aggregate(strategy, pool, items, selections), std::move(selections)};
}

EvalRun run_eval_wire(const Strategy& strategy, const Dataset& dataset,
                      std::shared_ptr<AgentTransport> transport,
                      const AskOptions& ask_options, const EvalOptions& options) {
  if (strategy.kind == StrategyKind::kQaExamples && !strategy.router_model) {
    throw Error(ErrorCode::kInvalidArgument, "qa-examples evaluation needs a trained router");
  }
  const Pool pool = agent_pool(dataset, options);
  const std::vector<EvalItem> items = eval_items(dataset, pool, options);
  Registry registry;
  for (const auto& id : pool.agents) registry.add(*dataset.find_agent(id));

  std::vector<Selection> selections;
  selections.reserve(items.size());
  for (const auto& item : items) {
    const AskResult result =
        ask(item.example->query.text, strategy, registry, ask_options, transport);
    selections.push_back({item.example->query.id, result.selected_agent});
  }
  return {aggregate(strategy, pool, items, selections), std::move(selections)};
}

namespace {

std::string percent(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << value * 100.0;
  return out.str();
}

std::string pad(std::string text, std::size_t width) {
  if (text.size() < width) text.append(width - text.size(), ' ');
  return text;
}

}  // namespace

std::string format_report_table(const EvalReport& report) {
  const bool blank = report.n_evaluated == 0;
  auto metric = [&](double v) { return blank ? std::string("-") : percent(v); };
  std::ostringstream out;
  constexpr std::size_t kMethodWidth = 28;
  constexpr std::size_t kColWidth = 12;

  std::string accuracy_header = "Accuracy (n=" + std::to_string(report.n_agents) + ")";
  out << pad("Method", kMethodWidth) << pad(accuracy_header, 18);
  for (const auto& agent : report.agents) out << pad(agent, kColWidth);
  out << '\n';
  out << pad(report.strategy, kMethodWidth)
      << pad(metric(report.overall_precision_at_1), 18);
  for (const auto& agent : report.agents) {
    auto it = report.per_agent_selection_share.find(agent);
    out << pad(metric(it == report.per_agent_selection_share.end() ? 0.0 : it->second),
               kColWidth);
  }
  out << '\n';
  if (auto it = report.per_agent_selection_share.find(std::string(kNoSelectionKey));
      it != report.per_agent_selection_share.end() && it->second > 0.0) {
    out << "  no selection: " << metric(it->second) << '\n';
  }

  out << "\nIndividual agents\n";
  for (const auto& agent : report.agents) {
    auto it = report.individual_agent_baselines.find(agent);
    out << "  " << pad(agent, kMethodWidth - 2)
        << metric(it == report.individual_agent_baselines.end() ? 0.0 : it->second)
        << '\n';
  }

  out << "\nPer-domain accuracy\n";
  for (const auto& [domain, accuracy] : report.per_domain_accuracy) {
    auto count = report.per_domain_count.find(domain);
    out << "  " << pad(domain, kMethodWidth - 2) << pad(metric(accuracy), 10) << "n="
        << (count == report.per_domain_count.end() ? 0 : count->second) << '\n';
  }
  out << "\nn_evaluated=" << report.n_evaluated << '\n';
  return out.str();
}

std::string format_report_records(const EvalReport& report) {
  std::ostringstream out;
  auto emit = [&](const char* metric, const std::string& key, json value) {
    out << json{{"strategy", report.strategy},
                {"metric", metric},
                {"key", key},
                {"value", std::move(value)}}
               .dump()
        << '\n';
  };
  emit("n_agents", "", report.n_agents);
  emit("n_evaluated", "", report.n_evaluated);
  emit("precision_at_1", "overall", report.overall_precision_at_1);
  for (std::size_t i = 0; i < report.agents.size(); ++i) {
    emit("agent_column", report.agents[i], i);
  }
  for (const auto& [k, v] : report.per_agent_selection_share) emit("selection_share", k, v);
  for (const auto& [k, v] : report.per_domain_accuracy) emit("domain_accuracy", k, v);
  for (const auto& [k, v] : report.per_domain_count) emit("domain_count", k, v);
  for (const auto& [k, v] : report.individual_agent_baselines) emit("baseline", k, v);
  return out.str();
}

EvalReport parse_report_records(std::istream& in) {
  EvalReport report;
  std::map<std::size_t, std::string> columns;
  std::string line;
  std::size_t line_no = 0;
  bool seen_strategy = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json record = json::parse(line);
      const std::string strategy = record.at("strategy").get<std::string>();
      if (seen_strategy && strategy != report.strategy) {
        throw Error(ErrorCode::kParse, "records mix strategies");
      }
      report.strategy = strategy;
      seen_strategy = true;
      const std::string metric = record.at("metric").get<std::string>();
      const std::string key = record.at("key").get<std::string>();
      const json& value = record.at("value");
      if (metric == "n_agents") report.n_agents = value.get<std::size_t>();
      else if (metric == "n_evaluated") report.n_evaluated = value.get<std::size_t>();
      else if (metric == "precision_at_1") report.overall_precision_at_1 = value.get<double>();
      else if (metric == "agent_column") columns[value.get<std::size_t>()] = key;
      else if (metric == "selection_share") report.per_agent_selection_share[key] = value.get<double>();
      else if (metric == "domain_accuracy") report.per_domain_accuracy[key] = value.get<double>();
      else if (metric == "domain_count") report.per_domain_count[key] = value.get<std::size_t>();
      else if (metric == "baseline") report.individual_agent_baselines[key] = value.get<double>();
      else throw Error(ErrorCode::kParse, "unknown metric \"" + metric + "\"");
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse,
                  "report line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (auto& [index, agent] : columns) report.agents.push_back(std::move(agent));
  return report;
}

void emit_report(const EvalReport& report, ReportFormat format,
                 const std::string& path) {
  const std::string text = format == ReportFormat::kTable
                               ? format_report_table(report)
                               : format_report_records(report);
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write report to \"" + path + "\"");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed for \"" + path + "\"");
}

}  // namespace switchboard
