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

#include "switchboard/gateway.hpp"

#include <algorithm>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "switchboard/error.hpp"
#include "switchboard/log.hpp"

namespace switchboard {

using json = nlohmann::json;

void Registry::add(AgentProfile profile) {
  profile.skill_sentences = split_description(profile.description);
  std::unique_lock lock(mutex_);
  for (const auto& existing : agents_) {
    if (existing.id == profile.id) {
      throw Error(ErrorCode::kDuplicate,
                  "agent \"" + profile.id + "\" is already registered");
    }
  }
  agents_.push_back(std::move(profile));
}

bool Registry::remove(std::string_view id) {
  std::unique_lock lock(mutex_);
  auto it = std::find_if(agents_.begin(), agents_.end(),
                         [&](const AgentProfile& a) { return a.id == id; });
  if (it == agents_.end()) return false;
  agents_.erase(it);
  return true;
}

std::vector<AgentProfile> Registry::snapshot() const {
  std::shared_lock lock(mutex_);
  return agents_;
}

std::optional<AgentProfile> Registry::find(std::string_view id) const {
  std::shared_lock lock(mutex_);
  for (const auto& agent : agents_) {
    if (agent.id == id) return agent;
  }
  return std::nullopt;
}

std::size_t Registry::size() const {
  std::shared_lock lock(mutex_);
  return agents_.size();
}

namespace {

// Shared between the caller and the dispatch threads, which may outlive the
// fan_out call when a transport overruns its deadline.
struct FanoutState {
  std::mutex mutex;
  std::condition_variable done_cv;
  std::condition_variable slot_cv;
  std::vector<std::optional<AgentResponse>> results;
  std::size_t completed = 0;
  int free_slots = 0;
  bool limited = false;
};

std::int64_t ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(b - a).count();
}

// Responses must satisfy: timeout => empty text, answered => non-empty text.
void normalize_response(AgentResponse& response) {
  if (response.status == ResponseStatus::kTimeout) response.text.clear();
  if (response.status == ResponseStatus::kAnswered && trim(response.text).empty()) {
    response.status = ResponseStatus::kFallback;
  }
}

}  // namespace

std::vector<AgentResponse> fan_out(std::string_view query,
                                   std::span<const AgentProfile> agents,
                                   const FanoutConfig& config,
                                   std::shared_ptr<AgentTransport> transport) {
  if (config.per_agent_timeout_ms <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "per-agent timeout must be positive");
  }
  if (!transport) throw Error(ErrorCode::kInvalidArgument, "no transport");

  const auto started = Clock::now();
  const auto deadline =
      started + std::chrono::milliseconds(config.per_agent_timeout_ms);
  auto state = std::make_shared<FanoutState>();
  state->results.resize(agents.size());
  state->limited = config.max_parallelism > 0;
  state->free_slots = config.max_parallelism;

  for (std::size_t i = 0; i < agents.size(); ++i) {
    std::thread([state, transport, agent = agents[i], q = std::string(query), i,
                 deadline] {
      if (state->limited) {
        std::unique_lock lock(state->mutex);
        if (!state->slot_cv.wait_until(lock, deadline,
                                       [&] { return state->free_slots > 0; })) {
          return;  // Reported as a timeout by the caller.
        }
        --state->free_slots;
      }
      AgentResponse response;
      try {
        response = transport->dispatch(agent, q, deadline);
      } catch (const std::exception& e) {
        log_warning("dispatch to " + agent.id + " failed: " + e.what());
        response = {agent.id, "", ResponseStatus::kError, 0};
      }
      response.agent_id = agent.id;
      std::lock_guard lock(state->mutex);
      state->results[i] = std::move(response);
      ++state->completed;
      if (state->limited) {
        ++state->free_slots;
        state->slot_cv.notify_one();
      }
      state->done_cv.notify_all();
    }).detach();
  }

  std::vector<AgentResponse> out;
  out.reserve(agents.size());
  std::unique_lock lock(state->mutex);
  state->done_cv.wait_until(lock, deadline, [&] {
    return state->completed == agents.size();
  });
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (state->results[i]) {
      out.push_back(*state->results[i]);
    } else {
      out.push_back({agents[i].id, "", ResponseStatus::kTimeout,
                     ms_between(started, Clock::now())});
    }
    normalize_response(out.back());
  }
  return out;
}

const char* strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kQaExamples: return "qa-examples";
    case StrategyKind::kQaDescriptions: return "qa-descriptions";
    case StrategyKind::kQr: return "qr";
  }
  return "qr";
}

std::optional<StrategyKind> parse_strategy(std::string_view name) {
  if (name == "qa-examples" || name == "qa_examples") return StrategyKind::kQaExamples;
  if (name == "qa-descriptions" || name == "qa_descriptions") {
    return StrategyKind::kQaDescriptions;
  }
  if (name == "qr") return StrategyKind::kQr;
  return std::nullopt;
}

SimilarityFn description_similarity(const ScorerHandle& scorer,
                                    std::span<const SkillSentences> skills) {
  switch (scorer.kind) {
    case ScorerKind::kBm25:
      return bm25_similarity(build_sentence_index(skills));
    case ScorerKind::kTfidfCosine:
      return tfidf_similarity(build_sentence_index(skills));
    case ScorerKind::kRemote:
    case ScorerKind::kCustom:
      return [scorer](std::string_view query, std::span<const std::string> texts) {
        std::vector<Candidate> candidates;
        candidates.reserve(texts.size());
        for (std::size_t i = 0; i < texts.size(); ++i) {
          candidates.push_back({"s" + std::to_string(i), texts[i]});
        }
        ScoredCandidates scored = score_candidates(scorer, query, candidates);
        std::vector<double> scores;
        scores.reserve(scored.size());
        for (const auto& [id, score] : scored) scores.push_back(score);
        return scores;
      };
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown scorer kind");
}

namespace {

CandidateRecord to_record(const AgentResponse& response) {
  return {response.agent_id, response.text, response.status, std::nullopt,
          response.latency_ms};
}

void finish_answer(AskResult& result, const AgentResponse* chosen) {
  if (chosen && chosen->status == ResponseStatus::kAnswered) {
    result.answer_text = chosen->text;
    result.apology = false;
  } else {
    result.answer_text = std::string(kApologyText);
    result.apology = true;
  }
}

void apply_fallback_phrases(AgentResponse& response,
                            const FallbackPhrases& phrases) {
  if (response.status == ResponseStatus::kAnswered &&
      phrases.matches(response.text)) {
    response.status = ResponseStatus::kFallback;
  }
}

}  // namespace

AskResult ask(std::string_view query, const Strategy& strategy,
              const Registry& registry, const AskOptions& options,
              std::shared_ptr<AgentTransport> transport) {
  const auto started = Clock::now();
  const std::vector<AgentProfile> agents = registry.snapshot();
  if (agents.empty()) throw Error(ErrorCode::kInvalidArgument, "registry is empty");

  AskResult result;
  result.query_text = std::string(query);
  result.strategy = strategy.kind;

  if (strategy.kind == StrategyKind::kQr) {
    std::vector<AgentResponse> responses =
        fan_out(query, agents, options.fanout, transport);
    std::vector<Candidate> candidates;
    for (auto& response : responses) {
      apply_fallback_phrases(response, options.fallback_phrases);
      const bool scorable =
          response.status == ResponseStatus::kAnswered ||
          (response.status == ResponseStatus::kFallback && !strategy.filter_fallbacks);
      if (scorable) candidates.push_back({response.agent_id, response.text});
      result.candidates.push_back(to_record(response));
    }
    const ScoredCandidates scores = score_candidates(strategy.scorer, query, candidates);
    for (const auto& [agent, score] : scores) {
      for (auto& record : result.candidates) {
        if (record.agent_id == agent) record.score = score;
      }
    }
    const ArbitrationResult arbitration = select_best(scores, candidates);
    result.ranking = arbitration.ranked;
    result.selected_agent = arbitration.selected_agent;
    const AgentResponse* chosen = nullptr;
    if (arbitration.selected_agent) {
      for (const auto& response : responses) {
        if (response.agent_id == *arbitration.selected_agent) chosen = &response;
      }
    }
    finish_answer(result, chosen);
  } else {
    std::vector<RankedCandidate> ranking;
    if (strategy.kind == StrategyKind::kQaExamples) {
      if (!strategy.router_model) {
        throw Error(ErrorCode::kInvalidArgument,
                    "qa-examples needs a trained router model");
      }
      std::set<std::string> registered;
      for (const auto& agent : agents) registered.insert(agent.id);
      for (auto& candidate : route_by_examples(*strategy.router_model, query)) {
        if (registered.count(candidate.agent_id)) ranking.push_back(std::move(candidate));
      }
      if (ranking.empty()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "router model knows none of the registered agents");
      }
    } else {
      const auto skills = skills_from_profiles(agents, strategy.description_mode);
      ranking = route_by_description(
          query, skills, description_similarity(strategy.scorer, skills));
    }
    result.ranking = ranking;
    result.selected_agent = ranking.front().agent_id;
    const AgentProfile* target = nullptr;
    for (const auto& agent : agents) {
      if (agent.id == *result.selected_agent) target = &agent;
    }
    std::vector<AgentResponse> responses =
        fan_out(query, std::span(target, 1), options.fanout, transport);
    apply_fallback_phrases(responses.front(), options.fallback_phrases);
    result.candidates.push_back(to_record(responses.front()));
    finish_answer(result, &responses.front());
  }

  result.total_latency_ms = ms_between(started, Clock::now());
  return result;
}

namespace {

json profile_json(const AgentProfile& agent) {
  json out{{"id", agent.id},
           {"name", agent.display_name},
           {"description", agent.description},
           {"skill_sentences", agent.skill_sentences}};
  out["endpoint"] = agent.endpoint ? json(*agent.endpoint) : json(nullptr);
  return out;
}

}  // namespace

std::string ask_result_to_json(const AskResult& result) {
  json out;
  out["query"] = result.query_text;
  out["strategy"] = strategy_name(result.strategy);
  out["selected_agent"] =
      result.selected_agent ? json(*result.selected_agent) : json(nullptr);
  out["answer"] = result.answer_text;
  out["apology"] = result.apology;
  out["candidates"] = json::array();
  for (const auto& c : result.candidates) {
    json item{{"agent", c.agent_id},
              {"text", c.text},
              {"status", status_name(c.status)},
              {"latency_ms", c.latency_ms}};
    item["score"] = c.score ? json(*c.score) : json(nullptr);
    out["candidates"].push_back(std::move(item));
  }
  out["ranking"] = json::array();
  for (const auto& r : result.ranking) {
    out["ranking"].push_back({{"agent", r.agent_id}, {"score", r.score}});
  }
  out["total_latency_ms"] = result.total_latency_ms;
  return out.dump();
}

std::string profiles_to_json(std::span<const AgentProfile> agents) {
  json out = json::array();
  for (const auto& agent : agents) out.push_back(profile_json(agent));
  return out.dump();
}

GatewayConfig GatewayConfig::parse(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kParse, "config must be an object");

  GatewayConfig config;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "host") config.host = value.get<std::string>();
      else if (key == "port") config.port = value.get<int>();
      else if (key == "agents") config.agents_path = value.get<std::string>();
      else if (key == "dataset") config.dataset_path = value.get<std::string>();
      else if (key == "router_model") config.router_model_path = value.get<std::string>();
      else if (key == "fleet_mode") config.fleet_mode = value.get<std::string>();
      else if (key == "vote_threshold") config.vote_threshold = value.get<int>();
      else if (key == "scorer") config.default_scorer = value.get<std::string>();
      else if (key == "scorer_endpoints") {
        config.scorer_endpoints = value.get<std::map<std::string, std::string>>();
      } else if (key == "timeout_ms") config.fanout.per_agent_timeout_ms = value.get<int>();
      else if (key == "max_parallelism") config.fanout.max_parallelism = value.get<int>();
      else if (key == "fallback_phrases") {
        config.fallback_phrases = value.get<std::vector<std::string>>();
      } else if (key == "filter_fallbacks") config.filter_fallbacks = value.get<bool>();
      else if (key == "replay_latency_ms") {
        const auto range = value.get<std::vector<std::int64_t>>();
        if (range.empty() || range.size() > 2) {
          throw Error(ErrorCode::kParse, "replay_latency_ms takes [ms] or [min, max]");
        }
        config.replay_latency_min_ms = range.front();
        config.replay_latency_max_ms = range.back();
      } else if (key == "replay_latency_seed") {
        config.replay_latency_seed = value.get<std::uint64_t>();
      } else {
        throw Error(ErrorCode::kParse, "config: unknown key \"" + key + "\"");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  if (config.fleet_mode != "http" && config.fleet_mode != "replay") {
    throw Error(ErrorCode::kParse, "config: fleet_mode must be \"http\" or \"replay\"");
  }
  if (config.fanout.per_agent_timeout_ms <= 0) {
    throw Error(ErrorCode::kParse, "config: timeout_ms must be positive");
  }
  return config;
}

GatewayConfig GatewayConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config \"" + path + "\"");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

}  // namespace switchboard
