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

// The gateway runtime: agent registry, concurrent fan-out with per-agent
// deadlines, strategy execution and the HTTP serving API.

#ifndef SWITCHBOARD_GATEWAY_HPP_
#define SWITCHBOARD_GATEWAY_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "switchboard/core_model.hpp"
#include "switchboard/qa_router.hpp"
#include "switchboard/qr_arbiter.hpp"
#include "switchboard/transport.hpp"

namespace switchboard {

inline constexpr std::string_view kApologyText = "No agent could answer that.";

struct FanoutConfig {
  int per_agent_timeout_ms = 2000;
  // 0 means unlimited.
  int max_parallelism = 0;
};

// Many concurrent readers, exclusive mutation. Registration order is the
// fan-out result order.
class Registry {
 public:
  void add(AgentProfile profile);
  bool remove(std::string_view id);
  std::vector<AgentProfile> snapshot() const;
  std::optional<AgentProfile> find(std::string_view id) const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::vector<AgentProfile> agents_;
};

// Dispatches to every agent concurrently and waits at most the per-agent
// timeout. Agents past the deadline are reported with status timeout.
std::vector<AgentResponse> fan_out(std::string_view query,
                                   std::span<const AgentProfile> agents,
                                   const FanoutConfig& config,
                                   std::shared_ptr<AgentTransport> transport);

enum class StrategyKind { kQaExamples, kQaDescriptions, kQr };

const char* strategy_name(StrategyKind kind);
// Accepts "qa-examples", "qa-descriptions", "qr" and underscore spellings.
std::optional<StrategyKind> parse_strategy(std::string_view name);

struct Strategy {
  StrategyKind kind = StrategyKind::kQr;
  ScorerHandle scorer;
  std::shared_ptr<const ExampleRouterModel> router_model;
  DescriptionMode description_mode = DescriptionMode::kSentences;
  // qr only: drop fallback responses before scoring.
  bool filter_fallbacks = false;
};

// Sentence similarity backed by a response scorer: BM25 and tfidf use the
// corpus of all given skill sentences; remote sends one request per agent
// with its sentences as candidates.
SimilarityFn description_similarity(const ScorerHandle& scorer,
                                    std::span<const SkillSentences> skills);

struct CandidateRecord {
  std::string agent_id;
  std::string text;
  ResponseStatus status = ResponseStatus::kAnswered;
  std::optional<double> score;
  std::int64_t latency_ms = 0;
};

struct AskResult {
  std::string query_text;
  StrategyKind strategy = StrategyKind::kQr;
  std::optional<std::string> selected_agent;
  std::string answer_text;
  // Set when answer_text is the gateway apology rather than an agent reply.
  bool apology = false;
  std::vector<CandidateRecord> candidates;
  // Routing ranking for qa strategies, scoring ranking for qr.
  std::vector<RankedCandidate> ranking;
  std::int64_t total_latency_ms = 0;
};

struct AskOptions {
  FanoutConfig fanout;
  FallbackPhrases fallback_phrases;
};

AskResult ask(std::string_view query, const Strategy& strategy,
              const Registry& registry, const AskOptions& options,
              std::shared_ptr<AgentTransport> transport);

std::string ask_result_to_json(const AskResult& result);
std::string profiles_to_json(std::span<const AgentProfile> agents);

struct GatewayConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string agents_path;
  std::string dataset_path;
  std::string router_model_path;
  // "http" dispatches to profile endpoints; "replay" serves the dataset
  // in process.
  std::string fleet_mode = "http";
  // Injected delay for the replay fleet, [min, max] ms.
  std::int64_t replay_latency_min_ms = 0;
  std::int64_t replay_latency_max_ms = 0;
  std::uint64_t replay_latency_seed = 0;
  int vote_threshold = kDefaultVoteThreshold;
  std::string default_scorer = "bm25";
  // Named scorer endpoints; "remote:<name>" resolves through this map.
  std::map<std::string, std::string> scorer_endpoints;
  FanoutConfig fanout;
  std::vector<std::string> fallback_phrases;
  bool filter_fallbacks = false;

  // Unknown keys are rejected so typos surface early.
  static GatewayConfig parse(std::string_view json_text);
  static GatewayConfig load_file(const std::string& path);
};

class GatewayServer {
 public:
  GatewayServer(GatewayConfig config, std::shared_ptr<AgentTransport> transport,
                std::vector<AgentProfile> agents,
                std::shared_ptr<const ExampleRouterModel> router_model);
  // Loads agents, router and transport as the config describes.
  static std::unique_ptr<GatewayServer> from_config(GatewayConfig config);
  ~GatewayServer();

  GatewayServer(const GatewayServer&) = delete;
  GatewayServer& operator=(const GatewayServer&) = delete;

  int start();
  void stop();
  void wait();
  int port() const;

  Registry& registry();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace switchboard

#endif  // SWITCHBOARD_GATEWAY_HPP_
