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

// Question-response pairing: score every returned response against the query
// and keep the best one.

#ifndef SWITCHBOARD_QR_ARBITER_HPP_
#define SWITCHBOARD_QR_ARBITER_HPP_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "switchboard/core_model.hpp"

namespace switchboard {

struct Candidate {
  std::string agent_id;
  std::string text;
};

using ScoredCandidates = std::vector<std::pair<std::string, double>>;

// In-process scoring hook. Used for evaluation stubs (oracle, constant) and
// for embedding scorers linked directly into a host program.
using CustomScoreFn = std::function<std::vector<double>(
    std::string_view query, std::span<const Candidate> candidates)>;

enum class ScorerKind { kBm25, kTfidfCosine, kRemote, kCustom };

enum class RemoteFailurePolicy { kError, kFallbackBm25 };

struct ScorerHandle {
  ScorerKind kind = ScorerKind::kBm25;
  std::optional<std::string> remote_endpoint;
  int timeout_ms = 2000;
  RemoteFailurePolicy on_failure = RemoteFailurePolicy::kError;
  CustomScoreFn custom;
  std::string label;

  static ScorerHandle bm25();
  static ScorerHandle tfidf();
  static ScorerHandle remote(std::string endpoint, int timeout_ms = 2000);
  static ScorerHandle custom_fn(std::string label, CustomScoreFn fn);

  // "bm25" | "tfidf" | "remote:<endpoint>"
  static ScorerHandle parse(std::string_view spec, int timeout_ms = 2000);
  std::string describe() const;
};

// BM25 builds a micro-index over just these candidate texts (doc id = agent
// id); tfidf uses the same micro-index for idf statistics.
ScoredCandidates score_candidates(const ScorerHandle& scorer,
                                  std::string_view query,
                                  std::span<const Candidate> candidates);

struct ArbitrationResult {
  std::vector<RankedCandidate> ranked;
  std::optional<std::string> selected_agent;
  std::optional<std::string> selected_text;
};

// Deterministic argmax with agent-id tie-break. NaN scores rank last.
ArbitrationResult select_best(const ScoredCandidates& scores);
ArbitrationResult select_best(const ScoredCandidates& scores,
                              std::span<const Candidate> candidates);

struct Endpoint {
  std::string scheme_host_port;  // e.g. "http://127.0.0.1:8090"
  std::string path;              // e.g. "/score", never empty
};

// Accepts "host:port", "http://host:port" and an optional path suffix.
Endpoint parse_endpoint(std::string_view locator,
                        std::string_view default_path);

// One request per query carrying every candidate:
//   {"query": "...", "candidates": [{"id": "...", "text": "..."}, ...]}
// Reply {"scores": [...]} must match the candidate count with finite values.
std::vector<double> remote_score(std::string_view endpoint,
                                 std::string_view query,
                                 std::span<const Candidate> candidates,
                                 int timeout_ms);

}  // namespace switchboard

#endif  // SWITCHBOARD_QR_ARBITER_HPP_
