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

#include "switchboard/qr_arbiter.hpp"

#include <chrono>
#include <cmath>

#include <httplib.h>
#include <json.hpp>

#include "switchboard/error.hpp"
#include "switchboard/lexical.hpp"

namespace switchboard {

using json = nlohmann::json;

ScorerHandle ScorerHandle::bm25() {
  ScorerHandle h;
  h.kind = ScorerKind::kBm25;
  h.label = "bm25";
  return h;
}

ScorerHandle ScorerHandle::tfidf() {
  ScorerHandle h;
  h.kind = ScorerKind::kTfidfCosine;
  h.label = "tfidf";
  return h;
}

ScorerHandle ScorerHandle::remote(std::string endpoint, int timeout_ms) {
  if (endpoint.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "remote scorer needs an endpoint");
  }
  ScorerHandle h;
  h.kind = ScorerKind::kRemote;
  h.label = "remote:" + endpoint;
  h.remote_endpoint = std::move(endpoint);
  h.timeout_ms = timeout_ms;
  return h;
}

ScorerHandle ScorerHandle::custom_fn(std::string label, CustomScoreFn fn) {
  ScorerHandle h;
  h.kind = ScorerKind::kCustom;
  h.label = std::move(label);
  h.custom = std::move(fn);
  return h;
}

ScorerHandle ScorerHandle::parse(std::string_view spec, int timeout_ms) {
  if (spec == "bm25") return bm25();
  if (spec == "tfidf" || spec == "tfidf_cosine") return tfidf();
  constexpr std::string_view kRemotePrefix = "remote:";
  if (spec.substr(0, kRemotePrefix.size()) == kRemotePrefix) {
    return remote(std::string(spec.substr(kRemotePrefix.size())), timeout_ms);
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown scorer \"" + std::string(spec) +
                  "\" (expected bm25, tfidf or remote:<endpoint>)");
}

std::string ScorerHandle::describe() const {
  if (!label.empty()) return label;
  switch (kind) {
    case ScorerKind::kBm25: return "bm25";
    case ScorerKind::kTfidfCosine: return "tfidf";
    case ScorerKind::kRemote: return "remote:" + remote_endpoint.value_or("");
    case ScorerKind::kCustom: return "custom";
  }
  return "unknown";
}

namespace {

Bm25Index candidate_index(std::span<const Candidate> candidates) {
  std::vector<Bm25Index::Document> docs;
  docs.reserve(candidates.size());
  for (const auto& c : candidates) docs.emplace_back(c.agent_id, c.text);
  return Bm25Index(docs);
}

ScoredCandidates zip(std::span<const Candidate> candidates,
                     const std::vector<double>& scores) {
  ScoredCandidates out;
  out.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out.emplace_back(candidates[i].agent_id, scores[i]);
  }
  return out;
}

void check_scores(const std::vector<double>& scores, std::size_t expected,
                  const std::string& source) {
  if (scores.size() != expected) {
    throw Error(ErrorCode::kMalformedReply,
                source + " returned " + std::to_string(scores.size()) +
                    " scores for " + std::to_string(expected) + " candidates");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw Error(ErrorCode::kMalformedReply, source + " returned a non-finite score");
    }
  }
}

ScoredCandidates score_locally(ScorerKind kind, std::string_view query,
                               std::span<const Candidate> candidates) {
  const Bm25Index index = candidate_index(candidates);
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (const auto& c : candidates) {
    scores.push_back(kind == ScorerKind::kBm25
                         ? index.score(query, c.agent_id)
                         : tfidf_cosine(query, c.text, index));
  }
  return zip(candidates, scores);
}

}  // namespace

ScoredCandidates score_candidates(const ScorerHandle& scorer,
                                  std::string_view query,
                                  std::span<const Candidate> candidates) {
  if (candidates.empty()) return {};
  switch (scorer.kind) {
    case ScorerKind::kBm25:
    case ScorerKind::kTfidfCosine:
      return score_locally(scorer.kind, query, candidates);
    case ScorerKind::kCustom: {
      if (!scorer.custom) {
        throw Error(ErrorCode::kInvalidArgument, "custom scorer without a function");
      }
      std::vector<double> scores = scorer.custom(query, candidates);
      check_scores(scores, candidates.size(), "scorer " + scorer.describe());
      return zip(candidates, scores);
    }
    case ScorerKind::kRemote: {
      if (!scorer.remote_endpoint) {
        throw Error(ErrorCode::kInvalidArgument, "remote scorer without endpoint");
      }
      try {
        return zip(candidates, remote_score(*scorer.remote_endpoint, query,
                                            candidates, scorer.timeout_ms));
      } catch (const Error&) {
        if (scorer.on_failure != RemoteFailurePolicy::kFallbackBm25) throw;
        return score_locally(ScorerKind::kBm25, query, candidates);
      }
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown scorer kind");
}

ArbitrationResult select_best(const ScoredCandidates& scores) {
  ArbitrationResult result;
  result.ranked.reserve(scores.size());
  for (const auto& [agent, score] : scores) result.ranked.push_back({agent, score});
  sort_ranked(result.ranked);
  if (!result.ranked.empty()) result.selected_agent = result.ranked.front().agent_id;
  return result;
}

ArbitrationResult select_best(const ScoredCandidates& scores,
                              std::span<const Candidate> candidates) {
  ArbitrationResult result = select_best(scores);
  if (result.selected_agent) {
    for (const auto& c : candidates) {
      if (c.agent_id == *result.selected_agent) {
        result.selected_text = c.text;
        break;
      }
    }
  }
  return result;
}

Endpoint parse_endpoint(std::string_view locator,
                        std::string_view default_path) {
  std::string rest(locator);
  std::string scheme = "http://";
  if (auto pos = rest.find("://"); pos != std::string::npos) {
    scheme = rest.substr(0, pos + 3);
    rest = rest.substr(pos + 3);
    if (scheme != "http://") {
      throw Error(ErrorCode::kInvalidArgument,
                  "only http endpoints are supported: \"" + std::string(locator) + "\"");
    }
  }
  std::string path;
  if (auto slash = rest.find('/'); slash != std::string::npos) {
    path = rest.substr(slash);
    rest = rest.substr(0, slash);
  }
  if (rest.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "endpoint \"" + std::string(locator) + "\" has no host");
  }
  while (!path.empty() && path.back() == '/') path.pop_back();
  if (path.empty()) path = std::string(default_path);
  return {scheme + rest, path};
}

std::vector<double> remote_score(std::string_view endpoint,
                                 std::string_view query,
                                 std::span<const Candidate> candidates,
                                 int timeout_ms) {
  if (timeout_ms <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "timeout_ms must be positive");
  }
  const Endpoint target = parse_endpoint(endpoint, "/score");

  json body;
  body["query"] = std::string(query);
  body["candidates"] = json::array();
  for (const auto& c : candidates) {
    body["candidates"].push_back({{"id", c.agent_id}, {"text", c.text}});
  }

  httplib::Client client(target.scheme_host_port);
  const auto timeout = std::chrono::milliseconds(timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(target.path, body.dump(), "application/json");
  const auto elapsed = std::chrono::steady_clock::now() - started;
  const std::string where = std::string(endpoint);
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout || elapsed >= timeout) {
      throw Error(ErrorCode::kTimeout, "scorer " + where + " timed out after " +
                                           std::to_string(timeout_ms) + " ms");
    }
    throw Error(ErrorCode::kUnavailable,
                "scorer " + where + " unreachable: " + httplib::to_string(err));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kUnavailable, "scorer " + where + " replied HTTP " +
                                             std::to_string(res->status));
  }

  json reply;
  try {
    reply = json::parse(res->body);
  } catch (const json::exception&) {
    throw Error(ErrorCode::kMalformedReply, "scorer " + where + " sent invalid JSON");
  }
  auto it = reply.find("scores");
  if (!reply.is_object() || it == reply.end() || !it->is_array()) {
    throw Error(ErrorCode::kMalformedReply,
                "scorer " + where + " reply lacks a \"scores\" array");
  }
  std::vector<double> scores;
  scores.reserve(it->size());
  for (const auto& value : *it) {
    if (!value.is_number()) {
      throw Error(ErrorCode::kMalformedReply, "scorer " + where + " sent a non-numeric score");
    }
    scores.push_back(value.get<double>());
  }
  check_scores(scores, candidates.size(), "scorer " + where);
  return scores;
}

}  // namespace switchboard
