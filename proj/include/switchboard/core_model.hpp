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

// Domain types shared by every module: queries, agent profiles, labeled
// examples with crowd votes, and the dataset loader that derives gold sets.

#ifndef SWITCHBOARD_CORE_MODEL_HPP_
#define SWITCHBOARD_CORE_MODEL_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace switchboard {

inline constexpr int kMaxVotes = 5;
inline constexpr int kDefaultVoteThreshold = 3;

enum class Split { kTrain, kTest };

const char* split_name(Split split);
Split parse_split(std::string_view name);

struct Query {
  std::string id;
  std::string text;
  std::string domain;
  Split split = Split::kTrain;

  bool operator==(const Query&) const = default;
};

struct AgentProfile {
  std::string id;
  std::string display_name;
  std::string description;
  // Sentence split of `description`; filled by make_profile().
  std::vector<std::string> skill_sentences;
  std::optional<std::string> endpoint;

  bool operator==(const AgentProfile&) const = default;
};

// Builds a profile with a normalized id and derived skill sentences.
AgentProfile make_profile(std::string_view id, std::string_view display_name,
                          std::string_view description,
                          std::optional<std::string> endpoint = std::nullopt);

enum class ResponseStatus { kAnswered, kFallback, kTimeout, kError };

const char* status_name(ResponseStatus status);
ResponseStatus parse_status(std::string_view name);

struct AgentResponse {
  std::string agent_id;
  std::string text;
  ResponseStatus status = ResponseStatus::kAnswered;
  std::int64_t latency_ms = 0;

  bool operator==(const AgentResponse&) const = default;
};

struct RankedCandidate {
  std::string agent_id;
  double score = 0.0;

  bool operator==(const RankedCandidate&) const = default;
};

// Sorts by score descending; equal scores are ordered by agent id so the head
// is always the lexicographically smallest of the tied agents.
void sort_ranked(std::vector<RankedCandidate>& ranked);

struct RecordedResponse {
  std::string text;
  // Absent when the record only published gold labels.
  std::optional<int> votes;

  bool operator==(const RecordedResponse&) const = default;
};

struct LabeledExample {
  Query query;
  std::map<std::string, RecordedResponse> responses;
  std::set<std::string> gold_agents;

  bool operator==(const LabeledExample&) const = default;
};

struct Dataset {
  std::vector<LabeledExample> examples;
  std::vector<AgentProfile> agents;
  int vote_threshold = kDefaultVoteThreshold;

  bool operator==(const Dataset&) const = default;

  const AgentProfile* find_agent(std::string_view id) const;
  std::vector<std::string> agent_ids() const;
};

// Exact-match list of known non-answers. Matching trims surrounding
// whitespace and is otherwise case sensitive.
class FallbackPhrases {
 public:
  FallbackPhrases();
  explicit FallbackPhrases(std::vector<std::string> phrases);

  bool matches(std::string_view text) const;
  const std::vector<std::string>& phrases() const { return phrases_; }

 private:
  std::vector<std::string> phrases_;
};

// Status of a recorded response text: empty means the agent had nothing to
// say, which is treated as a fallback.
ResponseStatus classify_response(std::string_view text,
                                 const FallbackPhrases& phrases);

// Lowercase ASCII with runs of anything else collapsed into single hyphens.
std::string normalize_id(std::string_view raw);

// Lowercased with whitespace runs collapsed to one space, ends trimmed.
std::string normalize_query_text(std::string_view text);

std::string trim(std::string_view text);

std::set<std::string> derive_gold(const std::map<std::string, int>& votes,
                                  int threshold);

// Reads the line-delimited dataset. When `agents` is empty the agent list is
// inferred from responses in first-seen order; otherwise every referenced
// agent must be present in it.
Dataset load_dataset(const std::string& path,
                     int vote_threshold = kDefaultVoteThreshold,
                     std::vector<AgentProfile> agents = {});
Dataset parse_dataset(std::istream& in,
                      int vote_threshold = kDefaultVoteThreshold,
                      std::vector<AgentProfile> agents = {});
void write_dataset(const Dataset& dataset, std::ostream& out);

std::vector<AgentProfile> load_agent_profiles(const std::string& path);
std::vector<AgentProfile> parse_agent_profiles(std::istream& in);
void write_agent_profiles(const std::vector<AgentProfile>& agents,
                          std::ostream& out);

struct SplitCounts {
  std::size_t total = 0;
  std::size_t with_gold = 0;
  std::size_t without_gold = 0;
  std::map<std::string, std::size_t> per_domain;
};

struct DatasetStats {
  std::size_t total = 0;
  std::size_t with_gold = 0;
  std::size_t without_gold = 0;
  SplitCounts train;
  SplitCounts test;
  std::size_t n_agents = 0;
};

DatasetStats dataset_stats(const Dataset& dataset);

// Examples of one split, optionally restricted to those with a gold agent.
std::vector<const LabeledExample*> select_examples(const Dataset& dataset,
                                                   Split split,
                                                   bool require_gold);

}  // namespace switchboard

#endif  // SWITCHBOARD_CORE_MODEL_HPP_
