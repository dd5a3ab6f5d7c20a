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

#include "switchboard/core_model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "switchboard/error.hpp"
#include "switchboard/qa_router.hpp"

namespace switchboard {

using json = nlohmann::json;

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kDuplicate: return "duplicate";
    case ErrorCode::kNotFound: return "not found";
    case ErrorCode::kOutOfRange: return "out of range";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kUnavailable: return "unavailable";
    case ErrorCode::kMalformedReply: return "malformed reply";
    case ErrorCode::kIo: return "i/o error";
  }
  return "unknown";
}

const char* split_name(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  throw Error(ErrorCode::kParse,
              "split must be \"train\" or \"test\", got \"" +
                  std::string(name) + "\"");
}

const char* status_name(ResponseStatus status) {
  switch (status) {
    case ResponseStatus::kAnswered: return "answered";
    case ResponseStatus::kFallback: return "fallback";
    case ResponseStatus::kTimeout: return "timeout";
    case ResponseStatus::kError: return "error";
  }
  return "error";
}

ResponseStatus parse_status(std::string_view name) {
  if (name == "answered") return ResponseStatus::kAnswered;
  if (name == "fallback") return ResponseStatus::kFallback;
  if (name == "timeout") return ResponseStatus::kTimeout;
  if (name == "error") return ResponseStatus::kError;
  throw Error(ErrorCode::kParse, "unknown status \"" + std::string(name) + "\"");
}

std::string trim(std::string_view text) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  return std::string(text.substr(begin, end - begin));
}

std::string normalize_id(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_hyphen = false;
  for (unsigned char c : raw) {
    if (std::isalnum(c) && c < 0x80) {
      if (pending_hyphen && !out.empty()) out.push_back('-');
      pending_hyphen = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    } else {
      pending_hyphen = true;
    }
  }
  if (out.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "id \"" + std::string(raw) + "\" has no ASCII alphanumerics");
  }
  return out;
}

std::string normalize_query_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c))
                           : static_cast<char>(c));
  }
  return out;
}

AgentProfile make_profile(std::string_view id, std::string_view display_name,
                          std::string_view description,
                          std::optional<std::string> endpoint) {
  AgentProfile profile;
  profile.id = normalize_id(id);
  profile.display_name =
      display_name.empty() ? std::string(id) : std::string(display_name);
  profile.description = std::string(description);
  profile.skill_sentences = split_description(description);
  profile.endpoint = std::move(endpoint);
  return profile;
}

void sort_ranked(std::vector<RankedCandidate>& ranked) {
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedCandidate& a, const RankedCandidate& b) {
                     // NaN sorts after every real score.
                     const bool a_nan = a.score != a.score;
                     const bool b_nan = b.score != b.score;
                     if (a_nan != b_nan) return b_nan;
                     if (!a_nan && a.score != b.score) return a.score > b.score;
                     return a.agent_id < b.agent_id;
                   });
}

const AgentProfile* Dataset::find_agent(std::string_view id) const {
  for (const auto& agent : agents) {
    if (agent.id == id) return &agent;
  }
  return nullptr;
}

std::vector<std::string> Dataset::agent_ids() const {
  std::vector<std::string> ids;
  ids.reserve(agents.size());
  for (const auto& agent : agents) ids.push_back(agent.id);
  return ids;
}

FallbackPhrases::FallbackPhrases()
    : phrases_{"Didn't get that!", "Out of scope!"} {}

FallbackPhrases::FallbackPhrases(std::vector<std::string> phrases)
    : phrases_(std::move(phrases)) {
  for (auto& phrase : phrases_) phrase = trim(phrase);
}

bool FallbackPhrases::matches(std::string_view text) const {
  const std::string trimmed = trim(text);
  return std::find(phrases_.begin(), phrases_.end(), trimmed) != phrases_.end();
}

ResponseStatus classify_response(std::string_view text,
                                 const FallbackPhrases& phrases) {
  if (trim(text).empty() || phrases.matches(text)) {
    return ResponseStatus::kFallback;
  }
  return ResponseStatus::kAnswered;
}

std::set<std::string> derive_gold(const std::map<std::string, int>& votes,
                                  int threshold) {
  std::set<std::string> gold;
  for (const auto& [agent, count] : votes) {
    if (count < 0 || count > kMaxVotes) {
      throw Error(ErrorCode::kOutOfRange,
                  "vote count " + std::to_string(count) + " for agent \"" +
                      agent + "\" outside [0, 5]");
    }
    if (count >= threshold) gold.insert(agent);
  }
  return gold;
}

namespace {

[[noreturn]] void fail_at(std::size_t line, ErrorCode code,
                          const std::string& what) {
  throw Error(code, "line " + std::to_string(line) + ": " + what);
}

const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    fail_at(line, ErrorCode::kParse, std::string("missing field \"") + key + "\"");
  }
  return *it;
}

std::string require_string(const json& obj, const char* key,
                           std::size_t line) {
  const json& value = require(obj, key, line);
  if (!value.is_string()) {
    fail_at(line, ErrorCode::kParse,
            std::string("field \"") + key + "\" must be a string");
  }
  return value.get<std::string>();
}

LabeledExample parse_record(const json& record, std::size_t line,
                            int vote_threshold) {
  if (!record.is_object()) fail_at(line, ErrorCode::kParse, "record is not an object");

  LabeledExample example;
  example.query.id = require_string(record, "id", line);
  if (example.query.id.empty()) fail_at(line, ErrorCode::kParse, "empty id");
  example.query.text = require_string(record, "text", line);
  if (trim(example.query.text).empty()) {
    fail_at(line, ErrorCode::kParse, "empty utterance text");
  }
  example.query.domain = require_string(record, "domain", line);
  try {
    example.query.split = parse_split(require_string(record, "split", line));
  } catch (const Error& e) {
    fail_at(line, e.code(), e.what());
  }

  const json& responses = require(record, "responses", line);
  if (!responses.is_array()) {
    fail_at(line, ErrorCode::kParse, "\"responses\" must be an array");
  }
  std::size_t with_votes = 0;
  std::map<std::string, int> votes;
  for (const json& item : responses) {
    if (!item.is_object()) fail_at(line, ErrorCode::kParse, "response is not an object");
    std::string agent;
    try {
      agent = normalize_id(require_string(item, "agent", line));
    } catch (const Error& e) {
      fail_at(line, e.code(), e.what());
    }
    RecordedResponse response;
    response.text = require_string(item, "text", line);
    if (auto it = item.find("votes"); it != item.end() && !it->is_null()) {
      if (!it->is_number_integer()) {
        fail_at(line, ErrorCode::kParse, "\"votes\" must be an integer");
      }
      const auto count = it->get<std::int64_t>();
      if (count < 0 || count > kMaxVotes) {
        fail_at(line, ErrorCode::kOutOfRange,
                "votes " + std::to_string(count) + " for agent \"" + agent +
                    "\" outside [0, 5]");
      }
      response.votes = static_cast<int>(count);
      votes[agent] = static_cast<int>(count);
      ++with_votes;
    }
    if (!example.responses.emplace(agent, std::move(response)).second) {
      fail_at(line, ErrorCode::kDuplicate,
              "agent \"" + agent + "\" responds twice");
    }
  }
  if (with_votes != 0 && with_votes != example.responses.size()) {
    fail_at(line, ErrorCode::kParse,
            "votes must be given for every response or for none");
  }

  std::optional<std::set<std::string>> listed_gold;
  if (auto it = record.find("gold"); it != record.end() && !it->is_null()) {
    if (!it->is_array()) fail_at(line, ErrorCode::kParse, "\"gold\" must be an array");
    listed_gold.emplace();
    for (const json& agent : *it) {
      if (!agent.is_string()) fail_at(line, ErrorCode::kParse, "gold entries must be strings");
      std::string id;
      try {
        id = normalize_id(agent.get<std::string>());
      } catch (const Error& e) {
        fail_at(line, e.code(), e.what());
      }
      if (!example.responses.count(id)) {
        fail_at(line, ErrorCode::kNotFound,
                "gold agent \"" + id + "\" has no response");
      }
      listed_gold->insert(id);
    }
  }

  if (with_votes > 0) {
    example.gold_agents = derive_gold(votes, vote_threshold);
    if (listed_gold && *listed_gold != example.gold_agents) {
      fail_at(line, ErrorCode::kParse,
              "\"gold\" disagrees with votes at threshold " +
                  std::to_string(vote_threshold));
    }
  } else if (listed_gold) {
    example.gold_agents = std::move(*listed_gold);
  }
  return example;
}

}  // namespace

Dataset parse_dataset(std::istream& in, int vote_threshold,
                      std::vector<AgentProfile> agents) {
  if (vote_threshold < 0 || vote_threshold > kMaxVotes + 1) {
    throw Error(ErrorCode::kOutOfRange,
                "vote threshold " + std::to_string(vote_threshold) +
                    " outside [0, 6]");
  }
  Dataset dataset;
  dataset.vote_threshold = vote_threshold;
  const bool infer_agents = agents.empty();
  dataset.agents = std::move(agents);

  std::unordered_set<std::string> known_agents;
  for (const auto& agent : dataset.agents) {
    if (!known_agents.insert(agent.id).second) {
      throw Error(ErrorCode::kDuplicate, "agent \"" + agent.id + "\" listed twice");
    }
  }
  std::unordered_set<std::string> seen_ids;

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    json record;
    try {
      record = json::parse(text);
    } catch (const json::parse_error& e) {
      fail_at(line, ErrorCode::kParse, std::string("malformed record: ") + e.what());
    }
    LabeledExample example = parse_record(record, line, vote_threshold);
    if (!seen_ids.insert(example.query.id).second) {
      fail_at(line, ErrorCode::kDuplicate,
              "duplicate query id \"" + example.query.id + "\"");
    }
    // Agents appear in the order the record lists them.
    for (const json& item : record["responses"]) {
      const std::string id = normalize_id(item["agent"].get<std::string>());
      if (known_agents.count(id)) continue;
      if (!infer_agents) {
        fail_at(line, ErrorCode::kNotFound, "unknown agent id \"" + id + "\"");
      }
      known_agents.insert(id);
      dataset.agents.push_back(make_profile(id, id, ""));
    }
    dataset.examples.push_back(std::move(example));
  }
  return dataset;
}

Dataset load_dataset(const std::string& path, int vote_threshold,
                     std::vector<AgentProfile> agents) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open dataset \"" + path + "\"");
  return parse_dataset(in, vote_threshold, std::move(agents));
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
  for (const auto& example : dataset.examples) {
    json record;
    record["id"] = example.query.id;
    record["text"] = example.query.text;
    record["domain"] = example.query.domain;
    record["split"] = split_name(example.query.split);
    json responses = json::array();
    bool has_votes = false;
    auto emit = [&](const std::string& agent, const RecordedResponse& r) {
      json item{{"agent", agent}, {"text", r.text}};
      if (r.votes) {
        item["votes"] = *r.votes;
        has_votes = true;
      }
      responses.push_back(std::move(item));
    };
    // Dataset agent order first so a reload infers the same agent order.
    for (const auto& agent : dataset.agents) {
      if (auto it = example.responses.find(agent.id);
          it != example.responses.end()) {
        emit(it->first, it->second);
      }
    }
    for (const auto& [agent, response] : example.responses) {
      if (!dataset.find_agent(agent)) emit(agent, response);
    }
    record["responses"] = std::move(responses);
    if (!has_votes) record["gold"] = example.gold_agents;
    out << record.dump() << '\n';
  }
}

std::vector<AgentProfile> parse_agent_profiles(std::istream& in) {
  std::vector<AgentProfile> agents;
  std::unordered_set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    json record;
    try {
      record = json::parse(text);
    } catch (const json::parse_error& e) {
      fail_at(line, ErrorCode::kParse, std::string("malformed profile: ") + e.what());
    }
    if (!record.is_object()) fail_at(line, ErrorCode::kParse, "profile is not an object");
    const std::string id = require_string(record, "id", line);
    std::string name = id;
    if (auto it = record.find("name"); it != record.end() && it->is_string()) {
      name = it->get<std::string>();
    }
    std::string description;
    if (auto it = record.find("description"); it != record.end() && it->is_string()) {
      description = it->get<std::string>();
    }
    std::optional<std::string> endpoint;
    if (auto it = record.find("endpoint"); it != record.end() && !it->is_null()) {
      if (!it->is_string()) fail_at(line, ErrorCode::kParse, "\"endpoint\" must be a string or null");
      endpoint = it->get<std::string>();
    }
    AgentProfile profile;
    try {
      profile = make_profile(id, name, description, endpoint);
    } catch (const Error& e) {
      fail_at(line, e.code(), e.what());
    }
    if (!seen.insert(profile.id).second) {
      fail_at(line, ErrorCode::kDuplicate, "duplicate agent id \"" + profile.id + "\"");
    }
    agents.push_back(std::move(profile));
  }
  return agents;
}

std::vector<AgentProfile> load_agent_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open agent file \"" + path + "\"");
  return parse_agent_profiles(in);
}

void write_agent_profiles(const std::vector<AgentProfile>& agents,
                          std::ostream& out) {
  for (const auto& agent : agents) {
    json record{{"id", agent.id},
                {"name", agent.display_name},
                {"description", agent.description}};
    record["endpoint"] = agent.endpoint ? json(*agent.endpoint) : json(nullptr);
    out << record.dump() << '\n';
  }
}

DatasetStats dataset_stats(const Dataset& dataset) {
  DatasetStats stats;
  stats.n_agents = dataset.agents.size();
  for (const auto& example : dataset.examples) {
    SplitCounts& split =
        example.query.split == Split::kTrain ? stats.train : stats.test;
    const bool has_gold = !example.gold_agents.empty();
    ++stats.total;
    ++split.total;
    ++split.per_domain[example.query.domain];
    if (has_gold) {
      ++stats.with_gold;
      ++split.with_gold;
    } else {
      ++stats.without_gold;
      ++split.without_gold;
    }
  }
  return stats;
}

std::vector<const LabeledExample*> select_examples(const Dataset& dataset,
                                                   Split split,
                                                   bool require_gold) {
  std::vector<const LabeledExample*> out;
  for (const auto& example : dataset.examples) {
    if (example.query.split != split) continue;
    if (require_gold && example.gold_agents.empty()) continue;
    out.push_back(&example);
  }
  return out;
}

}  // namespace switchboard
