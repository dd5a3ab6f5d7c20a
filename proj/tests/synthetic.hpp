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

// Synthetic corpus of three agents with disjoint vocabularies. Every query
// uses words of exactly one agent, so any sane router separates them.

#ifndef SWITCHBOARD_TESTS_SYNTHETIC_HPP_
#define SWITCHBOARD_TESTS_SYNTHETIC_HPP_

#include <random>
#include <string>
#include <vector>

#include "switchboard/core_model.hpp"

namespace sbtest {

struct SyntheticAgent {
  std::string id;
  std::string domain;
  std::vector<std::string> vocab;
  std::string description;
};

// Disjoint vocabularies; every vocabulary word appears in its agent's description.
inline std::vector<SyntheticAgent> synthetic_agents() {
  return {
      {"bank-agent",
       "finance",
       {"bank", "banking", "balance", "account", "deposit", "withdraw", "transfer",
        "savings", "checking", "loan", "credit", "statement"},
       "Checks your bank account balance and savings. Handles a deposit, a withdraw "
       "or a transfer between checking accounts. Explains banking loan and credit "
       "statement details."},
      {"music-agent",
       "music",
       {"music", "song", "play", "playlist", "album", "artist", "volume", "track",
        "shuffle", "guitar", "jazz", "radio"},
       "Plays any song, album or playlist and can play music by artist. Controls the "
       "volume and can shuffle a track. Finds jazz radio and guitar mixes."},
      {"weather-agent",
       "weather",
       {"weather", "rain", "forecast", "sunny", "temperature", "snow", "wind", "humid",
        "storm", "cloudy", "umbrella", "degrees"},
       "Gives the weather forecast with temperature in degrees. Warns about rain, "
       "snow, wind and storm alerts. Tells you if it is sunny, cloudy or humid and "
       "whether you need an umbrella."},
  };
}

// `per_agent` queries per agent; `split` sets the query split. Each query has
// its own agent as the only gold agent and recorded responses for every agent:
// the owner repeats the query words, the others fall back.
inline switchboard::Dataset synthetic_dataset(std::size_t per_agent, std::uint64_t seed,
                                              switchboard::Split split,
                                              const std::string& id_prefix = "s") {
  using namespace switchboard;
  const auto agents = synthetic_agents();
  std::mt19937_64 rng(seed);
  Dataset dataset;
  for (const auto& a : agents) {
    dataset.agents.push_back(make_profile(a.id, a.id, a.description));
  }
  std::size_t next = 0;
  for (std::size_t i = 0; i < per_agent; ++i) {
    for (const auto& owner : agents) {
      std::string text;
      const std::size_t len = 3 + rng() % 4;
      for (std::size_t w = 0; w < len; ++w) {
        if (!text.empty()) text += ' ';
        text += owner.vocab[rng() % owner.vocab.size()];
      }
      LabeledExample example;
      example.query = {id_prefix + std::to_string(next++), text, owner.domain, split};
      for (const auto& responder : agents) {
        const bool own = responder.id == owner.id;
        example.responses[responder.id] = {own ? "Sure: " + text : "Didn't get that!",
                                           own ? 5 : 0};
      }
      example.gold_agents = {owner.id};
      dataset.examples.push_back(std::move(example));
    }
  }
  return dataset;
}

}  // namespace sbtest

#endif  // SWITCHBOARD_TESTS_SYNTHETIC_HPP_
