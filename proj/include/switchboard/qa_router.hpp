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

// Question-agent pairing: pick the agent before dispatching the query, either
// from a classifier trained on example queries or from the similarity between
// the query and each agent's published description.

#ifndef SWITCHBOARD_QA_ROUTER_HPP_
#define SWITCHBOARD_QA_ROUTER_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "switchboard/core_model.hpp"
#include "switchboard/lexical.hpp"

namespace switchboard {

// Splits after '.', '!' or '?' when followed by whitespace or end of text.
// Abbreviations such as "e.g. " are split too.
std::vector<std::string> split_description(std::string_view description);

struct SkillSentences {
  std::string agent_id;
  std::vector<std::string> sentences;
};

enum class DescriptionMode { kSentences, kWhole };

std::vector<SkillSentences> skills_from_profiles(
    std::span<const AgentProfile> agents,
    DescriptionMode mode = DescriptionMode::kSentences);

// Batch similarity: one score per sentence, same order.
using SimilarityFn = std::function<std::vector<double>(
    std::string_view query, std::span<const std::string> sentences)>;

// BM25 over the corpus of every skill sentence of every agent.
Bm25Index build_sentence_index(std::span<const SkillSentences> skills,
                               Bm25Params params = {});
SimilarityFn bm25_similarity(const Bm25Index& index);
SimilarityFn tfidf_similarity(const Bm25Index& index);

// Agent score = max over its sentences; agents without sentences score 0.
std::vector<RankedCandidate> route_by_description(
    std::string_view query, std::span<const SkillSentences> skills,
    const SimilarityFn& similarity);

struct RouterHyperparams {
  double learning_rate = 0.5;
  int epochs = 30;
  double l2 = 1e-6;
  int batch_size = 16;
  std::uint64_t seed = 42;

  bool operator==(const RouterHyperparams&) const = default;
};

inline constexpr std::size_t kDefaultFeatureDim = std::size_t{1} << 18;

// Signed-hashed unigram + bigram features, L2 normalized.
struct SparseFeatures {
  std::vector<std::uint32_t> index;
  std::vector<double> value;
};
SparseFeatures hash_features(std::string_view text, std::size_t feature_dim);

// One-vs-rest logistic model over hashed n-gram features.
class ExampleRouterModel {
 public:
  ExampleRouterModel() = default;
  ExampleRouterModel(std::vector<std::string> agents, std::size_t feature_dim,
                     RouterHyperparams hyper);

  const std::vector<std::string>& agents() const { return agents_; }
  std::size_t feature_dim() const { return feature_dim_; }
  const RouterHyperparams& hyperparams() const { return hyper_; }

  std::vector<double>& weights(std::size_t agent) { return weights_[agent]; }
  const std::vector<double>& weights(std::size_t agent) const {
    return weights_[agent];
  }
  double& bias(std::size_t agent) { return bias_[agent]; }
  double bias(std::size_t agent) const { return bias_[agent]; }

  double logit(std::size_t agent, const SparseFeatures& x) const;

  void save(std::ostream& out) const;
  static ExampleRouterModel load(std::istream& in);
  void save_file(const std::string& path) const;
  static ExampleRouterModel load_file(const std::string& path);

  bool operator==(const ExampleRouterModel&) const = default;

 private:
  std::vector<std::string> agents_;
  std::size_t feature_dim_ = 0;
  RouterHyperparams hyper_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> bias_;
};

struct RouterExample {
  std::string text;
  std::set<std::string> gold;
};

ExampleRouterModel train_example_router(
    std::span<const RouterExample> examples,
    std::span<const std::string> agents, const RouterHyperparams& hyper = {},
    std::size_t feature_dim = kDefaultFeatureDim);

// Probability per agent, sorted descending with id tie-break.
std::vector<RankedCandidate> route_by_examples(const ExampleRouterModel& model,
                                               std::string_view query);

// Training pairs drawn from one split of a dataset. Examples without any gold
// agent are kept as all-negative rows.
std::vector<RouterExample> router_examples(const Dataset& dataset, Split split);

}  // namespace switchboard

#endif  // SWITCHBOARD_QA_ROUTER_HPP_
