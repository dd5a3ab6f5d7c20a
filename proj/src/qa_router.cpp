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

#include "switchboard/qa_router.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "switchboard/error.hpp"

namespace switchboard {

namespace {

constexpr std::string_view kModelMagic = "switchboard-example-router";
constexpr int kModelVersion = 1;

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kParse, "bad real \"" + std::string(text) + "\"");
  }
  return value;
}

template <typename Int>
Int parse_int(std::string_view text) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kParse, "bad integer \"" + std::string(text) + "\"");
  }
  return value;
}

}  // namespace

std::vector<std::string> split_description(std::string_view description) {
  std::vector<std::string> sentences;
  std::size_t start = 0;
  for (std::size_t i = 0; i < description.size(); ++i) {
    if (!is_terminal(description[i])) continue;
    const bool at_end = i + 1 == description.size();
    if (at_end ||
        std::isspace(static_cast<unsigned char>(description[i + 1]))) {
      std::string sentence = trim(description.substr(start, i + 1 - start));
      if (!sentence.empty()) sentences.push_back(std::move(sentence));
      start = i + 1;
    }
  }
  std::string tail = trim(description.substr(std::min(start, description.size())));
  if (!tail.empty()) sentences.push_back(std::move(tail));
  return sentences;
}

std::vector<SkillSentences> skills_from_profiles(
    std::span<const AgentProfile> agents, DescriptionMode mode) {
  std::vector<SkillSentences> skills;
  skills.reserve(agents.size());
  for (const auto& agent : agents) {
    SkillSentences entry{agent.id, {}};
    if (mode == DescriptionMode::kSentences) {
      entry.sentences = agent.skill_sentences;
    } else if (std::string whole = trim(agent.description); !whole.empty()) {
      entry.sentences.push_back(std::move(whole));
    }
    skills.push_back(std::move(entry));
  }
  return skills;
}

Bm25Index build_sentence_index(std::span<const SkillSentences> skills,
                               Bm25Params params) {
  std::vector<Bm25Index::Document> docs;
  for (const auto& skill : skills) {
    for (std::size_t i = 0; i < skill.sentences.size(); ++i) {
      docs.emplace_back(skill.agent_id + "#" + std::to_string(i),
                        skill.sentences[i]);
    }
  }
  return Bm25Index(docs, params);
}

SimilarityFn bm25_similarity(const Bm25Index& index) {
  auto shared = std::make_shared<const Bm25Index>(index);
  return [shared](std::string_view query, std::span<const std::string> texts) {
    std::vector<double> scores;
    scores.reserve(texts.size());
    for (const auto& text : texts) scores.push_back(shared->score_text(query, text));
    return scores;
  };
}

SimilarityFn tfidf_similarity(const Bm25Index& index) {
  auto shared = std::make_shared<const Bm25Index>(index);
  return [shared](std::string_view query, std::span<const std::string> texts) {
    std::vector<double> scores;
    scores.reserve(texts.size());
    for (const auto& text : texts) scores.push_back(tfidf_cosine(query, text, *shared));
    return scores;
  };
}

std::vector<RankedCandidate> route_by_description(
    std::string_view query, std::span<const SkillSentences> skills,
    const SimilarityFn& similarity) {
  std::vector<RankedCandidate> ranked;
  ranked.reserve(skills.size());
  for (const auto& skill : skills) {
    double best = 0.0;
    if (!skill.sentences.empty()) {
      const std::vector<double> scores = similarity(query, skill.sentences);
      if (scores.size() != skill.sentences.size()) {
        throw Error(ErrorCode::kMalformedReply,
                    "similarity returned " + std::to_string(scores.size()) +
                        " scores for " + std::to_string(skill.sentences.size()) +
                        " sentences");
      }
      best = *std::max_element(scores.begin(), scores.end());
    }
    ranked.push_back({skill.agent_id, best});
  }
  sort_ranked(ranked);
  return ranked;
}

SparseFeatures hash_features(std::string_view text, std::size_t feature_dim) {
  const TokenList tokens = tokenize(text);
  std::map<std::uint32_t, double> accum;
  auto add = [&](const std::string& feature) {
    const std::uint64_t h = fnv1a(feature);
    const auto index = static_cast<std::uint32_t>(h % feature_dim);
    accum[index] += (h >> 63) ? -1.0 : 1.0;
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add("u:" + tokens[i]);
    if (i + 1 < tokens.size()) add("b:" + tokens[i] + " " + tokens[i + 1]);
  }
  SparseFeatures features;
  double norm = 0.0;
  for (const auto& [index, value] : accum) norm += value * value;
  if (norm == 0.0) return features;
  norm = std::sqrt(norm);
  for (const auto& [index, value] : accum) {
    if (value == 0.0) continue;
    features.index.push_back(index);
    features.value.push_back(value / norm);
  }
  return features;
}

ExampleRouterModel::ExampleRouterModel(std::vector<std::string> agents,
                                       std::size_t feature_dim,
                                       RouterHyperparams hyper)
    : agents_(std::move(agents)),
      feature_dim_(feature_dim),
      hyper_(hyper),
      weights_(agents_.size(), std::vector<double>(feature_dim, 0.0)),
      bias_(agents_.size(), 0.0) {
  if (feature_dim == 0 || feature_dim > (std::size_t{1} << 32)) {
    throw Error(ErrorCode::kInvalidArgument, "feature_dim must be in [1, 2^32]");
  }
}

double ExampleRouterModel::logit(std::size_t agent,
                                 const SparseFeatures& x) const {
  const auto& w = weights_[agent];
  double z = bias_[agent];
  for (std::size_t k = 0; k < x.index.size(); ++k) z += w[x.index[k]] * x.value[k];
  return z;
}

void ExampleRouterModel::save(std::ostream& out) const {
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "feature_dim " << feature_dim_ << '\n';
  out << "hyperparams " << format_double(hyper_.learning_rate) << ' '
      << hyper_.epochs << ' ' << format_double(hyper_.l2) << ' '
      << hyper_.batch_size << ' ' << hyper_.seed << '\n';
  out << "agents " << agents_.size() << '\n';
  for (std::size_t a = 0; a < agents_.size(); ++a) {
    const auto& w = weights_[a];
    const auto nnz = static_cast<std::size_t>(
        std::count_if(w.begin(), w.end(), [](double v) { return v != 0.0; }));
    out << "agent " << agents_[a] << ' ' << format_double(bias_[a]) << ' ' << nnz;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] != 0.0) out << ' ' << i << ':' << format_double(w[i]);
    }
    out << '\n';
  }
}

ExampleRouterModel ExampleRouterModel::load(std::istream& in) {
  auto expect = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::kParse, "router model: " + what);
  };
  std::string magic, word;
  int version = 0;
  in >> magic >> version;
  expect(in && magic == kModelMagic, "missing header");
  expect(version == kModelVersion, "unsupported version " + std::to_string(version));

  std::size_t feature_dim = 0;
  in >> word >> feature_dim;
  expect(in && word == "feature_dim", "missing feature_dim");

  RouterHyperparams hyper;
  std::string lr, l2;
  in >> word >> lr >> hyper.epochs >> l2 >> hyper.batch_size >> hyper.seed;
  expect(in && word == "hyperparams", "missing hyperparams");
  hyper.learning_rate = parse_double(lr);
  hyper.l2 = parse_double(l2);

  std::size_t n_agents = 0;
  in >> word >> n_agents;
  expect(in && word == "agents", "missing agent count");

  std::vector<std::string> ids(n_agents);
  std::vector<std::pair<std::string, std::vector<std::string>>> rows(n_agents);
  for (std::size_t a = 0; a < n_agents; ++a) {
    std::string bias;
    std::size_t nnz = 0;
    in >> word >> ids[a] >> bias >> nnz;
    expect(in && word == "agent", "truncated agent record");
    rows[a].first = bias;
    rows[a].second.resize(nnz);
    for (auto& entry : rows[a].second) in >> entry;
    expect(static_cast<bool>(in), "truncated weights for " + ids[a]);
  }

  ExampleRouterModel model(ids, feature_dim, hyper);
  for (std::size_t a = 0; a < n_agents; ++a) {
    model.bias_[a] = parse_double(rows[a].first);
    for (const auto& entry : rows[a].second) {
      const auto colon = entry.find(':');
      expect(colon != std::string::npos, "bad weight entry \"" + entry + "\"");
      const auto index =
          parse_int<std::size_t>(std::string_view(entry).substr(0, colon));
      expect(index < feature_dim, "weight index out of range");
      model.weights_[a][index] =
          parse_double(std::string_view(entry).substr(colon + 1));
    }
  }
  return model;
}

void ExampleRouterModel::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write \"" + path + "\"");
  save(out);
  if (!out) throw Error(ErrorCode::kIo, "write failed for \"" + path + "\"");
}

ExampleRouterModel ExampleRouterModel::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open \"" + path + "\"");
  return load(in);
}

ExampleRouterModel train_example_router(std::span<const RouterExample> examples,
                                        std::span<const std::string> agents,
                                        const RouterHyperparams& hyper,
                                        std::size_t feature_dim) {
  if (examples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty training set");
  }
  if (agents.empty()) throw Error(ErrorCode::kInvalidArgument, "no agents");
  if (hyper.batch_size <= 0 || hyper.epochs < 0) {
    throw Error(ErrorCode::kInvalidArgument, "batch_size must be > 0 and epochs >= 0");
  }
  std::unordered_map<std::string, std::size_t> agent_index;
  for (std::size_t a = 0; a < agents.size(); ++a) {
    if (!agent_index.emplace(agents[a], a).second) {
      throw Error(ErrorCode::kDuplicate, "agent \"" + agents[a] + "\" listed twice");
    }
  }

  const std::size_t n = examples.size();
  std::vector<SparseFeatures> features;
  std::vector<std::vector<char>> labels(n, std::vector<char>(agents.size(), 0));
  features.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    features.push_back(hash_features(examples[i].text, feature_dim));
    for (const auto& gold : examples[i].gold) {
      auto it = agent_index.find(gold);
      if (it == agent_index.end()) {
        throw Error(ErrorCode::kNotFound,
                    "gold agent \"" + gold + "\" not in agent list");
      }
      labels[i][it->second] = 1;
    }
  }

  ExampleRouterModel model({agents.begin(), agents.end()}, feature_dim, hyper);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(hyper.seed);
  const auto batch = static_cast<std::size_t>(hyper.batch_size);

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    // Explicit Fisher-Yates: std::shuffle is not specified bit-for-bit.
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[rng() % i]);
    }
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      const double scale =
          hyper.learning_rate / static_cast<double>(end - start);
      for (std::size_t a = 0; a < agents.size(); ++a) {
        std::map<std::uint32_t, double> grad;
        double bias_grad = 0.0;
        for (std::size_t k = start; k < end; ++k) {
          const std::size_t i = order[k];
          const double err =
              sigmoid(model.logit(a, features[i])) - labels[i][a];
          bias_grad += err;
          const auto& x = features[i];
          for (std::size_t f = 0; f < x.index.size(); ++f) {
            grad[x.index[f]] += err * x.value[f];
          }
        }
        auto& w = model.weights(a);
        // L2 decay is applied lazily, only to coordinates active in the batch.
        for (const auto& [index, g] : grad) {
          w[index] -= scale * g + hyper.learning_rate * hyper.l2 * w[index];
        }
        model.bias(a) -= scale * bias_grad;
      }
    }
  }
  return model;
}

std::vector<RankedCandidate> route_by_examples(const ExampleRouterModel& model,
                                               std::string_view query) {
  const SparseFeatures x = hash_features(query, model.feature_dim());
  std::vector<RankedCandidate> ranked;
  ranked.reserve(model.agents().size());
  for (std::size_t a = 0; a < model.agents().size(); ++a) {
    ranked.push_back({model.agents()[a], sigmoid(model.logit(a, x))});
  }
  sort_ranked(ranked);
  return ranked;
}

std::vector<RouterExample> router_examples(const Dataset& dataset,
                                           Split split) {
  std::vector<RouterExample> out;
  for (const auto& example : dataset.examples) {
    if (example.query.split != split) continue;
    out.push_back({example.query.text, example.gold_agents});
  }
  return out;
}

}  // namespace switchboard
