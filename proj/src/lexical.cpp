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

#include "switchboard/lexical.hpp"

#include <algorithm>
#include <cmath>

#include "switchboard/error.hpp"

namespace switchboard {

namespace {

bool is_token_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

std::unordered_map<std::string, std::size_t> term_counts(
    const TokenList& tokens) {
  std::unordered_map<std::string, std::size_t> tf;
  for (const auto& token : tokens) ++tf[token];
  return tf;
}

}  // namespace

TokenList tokenize(std::string_view text) {
  TokenList tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_token_byte(c)) {
      current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32)
                                               : static_cast<char>(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Bm25Index::Bm25Index(std::span<const Document> docs, Bm25Params params)
    : params_(params) {
  if (!(params.k1 >= 0.0) || !(params.b >= 0.0 && params.b <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "BM25 parameters need k1 >= 0 and 0 <= b <= 1");
  }
  docs_.reserve(docs.size());
  std::size_t total_len = 0;
  for (const auto& [id, text] : docs) {
    if (!index_of_.emplace(id, docs_.size()).second) {
      throw Error(ErrorCode::kDuplicate, "duplicate doc id \"" + id + "\"");
    }
    Doc doc{id, tokenize(text), {}};
    doc.tf = term_counts(doc.tokens);
    for (const auto& [term, count] : doc.tf) ++df_[term];
    total_len += doc.tokens.size();
    docs_.push_back(std::move(doc));
  }
  avg_doc_len_ = docs_.empty() ? 0.0
                               : static_cast<double>(total_len) /
                                     static_cast<double>(docs_.size());
}

std::size_t Bm25Index::doc_frequency(const std::string& term) const {
  auto it = df_.find(term);
  return it == df_.end() ? 0 : it->second;
}

double Bm25Index::idf(const std::string& term) const {
  const double n = static_cast<double>(docs_.size());
  const double df = static_cast<double>(doc_frequency(term));
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

bool Bm25Index::contains(std::string_view doc_id) const {
  return index_of_.count(std::string(doc_id)) != 0;
}

const Bm25Index::Doc& Bm25Index::find(std::string_view doc_id) const {
  auto it = index_of_.find(std::string(doc_id));
  if (it == index_of_.end()) {
    throw Error(ErrorCode::kNotFound,
                "unknown doc id \"" + std::string(doc_id) + "\"");
  }
  return docs_[it->second];
}

const TokenList& Bm25Index::doc_tokens(std::string_view doc_id) const {
  return find(doc_id).tokens;
}

double Bm25Index::score_tokens(
    const TokenList& query,
    const std::unordered_map<std::string, std::size_t>& tf,
    std::size_t len) const {
  // avgdl is 0 only when every document is empty, so |d| is 0 as well.
  const double norm =
      avg_doc_len_ > 0.0 ? static_cast<double>(len) / avg_doc_len_ : 0.0;
  const double k1 = params_.k1;
  const double b = params_.b;
  double score = 0.0;
  for (const auto& term : query) {
    auto it = tf.find(term);
    if (it == tf.end()) continue;
    const double f = static_cast<double>(it->second);
    score += idf(term) * f * (k1 + 1.0) / (f + k1 * (1.0 - b + b * norm));
  }
  return score;
}

double Bm25Index::score(std::string_view query, std::string_view doc_id) const {
  const Doc& doc = find(doc_id);
  return score_tokens(tokenize(query), doc.tf, doc.tokens.size());
}

double Bm25Index::score_text(std::string_view query,
                             std::string_view text) const {
  const TokenList tokens = tokenize(text);
  return score_tokens(tokenize(query), term_counts(tokens), tokens.size());
}

std::vector<std::pair<std::string, double>> Bm25Index::score_all(
    std::string_view query) const {
  const TokenList q = tokenize(query);
  std::vector<std::pair<std::string, double>> out;
  out.reserve(docs_.size());
  for (const auto& doc : docs_) {
    out.emplace_back(doc.id, score_tokens(q, doc.tf, doc.tokens.size()));
  }
  return out;
}

std::vector<TermStat> Bm25Index::explain(std::string_view query,
                                         std::string_view doc_id) const {
  const Doc& doc = find(doc_id);
  std::vector<TermStat> stats;
  for (const auto& term : tokenize(query)) {
    TermStat stat;
    stat.term = term;
    stat.df = doc_frequency(term);
    stat.idf = idf(term);
    auto it = doc.tf.find(term);
    stat.tf = it == doc.tf.end() ? 0 : it->second;
    stat.contribution = score_tokens({term}, doc.tf, doc.tokens.size());
    stats.push_back(std::move(stat));
  }
  return stats;
}

double tfidf_cosine(std::string_view query, std::string_view doc,
                    const Bm25Index& index) {
  const auto q = term_counts(tokenize(query));
  const auto d = term_counts(tokenize(doc));
  double dot = 0.0;
  double q_norm = 0.0;
  double d_norm = 0.0;
  for (const auto& [term, count] : q) {
    const double w = static_cast<double>(count) * index.idf(term);
    q_norm += w * w;
    if (auto it = d.find(term); it != d.end()) {
      dot += w * static_cast<double>(it->second) * index.idf(term);
    }
  }
  for (const auto& [term, count] : d) {
    const double w = static_cast<double>(count) * index.idf(term);
    d_norm += w * w;
  }
  if (q_norm == 0.0 || d_norm == 0.0) return 0.0;
  const double cosine = dot / (std::sqrt(q_norm) * std::sqrt(d_norm));
  return std::min(1.0, std::max(0.0, cosine));
}

}  // namespace switchboard
