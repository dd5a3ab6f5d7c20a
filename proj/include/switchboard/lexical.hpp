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

#ifndef SWITCHBOARD_LEXICAL_HPP_
#define SWITCHBOARD_LEXICAL_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace switchboard {

using TokenList = std::vector<std::string>;

// Lowercases ASCII letters and splits on every maximal run of ASCII
// non-alphanumerics. Bytes >= 0x80 are kept inside tokens so UTF-8 words
// survive intact. No stemming, no stopwords.
TokenList tokenize(std::string_view text);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct TermStat {
  std::string term;
  std::size_t df = 0;
  double idf = 0.0;
  std::size_t tf = 0;
  double contribution = 0.0;
};

// Okapi BM25 over an immutable corpus:
//   idf(t)    = ln(1 + (N - df + 0.5) / (df + 0.5))
//   score(q,d) = sum_t idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |d| / avgdl))
// Terms repeated in the query contribute once per occurrence.
class Bm25Index {
 public:
  using Document = std::pair<std::string, std::string>;

  Bm25Index() = default;
  Bm25Index(std::span<const Document> docs, Bm25Params params = {});

  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  double avg_doc_len() const { return avg_doc_len_; }
  const Bm25Params& params() const { return params_; }

  std::size_t doc_frequency(const std::string& term) const;
  const std::unordered_map<std::string, std::size_t>& doc_frequencies() const {
    return df_;
  }
  double idf(const std::string& term) const;

  bool contains(std::string_view doc_id) const;
  const std::string& doc_id(std::size_t i) const { return docs_[i].id; }
  const TokenList& doc_tokens(std::string_view doc_id) const;

  double score(std::string_view query, std::string_view doc_id) const;
  // Scores an arbitrary text as if it were a document, using the corpus
  // statistics. For an indexed document this equals score(query, id).
  double score_text(std::string_view query, std::string_view text) const;
  // One score per document in corpus order. Empty for an empty corpus.
  std::vector<std::pair<std::string, double>> score_all(
      std::string_view query) const;

  // Per query-term breakdown of score(query, doc_id).
  std::vector<TermStat> explain(std::string_view query,
                                std::string_view doc_id) const;

 private:
  struct Doc {
    std::string id;
    TokenList tokens;
    std::unordered_map<std::string, std::size_t> tf;
  };

  double score_tokens(const TokenList& query,
                      const std::unordered_map<std::string, std::size_t>& tf,
                      std::size_t len) const;
  const Doc& find(std::string_view doc_id) const;

  std::vector<Doc> docs_;
  std::unordered_map<std::string, std::size_t> index_of_;
  std::unordered_map<std::string, std::size_t> df_;
  double avg_doc_len_ = 0.0;
  Bm25Params params_;
};

// Cosine between raw-tf * idf vectors using the index's idf. Out-of-vocabulary
// terms get the df = 0 idf. Returns 0 when either vector is zero.
double tfidf_cosine(std::string_view query, std::string_view doc,
                    const Bm25Index& index);

}  // namespace switchboard

#endif  // SWITCHBOARD_LEXICAL_HPP_
