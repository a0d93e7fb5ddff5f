//
// Copyright 2026 The seqleak Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef SEQLEAK_DISTRIBUTIONS_HPP_
#define SEQLEAK_DISTRIBUTIONS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "seqleak/logprob.hpp"

namespace seqleak {

using Token = std::uint32_t;

// Raw model scores, one per vocabulary entry. Negative infinity is accepted
// and means "this token is impossible"; NaN and +inf are rejected.
class Logits {
 public:
  Logits() = default;
  explicit Logits(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const Logits&, const Logits&) = default;

 private:
  std::vector<double> values_;
};

// A distribution over the vocabulary. Tokens outside the support carry an
// exact 0.0.
class ProbDist {
 public:
  ProbDist() = default;

  // Validates entries are in [0,1] and sum to 1 within `tolerance`.
  static ProbDist from_probs(std::vector<double> probs, double tolerance = 1e-9);
  static ProbDist one_hot(std::size_t vocab_size, Token index);

  std::span<const double> probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  LogProb log_prob(Token t) const { return LogProb::from_prob(probs_[t]); }
  bool in_support(Token t) const { return probs_[t] > 0.0; }
  std::vector<Token> support() const;

  // Token indices ordered by descending probability, ties by lowest index.
  std::vector<Token> ranked() const;

  friend bool operator==(const ProbDist&, const ProbDist&) = default;

 private:
  explicit ProbDist(std::vector<double> probs) : probs_(std::move(probs)) {}
  std::vector<double> probs_;
};

struct Softmax {};
struct SoftmaxTemperature {
  double k = 1.0;
};
using NormalizationSpec = std::variant<Softmax, SoftmaxTemperature>;

// How the nucleus boundary is drawn. Covering keeps the token that crosses p;
// AtMost keeps only tokens whose running sum stays <= p (and always at least
// the top token, so the support never empties).
enum class TopPRule { kCovering, kAtMost };

struct Greedy {};
struct Sample {};
struct TopK {
  std::size_t k = 1;
};
struct TopP {
  double p = 1.0;
  TopPRule rule = TopPRule::kCovering;
};
using DecodingSpec = std::variant<Greedy, Sample, TopK, TopP>;

// The (normalization, decoding) pair that turns logits into the
// distribution a generation step actually samples from.
struct Scheme {
  NormalizationSpec norm = Softmax{};
  DecodingSpec decode = Sample{};
};

void validate(const NormalizationSpec& norm);
void validate(const DecodingSpec& decode);

// Short stable labels such as "temp:0.5" or "topk:10"; parsed back by
// parse_normalization / parse_decoding.
std::string to_string(const NormalizationSpec& norm);
std::string to_string(const DecodingSpec& decode);
std::string to_string(const Scheme& scheme);
NormalizationSpec parse_normalization(const std::string& text);
DecodingSpec parse_decoding(const std::string& text);

ProbDist softmax(const Logits& logits);
ProbDist softmax_temperature(const Logits& logits, double k);
ProbDist normalize(const Logits& logits, const NormalizationSpec& norm);

ProbDist apply_greedy(const ProbDist& dist);
ProbDist apply_top_k(const ProbDist& dist, std::size_t k);
ProbDist apply_top_p(const ProbDist& dist, double p,
                     TopPRule rule = TopPRule::kCovering);
ProbDist apply_decoding(const ProbDist& dist, const DecodingSpec& decode);

// decode ∘ normalize applied to one logit vector.
ProbDist effective_distribution(const Logits& logits,
                                const NormalizationSpec& norm,
                                const DecodingSpec& decode);
inline ProbDist effective_distribution(const Logits& logits, const Scheme& s) {
  return effective_distribution(logits, s.norm, s.decode);
}

}  // namespace seqleak

#endif  // SEQLEAK_DISTRIBUTIONS_HPP_
