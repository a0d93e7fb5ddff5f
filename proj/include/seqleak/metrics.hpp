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

#ifndef SEQLEAK_METRICS_HPP_
#define SEQLEAK_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqleak/distributions.hpp"
#include "seqleak/logprob.hpp"
#include "seqleak/models.hpp"

namespace seqleak {

// One extraction target: the model is prompted with `prefix` and we ask how
// likely it is to emit `suffix`.
struct SequenceRecord {
  std::string id;
  Context prefix;
  std::vector<Token> suffix;
  nlohmann::json tags = nlohmann::json::object();

  // Throws DatasetError unless both prefix and suffix are non-empty.
  void validate() const;
};

// Suffix positions (1-based, ascending) at which a partial match deviates
// from the target.
struct MismatchPattern {
  std::vector<std::size_t> positions;

  // "(3,4)"; the empty pattern prints as "()".
  std::string label() const;
  friend auto operator<=>(const MismatchPattern&, const MismatchPattern&) = default;
};

// Probability of `token` following `context` under the scheme's effective
// distribution. Exactly zero when the decoder truncates the token away.
LogProb token_log_probability(const LanguageModel& model, const Scheme& scheme,
                              std::span<const Token> context, Token token);
double token_probability(const LanguageModel& model, const Scheme& scheme,
                         std::span<const Token> context, Token token);

// Teacher-forced per-position token probabilities along the true suffix.
std::vector<double> suffix_token_probabilities(const LanguageModel& model,
                                               const Scheme& scheme,
                                               const SequenceRecord& record);

// Probability of emitting the suffix verbatim (product of TPs, in log space).
LogProb exact_sample_log_probability(const LanguageModel& model,
                                     const Scheme& scheme,
                                     const SequenceRecord& record);
double exact_sample_probability(const LanguageModel& model, const Scheme& scheme,
                                const SequenceRecord& record);

// True iff greedy decoding from the prefix reproduces the suffix.
bool is_memorized_greedy(const LanguageModel& model, const NormalizationSpec& norm,
                         const SequenceRecord& record);

struct BruteForceLimits {
  std::size_t max_vocab = 16;
  std::size_t max_suffix = 5;
};

// Sum of ESP over every length-m sequence differing from the suffix in
// exactly n positions (substitutions only). Throws InfeasibleError beyond
// `limits`.
double n_isp_bruteforce(const LanguageModel& model, const Scheme& scheme,
                        const SequenceRecord& record, std::size_t n,
                        const BruteForceLimits& limits = {});

// Which non-matching tokens the approximate enumeration expands at each
// mismatch branch point. With both knobs unset every positive-probability
// token is expanded; with both set, expansion stops at whichever limit is
// reached first.
struct ApproxConfig {
  std::optional<std::size_t> branch_width;
  std::optional<double> head_mass;
  // Cap on model queries; unset means unlimited.
  std::optional<std::uint64_t> max_expansions;

  static ApproxConfig full() { return {}; }
  static ApproxConfig width(std::size_t b) { return {b, std::nullopt, std::nullopt}; }
  static ApproxConfig mass(double h) { return {std::nullopt, h, std::nullopt}; }
  void validate() const;
};

struct ISPResult {
  std::size_t n = 0;
  // Mass of the enumerated sequences; the exact n-ISP lies in
  // [value, value + eps].
  double value = 0.0;
  double eps = 0.0;
  std::map<MismatchPattern, double> breakdown;
  std::uint64_t expansions = 0;
  bool budget_limited = false;

  double upper() const { return value + eps; }
};

ISPResult n_isp_approx(const LanguageModel& model, const Scheme& scheme,
                       const SequenceRecord& record, std::size_t n,
                       const ApproxConfig& cfg = ApproxConfig::full());

struct BoundedProbability {
  double value = 0.0;
  double eps = 0.0;
  bool budget_limited = false;
};

// Probability of at most n mismatches: sum of the i-ISP for i = 0..n.
BoundedProbability cumulative_isp(const LanguageModel& model, const Scheme& scheme,
                                  const SequenceRecord& record, std::size_t n,
                                  const ApproxConfig& cfg = ApproxConfig::full());

}  // namespace seqleak

#endif  // SEQLEAK_METRICS_HPP_
