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

#ifndef SEQLEAK_MONTECARLO_HPP_
#define SEQLEAK_MONTECARLO_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "seqleak/metrics.hpp"

namespace seqleak {

// Counter-based generator: the stream for (seed, record, trial) is a pure
// function of those three values, so results do not depend on how trials
// are scheduled across threads. Output is SplitMix64 over a keyed counter.
class TrialRng {
 public:
  using result_type = std::uint64_t;

  TrialRng(std::uint64_t seed, std::string_view record_id, std::uint64_t trial);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct SamplerConfig {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  // 0 picks std::thread::hardware_concurrency().
  std::size_t workers = 1;
};

struct FreqEstimate {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  double freq = 0.0;
  double std_error = 0.0;  // sqrt(freq (1 - freq) / trials)

  static FreqEstimate from_counts(std::uint64_t hits, std::uint64_t trials);
  // |freq - expected| <= sigmas * std_error.
  bool agrees_with(double expected, double sigmas = 4.0) const;
};

// Draws m tokens autoregressively from the effective distribution.
std::vector<Token> sample_suffix(const LanguageModel& model, const Scheme& scheme,
                                 std::span<const Token> prefix, std::size_t m,
                                 TrialRng& rng);

// Per-trial Hamming distance histogram between sampled and true suffixes:
// entry d counts rollouts differing in exactly d positions.
std::vector<std::uint64_t> mismatch_histogram(const LanguageModel& model,
                                              const Scheme& scheme,
                                              const SequenceRecord& record,
                                              const SamplerConfig& cfg);

FreqEstimate estimate_leak_freq(const LanguageModel& model, const Scheme& scheme,
                                const SequenceRecord& record, const SamplerConfig& cfg);

FreqEstimate estimate_partial_freq(const LanguageModel& model, const Scheme& scheme,
                                   const SequenceRecord& record, std::size_t n,
                                   const SamplerConfig& cfg);

}  // namespace seqleak

#endif  // SEQLEAK_MONTECARLO_HPP_
