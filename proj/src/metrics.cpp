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

#include "seqleak/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "seqleak/errors.hpp"
#include "seqleak/format.hpp"

namespace seqleak {

void SequenceRecord::validate() const {
  if (prefix.empty()) throw DatasetError("record '" + id + "' has an empty prefix");
  if (suffix.empty()) throw DatasetError("record '" + id + "' has an empty suffix");
}

std::string MismatchPattern::label() const {
  std::string out = "(";
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(positions[i]);
  }
  return out + ")";
}

LogProb token_log_probability(const LanguageModel& model, const Scheme& scheme,
                              std::span<const Token> context, Token token) {
  if (token >= model.vocab_size()) {
    throw DatasetError("token id " + std::to_string(token) +
                       " is outside vocabulary of size " +
                       std::to_string(model.vocab_size()));
  }
  const ProbDist dist = effective_distribution(next_distribution(model, context), scheme);
  return dist.log_prob(token);
}

double token_probability(const LanguageModel& model, const Scheme& scheme,
                         std::span<const Token> context, Token token) {
  return token_log_probability(model, scheme, context, token).prob();
}

std::vector<double> suffix_token_probabilities(const LanguageModel& model,
                                               const Scheme& scheme,
                                               const SequenceRecord& record) {
  record.validate();
  Context context = record.prefix;
  std::vector<double> out;
  out.reserve(record.suffix.size());
  for (Token t : record.suffix) {
    out.push_back(token_probability(model, scheme, context, t));
    context.push_back(t);
  }
  return out;
}

LogProb exact_sample_log_probability(const LanguageModel& model,
                                     const Scheme& scheme,
                                     const SequenceRecord& record) {
  record.validate();
  Context context = record.prefix;
  context.reserve(record.prefix.size() + record.suffix.size());
  LogProb total = LogProb::one();
  for (Token t : record.suffix) {
    total *= token_log_probability(model, scheme, context, t);
    if (total.is_zero()) return total;
    context.push_back(t);
  }
  return total;
}

double exact_sample_probability(const LanguageModel& model, const Scheme& scheme,
                                const SequenceRecord& record) {
  return exact_sample_log_probability(model, scheme, record).prob();
}

bool is_memorized_greedy(const LanguageModel& model, const NormalizationSpec& norm,
                         const SequenceRecord& record) {
  return !exact_sample_log_probability(model, Scheme{norm, Greedy{}}, record).is_zero();
}

namespace {

void check_n(const SequenceRecord& record, std::size_t n) {
  record.validate();
  if (n > record.suffix.size()) {
    throw ConfigError("n = " + std::to_string(n) + " exceeds suffix length " +
                      std::to_string(record.suffix.size()) + " of record '" +
                      record.id + "'");
  }
}

}  // namespace

double n_isp_bruteforce(const LanguageModel& model, const Scheme& scheme,
                        const SequenceRecord& record, std::size_t n,
                        const BruteForceLimits& limits) {
  check_n(record, n);
  const std::size_t v = model.vocab_size();
  const std::size_t m = record.suffix.size();
  if (v > limits.max_vocab || m > limits.max_suffix) {
    throw InfeasibleError("exhaustive n-ISP needs V <= " +
                          std::to_string(limits.max_vocab) + " and m <= " +
                          std::to_string(limits.max_suffix) + " (got V = " +
                          std::to_string(v) + ", m = " + std::to_string(m) +
                          "); use the approximate enumeration instead");
  }
  if (n == 0) return exact_sample_probability(model, scheme, record);
  if (v < 2) return 0.0;

  LogSumAccumulator total;
  std::vector<std::size_t> positions(n);
  for (std::size_t i = 0; i < n; ++i) positions[i] = i;
  SequenceRecord candidate = record;

  for (;;) {
    // Every assignment of a substitute token to each chosen position; the
    // substitute index skips the true token by ranging over 0..V-2.
    std::vector<std::size_t> alt(n, 0);
    for (;;) {
      candidate.suffix = record.suffix;
      for (std::size_t i = 0; i < n; ++i) {
        const Token truth = record.suffix[positions[i]];
        Token sub = static_cast<Token>(alt[i]);
        if (sub >= truth) ++sub;
        candidate.suffix[positions[i]] = sub;
      }
      total.add(exact_sample_log_probability(model, scheme, candidate));
      std::size_t d = 0;
      while (d < n && ++alt[d] == v - 1) alt[d++] = 0;
      if (d == n) break;
    }
    // Next n-combination of {0..m-1} in lexicographic order.
    std::size_t i = n;
    while (i > 0 && positions[i - 1] == m - n + (i - 1)) --i;
    if (i == 0) break;
    ++positions[i - 1];
    for (std::size_t j = i; j < n; ++j) positions[j] = positions[j - 1] + 1;
  }
  return total.prob();
}

void ApproxConfig::validate() const {
  if (branch_width && *branch_width == 0 && head_mass) {
    // width 0 with a mass target is contradictory rather than merely tight.
    throw ConfigError("branch_width 0 cannot be combined with head_mass");
  }
  if (head_mass && !(*head_mass > 0.0 && *head_mass <= 1.0)) {
    throw ConfigError("head_mass must lie in (0, 1], got " + format_double(*head_mass));
  }
}

namespace {

// Depth-first walk over suffix positions. Each node is a partially generated
// suffix; at a node the match branch follows the true token and, while fewer
// than n mismatches have been used, mismatch branches follow the expanded
// non-matching tokens. Every non-matching token that is not expanded adds
// path * P(token) to eps: a completion that emits the rest of the target
// with certainty is the most it could contribute.
class IspEnumerator {
 public:
  IspEnumerator(const LanguageModel& model, const Scheme& scheme,
                const SequenceRecord& record, std::size_t n, const ApproxConfig& cfg)
      : model_(model), scheme_(scheme), record_(record), n_(n), cfg_(cfg) {}

  ISPResult run() {
    Context context = record_.prefix;
    std::vector<std::size_t> pattern;
    visit(context, 0, 0, LogProb::one(), pattern);
    ISPResult out;
    out.n = n_;
    out.value = value_.prob();
    out.eps = eps_.prob();
    for (const auto& [pat, acc] : breakdown_) out.breakdown[pat] = acc.prob();
    out.expansions = expansions_;
    out.budget_limited = budget_limited_;
    return out;
  }

 private:
  void visit(Context& context, std::size_t pos, std::size_t used, LogProb path,
             std::vector<std::size_t>& pattern) {
    const std::size_t m = record_.suffix.size();
    if (path.is_zero()) return;
    if (used + (m - pos) < n_) return;  // cannot reach n mismatches
    if (pos == m) {
      value_.add(path);
      breakdown_[MismatchPattern{pattern}].add(path);
      return;
    }
    if (cfg_.max_expansions && expansions_ >= *cfg_.max_expansions) {
      eps_.add(path);
      budget_limited_ = true;
      return;
    }
    ++expansions_;
    const ProbDist dist =
        effective_distribution(next_distribution(model_, context), scheme_);
    const Token truth = record_.suffix[pos];

    if (used + (m - pos - 1) >= n_) {
      context.push_back(truth);
      visit(context, pos + 1, used, path * dist.log_prob(truth), pattern);
      context.pop_back();
    }
    if (used >= n_) return;

    std::vector<Token> candidates;
    double candidate_mass = 0.0;
    for (Token t : dist.ranked()) {
      if (t == truth || !dist.in_support(t)) continue;
      candidates.push_back(t);
      candidate_mass += dist[t];
    }
    const std::size_t expand = expansion_count(dist, candidates, candidate_mass);

    LogSumAccumulator skipped;
    for (std::size_t i = expand; i < candidates.size(); ++i) {
      skipped.add(dist.log_prob(candidates[i]));
    }
    eps_.add(path * skipped.total());

    pattern.push_back(pos + 1);
    for (std::size_t i = 0; i < expand; ++i) {
      context.push_back(candidates[i]);
      visit(context, pos + 1, used + 1, path * dist.log_prob(candidates[i]), pattern);
      context.pop_back();
    }
    pattern.pop_back();
  }

  std::size_t expansion_count(const ProbDist& dist, const std::vector<Token>& candidates,
                              double candidate_mass) const {
    std::size_t limit = candidates.size();
    if (cfg_.branch_width) limit = std::min(limit, *cfg_.branch_width);
    if (!cfg_.head_mass || *cfg_.head_mass >= 1.0) return limit;
    const double target = *cfg_.head_mass * candidate_mass;
    double covered = 0.0;
    std::size_t count = 0;
    while (count < limit && covered < target) {
      covered += dist[candidates[count]];
      ++count;
    }
    return count;
  }

  const LanguageModel& model_;
  const Scheme& scheme_;
  const SequenceRecord& record_;
  const std::size_t n_;
  const ApproxConfig& cfg_;

  LogSumAccumulator value_;
  LogSumAccumulator eps_;
  std::map<MismatchPattern, LogSumAccumulator> breakdown_;
  std::uint64_t expansions_ = 0;
  bool budget_limited_ = false;
};

}  // namespace

ISPResult n_isp_approx(const LanguageModel& model, const Scheme& scheme,
                       const SequenceRecord& record, std::size_t n,
                       const ApproxConfig& cfg) {
  check_n(record, n);
  cfg.validate();
  return IspEnumerator(model, scheme, record, n, cfg).run();
}

BoundedProbability cumulative_isp(const LanguageModel& model, const Scheme& scheme,
                                  const SequenceRecord& record, std::size_t n,
                                  const ApproxConfig& cfg) {
  check_n(record, n);
  BoundedProbability out;
  for (std::size_t i = 0; i <= n; ++i) {
    const ISPResult r = n_isp_approx(model, scheme, record, i, cfg);
    out.value += r.value;
    out.eps += r.eps;
    out.budget_limited = out.budget_limited || r.budget_limited;
  }
  return out;
}

}  // namespace seqleak
