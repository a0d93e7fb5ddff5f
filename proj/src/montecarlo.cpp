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

#include "seqleak/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "seqleak/errors.hpp"

namespace seqleak {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Cumulative sums of one effective distribution, restricted to its support.
struct Cdf {
  std::vector<Token> tokens;
  std::vector<double> cumulative;

  explicit Cdf(const ProbDist& dist) {
    double acc = 0.0;
    for (Token t : dist.support()) {
      acc += dist[t];
      tokens.push_back(t);
      cumulative.push_back(acc);
    }
  }

  Token draw(double u) const {
    const double target = u * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) --it;
    return tokens[static_cast<std::size_t>(it - cumulative.begin())];
  }
};

// Per-worker memo of context -> CDF. Each rollout revisits the same few
// contexts, so this keeps repeated normalization out of the inner loop.
class Sampler {
 public:
  Sampler(const LanguageModel& model, const Scheme& scheme)
      : model_(model), scheme_(scheme) {}

  Token draw(const Context& context, TrialRng& rng) {
    auto it = memo_.find(context);
    if (it == memo_.end()) {
      it = memo_
               .emplace(context,
                        Cdf(effective_distribution(next_distribution(model_, context),
                                                   scheme_)))
               .first;
    }
    return it->second.draw(rng.uniform());
  }

 private:
  const LanguageModel& model_;
  const Scheme& scheme_;
  std::map<Context, Cdf> memo_;
};

}  // namespace

TrialRng::TrialRng(std::uint64_t seed, std::string_view record_id, std::uint64_t trial)
    : key_(splitmix64(splitmix64(seed) ^ splitmix64(fnv1a(record_id)) ^
                      splitmix64(trial + 0x632be59bd9b4e019ull))) {}

TrialRng::result_type TrialRng::operator()() {
  return splitmix64(key_ + 0x9e3779b97f4a7c15ull * ++counter_);
}

double TrialRng::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

FreqEstimate FreqEstimate::from_counts(std::uint64_t hits, std::uint64_t trials) {
  FreqEstimate e;
  e.hits = hits;
  e.trials = trials;
  if (trials > 0) {
    e.freq = static_cast<double>(hits) / static_cast<double>(trials);
    e.std_error = std::sqrt(e.freq * (1.0 - e.freq) / static_cast<double>(trials));
  }
  return e;
}

bool FreqEstimate::agrees_with(double expected, double sigmas) const {
  // The 1e-12 term only absorbs rounding in closed forms that should be
  // exactly 0 or 1.
  return std::abs(freq - expected) <= sigmas * std_error + 1e-12;
}

std::vector<Token> sample_suffix(const LanguageModel& model, const Scheme& scheme,
                                 std::span<const Token> prefix, std::size_t m,
                                 TrialRng& rng) {
  if (m < 1) throw ConfigError("sample_suffix needs m >= 1");
  Context context(prefix.begin(), prefix.end());
  std::vector<Token> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const ProbDist dist = effective_distribution(next_distribution(model, context), scheme);
    const Token t = Cdf(dist).draw(rng.uniform());
    out.push_back(t);
    context.push_back(t);
  }
  return out;
}

std::vector<std::uint64_t> mismatch_histogram(const LanguageModel& model,
                                              const Scheme& scheme,
                                              const SequenceRecord& record,
                                              const SamplerConfig& cfg) {
  record.validate();
  if (cfg.trials < 1) throw ConfigError("Monte Carlo needs at least one trial");
  const std::size_t m = record.suffix.size();
  std::size_t workers = cfg.workers == 0 ? std::thread::hardware_concurrency() : cfg.workers;
  workers = std::clamp<std::size_t>(workers, 1, static_cast<std::size_t>(cfg.trials));

  std::vector<std::vector<std::uint64_t>> partial(workers,
                                                  std::vector<std::uint64_t>(m + 1, 0));
  std::vector<std::exception_ptr> errors(workers);
  auto run = [&](std::size_t w) {
    try {
      Sampler sampler(model, scheme);
      Context context;
      for (std::uint64_t trial = w; trial < cfg.trials; trial += workers) {
        TrialRng rng(cfg.seed, record.id, trial);
        context = record.prefix;
        std::size_t mismatches = 0;
        for (std::size_t i = 0; i < m; ++i) {
          const Token t = sampler.draw(context, rng);
          if (t != record.suffix[i]) ++mismatches;
          context.push_back(t);
        }
        ++partial[w][mismatches];
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(run, w);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<std::uint64_t> hist(m + 1, 0);
  for (const auto& p : partial) {
    for (std::size_t d = 0; d <= m; ++d) hist[d] += p[d];
  }
  return hist;
}

FreqEstimate estimate_leak_freq(const LanguageModel& model, const Scheme& scheme,
                                const SequenceRecord& record, const SamplerConfig& cfg) {
  return estimate_partial_freq(model, scheme, record, 0, cfg);
}

FreqEstimate estimate_partial_freq(const LanguageModel& model, const Scheme& scheme,
                                   const SequenceRecord& record, std::size_t n,
                                   const SamplerConfig& cfg) {
  if (n > record.suffix.size()) {
    throw ConfigError("n exceeds the suffix length of record '" + record.id + "'");
  }
  const auto hist = mismatch_histogram(model, scheme, record, cfg);
  return FreqEstimate::from_counts(hist[n], cfg.trials);
}

}  // namespace seqleak
