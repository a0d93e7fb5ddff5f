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

#include "seqleak/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "seqleak/errors.hpp"
#include "seqleak/format.hpp"

namespace seqleak {
namespace {

// Slack on the cumulative-mass comparison so that p = 0.6 over
// {0.2, 0.2, 0.2, ...} still stops after three tokens regardless of the
// rounding of the running sum.
constexpr double kNucleusSlack = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Keeps `kept` (a set of indices) and renormalizes. When `kept` already
// covers the full support the input is returned untouched.
ProbDist restrict_to(const ProbDist& dist, std::span<const Token> kept) {
  std::vector<double> out(dist.size(), 0.0);
  std::size_t retained_support = 0;
  for (Token t : kept) {
    out[t] = dist[t];
    if (dist[t] > 0.0) ++retained_support;
  }
  if (retained_support == dist.support().size()) return dist;
  double total = 0.0;
  for (double p : out) total += p;
  for (double& p : out) p /= total;
  return ProbDist::from_probs(std::move(out));
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw ConfigError("cannot parse " + what + " from '" + text + "'");
  }
  return v;
}

}  // namespace

Logits::Logits(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw ConfigError("logits must be non-empty");
  bool any_finite = false;
  for (double v : values_) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw ModelError("logits contain NaN or +inf");
    }
    any_finite = any_finite || std::isfinite(v);
  }
  if (!any_finite) throw ModelError("logits put zero mass on every token");
}

ProbDist ProbDist::from_probs(std::vector<double> probs, double tolerance) {
  if (probs.empty()) throw ConfigError("distribution must be non-empty");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError("probability outside [0,1]: " + format_double(p));
    }
    total += p;
  }
  if (std::abs(total - 1.0) > tolerance) {
    throw ConfigError("probabilities sum to " + format_double(total));
  }
  return ProbDist(std::move(probs));
}

ProbDist ProbDist::one_hot(std::size_t vocab_size, Token index) {
  std::vector<double> probs(vocab_size, 0.0);
  probs.at(index) = 1.0;
  return ProbDist(std::move(probs));
}

std::vector<Token> ProbDist::support() const {
  std::vector<Token> out;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (probs_[i] > 0.0) out.push_back(static_cast<Token>(i));
  }
  return out;
}

std::vector<Token> ProbDist::ranked() const {
  std::vector<Token> order(probs_.size());
  std::iota(order.begin(), order.end(), Token{0});
  std::stable_sort(order.begin(), order.end(), [this](Token a, Token b) {
    return probs_[a] > probs_[b];
  });
  return order;
}

void validate(const NormalizationSpec& norm) {
  if (const auto* t = std::get_if<SoftmaxTemperature>(&norm)) {
    if (!(t->k > 0.0) || !std::isfinite(t->k)) {
      throw ConfigError("temperature must be a positive finite number, got " +
                        format_double(t->k));
    }
  }
}

void validate(const DecodingSpec& decode) {
  std::visit(Overloaded{
                 [](const Greedy&) {},
                 [](const Sample&) {},
                 [](const TopK& s) {
                   if (s.k < 1) throw ConfigError("top-k requires k >= 1");
                 },
                 [](const TopP& s) {
                   if (!(s.p > 0.0 && s.p <= 1.0)) {
                     throw ConfigError("top-p requires 0 < p <= 1, got " +
                                       format_double(s.p));
                   }
                 },
             },
             decode);
}

std::string to_string(const NormalizationSpec& norm) {
  return std::visit(
      Overloaded{
          [](const Softmax&) { return std::string("softmax"); },
          [](const SoftmaxTemperature& t) { return "temp:" + format_double(t.k); },
      },
      norm);
}

std::string to_string(const DecodingSpec& decode) {
  return std::visit(
      Overloaded{
          [](const Greedy&) { return std::string("greedy"); },
          [](const Sample&) { return std::string("sample"); },
          [](const TopK& s) { return "topk:" + std::to_string(s.k); },
          [](const TopP& s) {
            std::string label = "topp:" + format_double(s.p);
            if (s.rule == TopPRule::kAtMost) label += ":atmost";
            return label;
          },
      },
      decode);
}

std::string to_string(const Scheme& scheme) {
  return to_string(scheme.norm) + "/" + to_string(scheme.decode);
}

NormalizationSpec parse_normalization(const std::string& text) {
  NormalizationSpec out;
  if (text == "softmax") {
    out = Softmax{};
  } else if (text.rfind("temp:", 0) == 0) {
    out = SoftmaxTemperature{parse_double(text.substr(5), "temperature")};
  } else {
    throw ConfigError("unknown normalization '" + text +
                      "' (expected softmax | temp:K)");
  }
  validate(out);
  return out;
}

DecodingSpec parse_decoding(const std::string& text) {
  DecodingSpec out;
  if (text == "greedy") {
    out = Greedy{};
  } else if (text == "sample") {
    out = Sample{};
  } else if (text.rfind("topk:", 0) == 0) {
    std::string arg = text.substr(5);
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), k);
    if (ec != std::errc() || ptr != arg.data() + arg.size() || arg.empty()) {
      throw ConfigError("cannot parse k from '" + arg + "'");
    }
    out = TopK{k};
  } else if (text.rfind("topp:", 0) == 0) {
    std::string arg = text.substr(5);
    TopPRule rule = TopPRule::kCovering;
    if (auto colon = arg.find(':'); colon != std::string::npos) {
      std::string mode = arg.substr(colon + 1);
      arg = arg.substr(0, colon);
      if (mode == "atmost") {
        rule = TopPRule::kAtMost;
      } else if (mode != "covering") {
        throw ConfigError("unknown top-p rule '" + mode + "'");
      }
    }
    out = TopP{parse_double(arg, "p"), rule};
  } else {
    throw ConfigError("unknown decoding '" + text +
                      "' (expected greedy | sample | topk:K | topp:P)");
  }
  validate(out);
  return out;
}

ProbDist softmax(const Logits& logits) {
  auto values = logits.values();
  const double max = *std::max_element(values.begin(), values.end());
  std::vector<double> probs(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    probs[i] = std::exp(values[i] - max);
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return ProbDist::from_probs(std::move(probs));
}

ProbDist softmax_temperature(const Logits& logits, double k) {
  validate(NormalizationSpec{SoftmaxTemperature{k}});
  if (k == 1.0) return softmax(logits);
  std::vector<double> scaled(logits.values().begin(), logits.values().end());
  for (double& v : scaled) v /= k;
  return softmax(Logits(std::move(scaled)));
}

ProbDist normalize(const Logits& logits, const NormalizationSpec& norm) {
  return std::visit(
      Overloaded{
          [&](const Softmax&) { return softmax(logits); },
          [&](const SoftmaxTemperature& t) {
            return softmax_temperature(logits, t.k);
          },
      },
      norm);
}

ProbDist apply_greedy(const ProbDist& dist) {
  return ProbDist::one_hot(dist.size(), dist.ranked().front());
}

ProbDist apply_top_k(const ProbDist& dist, std::size_t k) {
  validate(DecodingSpec{TopK{k}});
  std::vector<Token> order = dist.ranked();
  order.resize(std::min(k, order.size()));
  return restrict_to(dist, order);
}

ProbDist apply_top_p(const ProbDist& dist, double p, TopPRule rule) {
  validate(DecodingSpec{TopP{p, rule}});
  if (p >= 1.0) return dist;
  std::vector<Token> order = dist.ranked();
  std::size_t keep = 0;
  double cumulative = 0.0;
  if (rule == TopPRule::kCovering) {
    while (keep < order.size()) {
      cumulative += dist[order[keep]];
      ++keep;
      if (cumulative >= p - kNucleusSlack) break;
    }
  } else {
    keep = 1;
    cumulative = dist[order[0]];
    while (keep < order.size() &&
           cumulative + dist[order[keep]] <= p + kNucleusSlack) {
      cumulative += dist[order[keep]];
      ++keep;
    }
  }
  order.resize(keep);
  return restrict_to(dist, order);
}

ProbDist apply_decoding(const ProbDist& dist, const DecodingSpec& decode) {
  return std::visit(Overloaded{
                        [&](const Greedy&) { return apply_greedy(dist); },
                        [&](const Sample&) { return dist; },
                        [&](const TopK& s) { return apply_top_k(dist, s.k); },
                        [&](const TopP& s) {
                          return apply_top_p(dist, s.p, s.rule);
                        },
                    },
                    decode);
}

ProbDist effective_distribution(const Logits& logits,
                                const NormalizationSpec& norm,
                                const DecodingSpec& decode) {
  return apply_decoding(normalize(logits, norm), decode);
}

}  // namespace seqleak
