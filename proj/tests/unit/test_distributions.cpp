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

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "seqleak/distributions.hpp"
#include "seqleak/errors.hpp"
#include "test_support.hpp"

using namespace seqleak;
using doctest::Approx;

namespace {

ProbDist dist(std::vector<double> p) { return ProbDist::from_probs(std::move(p)); }

void check_probs(const ProbDist& d, std::vector<double> expected, double tol = 1e-12) {
  REQUIRE(d.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(std::abs(d[i] - expected[i]) <= tol);
  }
}

}  // namespace

TEST_CASE("softmax basics") {
  check_probs(softmax(Logits({0.0, 0.0})), {0.5, 0.5});
  check_probs(softmax(Logits({std::log(2.0), 0.0})), {2.0 / 3, 1.0 / 3}, 1e-15);
  auto big = softmax(Logits({1000.0, 0.0}));
  CHECK(std::isfinite(big[0]));
  CHECK(big[0] == Approx(1.0));
  CHECK(big[1] >= 0.0);
  CHECK(big[1] < 1e-300);
}

TEST_CASE("softmax keeps -inf tokens at exactly zero") {
  const double ninf = -std::numeric_limits<double>::infinity();
  auto d = softmax(Logits({0.0, ninf, 0.0}));
  CHECK(d[1] == 0.0);
  CHECK(d[0] == 0.5);
  CHECK_FALSE(d.in_support(1));
}

TEST_CASE("logits validation") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Logits({std::nan(""), 0.0}), ModelError);
  CHECK_THROWS_AS(Logits({inf, 0.0}), ModelError);
  CHECK_THROWS_AS(Logits({-inf, -inf}), ModelError);
  CHECK_THROWS_AS(Logits(std::vector<double>{}), ConfigError);
}

TEST_CASE("temperature") {
  check_probs(softmax_temperature(Logits({std::log(4.0), 0.0}), 2.0), {2.0 / 3, 1.0 / 3},
              1e-15);
  Logits z({0.3, -1.2, 2.5});
  CHECK(softmax_temperature(z, 1.0) == softmax(z));
  auto cold = softmax_temperature(Logits({3.0, 1.0}), 1e-3);
  CHECK(cold[0] == Approx(1.0));
  CHECK(cold[1] < 1e-100);
  CHECK_THROWS_AS(softmax_temperature(z, 0.0), ConfigError);
  CHECK_THROWS_AS(softmax_temperature(z, -1.0), ConfigError);
}

TEST_CASE("greedy") {
  check_probs(apply_greedy(dist({0.5, 0.3, 0.2})), {1, 0, 0});
  check_probs(apply_greedy(dist({0.4, 0.4, 0.2})), {1, 0, 0});
  check_probs(apply_greedy(dist({0.2, 0.4, 0.4})), {0, 1, 0});
  auto oh = ProbDist::one_hot(3, 2);
  CHECK(apply_greedy(oh) == oh);
}

TEST_CASE("top-k") {
  check_probs(apply_top_k(dist({0.5, 0.3, 0.2}), 2), {0.625, 0.375, 0});
  check_probs(apply_top_k(dist({0.5, 0.3, 0.2}), 1), {1, 0, 0});
  auto d = dist({0.5, 0.3, 0.2});
  CHECK(apply_top_k(d, 3) == d);
  CHECK(apply_top_k(d, 10) == d);
  // ties at the boundary keep the lowest index
  check_probs(apply_top_k(dist({0.2, 0.4, 0.4}), 1), {0, 1, 0});
  CHECK_THROWS_AS(validate(DecodingSpec{TopK{0}}), ConfigError);
}

TEST_CASE("top-p covering") {
  check_probs(apply_top_p(dist({0.5, 0.3, 0.2}), 0.6), {0.625, 0.375, 0});
  auto d = dist({0.5, 0.3, 0.2});
  CHECK(apply_top_p(d, 1.0) == d);
  check_probs(apply_top_p(d, 0.4), {1, 0, 0});
  // exactly reaching p does not pull in the next token
  check_probs(apply_top_p(d, 0.8), {0.625, 0.375, 0});
  CHECK_THROWS_AS(validate(DecodingSpec{TopP{0.0}}), ConfigError);
  CHECK_THROWS_AS(validate(DecodingSpec{TopP{1.5}}), ConfigError);
}

TEST_CASE("top-p at-most") {
  auto d = dist({0.5, 0.3, 0.2});
  check_probs(apply_top_p(d, 0.6, TopPRule::kAtMost), {1, 0, 0});
  check_probs(apply_top_p(d, 0.8, TopPRule::kAtMost), {0.625, 0.375, 0});
  // top token survives even when it alone exceeds p
  check_probs(apply_top_p(d, 0.1, TopPRule::kAtMost), {1, 0, 0});
  CHECK(apply_top_p(d, 1.0, TopPRule::kAtMost) == d);
}

TEST_CASE("effective distribution") {
  Logits z({0.2, 1.7, -0.4, 0.0});
  CHECK(effective_distribution(z, Softmax{}, Sample{}) == softmax(z));
  CHECK(effective_distribution(z, SoftmaxTemperature{1.0}, Sample{}) == softmax(z));
  auto d = effective_distribution(Logits({std::log(2.0), 0.0, -1e6}), Softmax{}, TopK{1});
  check_probs(d, {1, 0, 0});
}

TEST_CASE("parse and print") {
  CHECK(to_string(parse_normalization("softmax")) == "softmax");
  CHECK(to_string(parse_normalization("temp:0.5")) == "temp:0.5");
  CHECK(to_string(parse_decoding("greedy")) == "greedy");
  CHECK(to_string(parse_decoding("sample")) == "sample");
  CHECK(to_string(parse_decoding("topk:10")) == "topk:10");
  CHECK(to_string(parse_decoding("topp:0.9")) == "topp:0.9");
  auto atmost = parse_decoding("topp:0.9:atmost");
  REQUIRE(std::holds_alternative<TopP>(atmost));
  CHECK(std::get<TopP>(atmost).rule == TopPRule::kAtMost);
  CHECK(to_string(atmost) == "topp:0.9:atmost");
  CHECK(to_string(parse_decoding(to_string(atmost))) == "topp:0.9:atmost");
  for (const char* bad : {"", "topk", "topk:0", "topk:x", "topp:2", "temp:0", "temp:-1",
                          "beam", "topp:0.5:sometimes"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_decoding(bad), ConfigError);
    CHECK_THROWS_AS(parse_normalization(bad), ConfigError);
  }
}

TEST_CASE("from_probs validation") {
  CHECK_THROWS_AS(ProbDist::from_probs({0.5, 0.6}), ConfigError);
  CHECK_THROWS_AS(ProbDist::from_probs({1.5, -0.5}), ConfigError);
  CHECK_THROWS_AS(ProbDist::from_probs({}), ConfigError);
  CHECK_NOTHROW(ProbDist::from_probs({0.5, 0.5 + 1e-12}));
}

TEST_CASE("ranked order") {
  auto d = dist({0.1, 0.4, 0.1, 0.4});
  CHECK(d.ranked() == std::vector<Token>{1, 3, 0, 2});
  CHECK(dist({0.0, 1.0}).support() == std::vector<Token>{1});
}

TEST_CASE("property: normalization and decoding invariants") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> vs(2, 12);
  std::uniform_real_distribution<double> ps(0.05, 1.0);
  std::uniform_real_distribution<double> ks(0.2, 3.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t v = vs(rng);
    Logits z(testing::random_logits(rng, v));
    const double k = ks(rng);
    const auto norm = softmax_temperature(z, k);
    double total = 0.0;
    for (double p : norm.probs()) total += p;
    CHECK(total == Approx(1.0).epsilon(1e-12));
    // rank preservation
    for (std::size_t i = 0; i < v; ++i) {
      for (std::size_t j = 0; j < v; ++j) {
        if (z[i] > z[j]) CHECK(norm[i] >= norm[j]);
      }
    }
    std::uniform_int_distribution<std::size_t> kk(1, v);
    const double p = ps(rng);
    for (const DecodingSpec& dec :
         {DecodingSpec{Greedy{}}, DecodingSpec{TopK{kk(rng)}}, DecodingSpec{TopP{p}},
          DecodingSpec{TopP{p, TopPRule::kAtMost}}}) {
      const auto once = apply_decoding(norm, dec);
      double s = 0.0;
      for (std::size_t i = 0; i < v; ++i) {
        s += once[i];
        // support shrinks, values never drop on survivors
        if (once[i] > 0.0) CHECK(norm[i] > 0.0);
        if (once[i] > 0.0) CHECK(once[i] >= norm[i] * (1 - 1e-12));
      }
      CHECK(s == Approx(1.0).epsilon(1e-12));
      const auto twice = apply_decoding(once, dec);
      if (!std::holds_alternative<TopP>(dec)) {
        CHECK(twice == once);
      } else {
        CHECK(twice.support().size() <= once.support().size());
      }
    }
  }
}
