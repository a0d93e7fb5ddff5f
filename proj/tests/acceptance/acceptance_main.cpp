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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances are fixed below and not tuned per run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqleak/analysis.hpp"
#include "seqleak/distributions.hpp"
#include "seqleak/format.hpp"
#include "seqleak/metrics.hpp"
#include "seqleak/models.hpp"
#include "seqleak/montecarlo.hpp"
#include "test_support.hpp"
#include "trend_oracle.hpp"

using namespace seqleak;
namespace fs = std::filesystem;

namespace {

constexpr double kBruteTol = 1e-9;        // approx vs exhaustive
constexpr double kBoundSlack = 1e-12;     // float slack on bound checks
constexpr double kIdentityTol = 1e-12;    // decoding identities
constexpr double kPartitionTol = 1e-6;    // cumulative ISP at n = m
constexpr double kSigmas = 4.0;           // Monte Carlo band
constexpr std::uint64_t kMcTrials = 100000;
constexpr double kBruteSeconds = 10.0;
constexpr double kCliSeconds = 30.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (failures.size() < 5) failures.push_back(what);
    }
  }
};

// ---------------------------------------------------------------------------
// shared random instances for criteria 1 and 2

struct Instance {
  TableModel model;
  SequenceRecord record;
  Scheme scheme;
};

std::vector<Instance> make_instances() {
  std::mt19937_64 rng(20240917);
  std::uniform_int_distribution<std::size_t> vd(2, 8);
  std::uniform_int_distribution<std::size_t> md(2, 4);
  std::uniform_int_distribution<Token> pd(0, 1);
  std::vector<Instance> out;
  for (int i = 0; i < 100; ++i) {
    const std::size_t v = vd(rng);
    const std::size_t m = md(rng);
    const Context prefix{pd(rng), pd(rng)};
    auto schemes = testing::all_schemes(v);
    Scheme scheme = schemes[i % schemes.size()];
    auto model = testing::random_table_model(rng, v, prefix, m, i % 3 == 0 ? 0.2 : 0.0);
    auto record = testing::random_record(rng, v, m, prefix, "inst" + std::to_string(i));
    out.push_back({std::move(model), std::move(record), scheme});
  }
  return out;
}

Outcome criterion_bruteforce(const std::vector<Instance>& instances) {
  Outcome o;
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t checks = 0;
  for (const auto& inst : instances) {
    for (std::size_t n = 0; n <= 2; ++n) {
      auto approx = n_isp_approx(inst.model, inst.scheme, inst.record, n);
      const double exact = n_isp_bruteforce(inst.model, inst.scheme, inst.record, n);
      const double diff = std::abs(approx.value - exact);
      worst = std::max(worst, diff);
      o.expect(diff <= kBruteTol && approx.eps == 0.0,
               inst.record.id + " n=" + std::to_string(n) + " diff=" + format_double(diff) +
                   " eps=" + format_double(approx.eps));
      ++checks;
    }
  }
  const double secs = seconds_since(t0);
  o.expect(secs < kBruteSeconds, "runtime " + format_double(secs) + " s");
  std::ostringstream d;
  d << checks << " checks, max |diff| " << worst << ", " << secs << " s";
  o.detail = d.str();
  return o;
}

Outcome criterion_bounds(const std::vector<Instance>& instances) {
  Outcome o;
  std::size_t bound_checks = 0;
  std::size_t mono_checks = 0;
  std::size_t open_bounds = 0;
  for (const auto& inst : instances) {
    for (std::size_t n = 0; n <= 2; ++n) {
      const double exact = n_isp_bruteforce(inst.model, inst.scheme, inst.record, n);
      const std::string tag = inst.record.id + " n=" + std::to_string(n);
      auto check_bound = [&](const ISPResult& r, const std::string& cfg) {
        ++bound_checks;
        open_bounds += r.eps > 0.0;
        o.expect(r.value <= exact + kBoundSlack && exact <= r.upper() + kBoundSlack,
                 tag + " " + cfg + " exact " + format_double(exact) + " not in [" +
                     format_double(r.value) + ", " + format_double(r.upper()) + "]");
      };
      auto check_refines = [&](const ISPResult& coarse, const ISPResult& fine,
                               const std::string& what) {
        ++mono_checks;
        o.expect(fine.value >= coarse.value - kBoundSlack && fine.eps <= coarse.eps + kBoundSlack,
                 tag + " " + what + " not monotone");
      };
      std::vector<ISPResult> widths;
      for (std::size_t b : {1, 2, 4}) {
        widths.push_back(
            n_isp_approx(inst.model, inst.scheme, inst.record, n, ApproxConfig::width(b)));
        check_bound(widths.back(), "width " + std::to_string(b));
      }
      check_refines(widths[0], widths[1], "width 1->2");
      check_refines(widths[1], widths[2], "width 2->4");
      auto h5 = n_isp_approx(inst.model, inst.scheme, inst.record, n, ApproxConfig::mass(0.5));
      auto h9 = n_isp_approx(inst.model, inst.scheme, inst.record, n, ApproxConfig::mass(0.9));
      check_bound(h5, "mass 0.5");
      check_bound(h9, "mass 0.9");
      check_refines(h5, h9, "mass 0.5->0.9");
    }
  }
  o.detail = std::to_string(bound_checks) + " bound checks (" + std::to_string(open_bounds) +
             " with eps > 0), " + std::to_string(mono_checks) + " refinement checks";
  return o;
}

// ---------------------------------------------------------------------------
// 3: sampling agreement

bool usable_closed_form(double p) {
  // exact 0/1 or comfortably inside (0, 1) so N trials see both outcomes
  return p == 0.0 || p == 1.0 || (p >= 0.01 && p <= 0.99);
}

Outcome criterion_montecarlo() {
  Outcome o;
  const auto corpus = load_corpus(fs::path(SEQLEAK_DATA_DIR) / "toy" / "corpus.txt");
  const auto model = train_ngram(corpus.tokens, 2, 0.5, corpus.vocab_size, "toy-bigram");
  const std::vector<std::pair<std::string, Scheme>> families = {
      {"greedy", Scheme{Softmax{}, Greedy{}}},
      {"sample", Scheme{Softmax{}, Sample{}}},
      {"topk", Scheme{Softmax{}, TopK{3}}},
      {"topp", Scheme{Softmax{}, TopP{0.8}}},
      {"temp", Scheme{SoftmaxTemperature{0.6}, Sample{}}},
  };
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> start(0, corpus.tokens.size() - 6);
  std::size_t scenarios = 0;
  std::size_t assertions = 0;
  std::size_t interior = 0;
  for (const auto& [family, scheme] : families) {
    int kept = 0;
    for (int attempt = 0; kept < 10 && attempt < 5000; ++attempt) {
      const std::size_t s = start(rng);
      SequenceRecord rec;
      rec.id = family + "-" + std::to_string(s);
      rec.prefix.assign(corpus.tokens.begin() + s, corpus.tokens.begin() + s + 3);
      rec.suffix.assign(corpus.tokens.begin() + s + 3, corpus.tokens.begin() + s + 6);
      const double esp = exact_sample_probability(model, scheme, rec);
      const double isp1 = n_isp_bruteforce(model, scheme, rec, 1);
      if (!usable_closed_form(esp) || !usable_closed_form(isp1)) continue;
      ++kept;
      ++scenarios;
      SamplerConfig cfg;
      cfg.trials = kMcTrials;
      cfg.seed = 1000 + scenarios;
      cfg.workers = 0;
      auto hist = mismatch_histogram(model, scheme, rec, cfg);
      const auto f0 = FreqEstimate::from_counts(hist[0], cfg.trials);
      const auto f1 = FreqEstimate::from_counts(hist[1], cfg.trials);
      assertions += 2;
      interior += (esp > 0.0 && esp < 1.0) + (isp1 > 0.0 && isp1 < 1.0);
      o.expect(f0.agrees_with(esp, kSigmas), rec.id + " ESP " + format_double(esp) +
                                                 " freq " + format_double(f0.freq));
      o.expect(f1.agrees_with(isp1, kSigmas), rec.id + " 1-ISP " + format_double(isp1) +
                                                  " freq " + format_double(f1.freq));
    }
    o.expect(kept == 10, family + ": only " + std::to_string(kept) + " usable scenarios");
  }
  o.detail = std::to_string(scenarios) + " scenarios x " + std::to_string(kMcTrials) +
             " trials, " + std::to_string(assertions) + " assertions at 4 sigma (" +
             std::to_string(interior) + " with 0 < p < 1)";
  return o;
}

// ---------------------------------------------------------------------------
// 4: decoding identities

bool same_dist(const ProbDist& a, const ProbDist& b) {
  if (a.size() != b.size() || a.support() != b.support()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > kIdentityTol) return false;
  }
  return true;
}

Outcome criterion_identities() {
  Outcome o;
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<std::size_t> vd(2, 40);
  std::uniform_real_distribution<double> unit(0, 1);
  const double ninf = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000; ++i) {
    const std::size_t v = vd(rng);
    auto z = testing::random_logits(rng, v, 1.0 + 4 * unit(rng));
    if (i % 4 == 1) {
      for (double& x : z) x = std::round(x);  // plenty of exact ties
    }
    if (i % 5 == 2) {
      for (std::size_t t = 1; t < v; t += 3) z[t] = ninf;
    }
    const Logits logits(z);
    const auto base = softmax(logits);
    const std::string tag = "dist " + std::to_string(i);
    o.expect(same_dist(effective_distribution(logits, Softmax{}, TopK{v}), base),
             tag + ": top-k(V) != sample");
    o.expect(same_dist(effective_distribution(logits, Softmax{}, TopP{1.0}), base),
             tag + ": top-p(1) != sample");
    o.expect(same_dist(effective_distribution(logits, Softmax{}, TopK{1}),
                       effective_distribution(logits, Softmax{}, Greedy{})),
             tag + ": top-k(1) != greedy");
    o.expect(same_dist(normalize(logits, SoftmaxTemperature{1.0}), base),
             tag + ": temp(1) != softmax");
  }
  o.detail = "1000 distributions x 4 identities";
  return o;
}

// ---------------------------------------------------------------------------
// 5: leakage curve shape on a constructed dataset

Outcome criterion_curve() {
  Outcome o;
  // two-step suffixes; the per-step probabilities multiply to the target ESPs
  TableModel model(4, {0.25, 0.25, 0.25, 0.25}, "fig2");
  struct Row {
    Token prefix;
    std::vector<double> step1;  // target token 0
    std::vector<double> step2;  // target token 2
  };
  const std::vector<Row> rows = {
      {0, {0.8, 0.1, 0.05, 0.05}, {0.3, 0.1, 0.5, 0.1}},    // 0.4, greedy hit
      {1, {0.6, 0.2, 0.1, 0.1}, {0.0, 0.5, 0.5, 0.0}},      // 0.3, tie lost to index 1
      {2, {0.4, 0.6, 0.0, 0.0}, {0.25, 0.25, 0.5, 0.0}},    // 0.2
      {3, {0.25, 0.25, 0.25, 0.25}, {0.4, 0.4, 0.2, 0.0}},  // 0.05
  };
  std::vector<SequenceRecord> records;
  for (const auto& r : rows) {
    model.set_entry({r.prefix}, r.step1);
    model.set_entry({r.prefix, 0}, r.step2);
    records.push_back({"fig2-" + std::to_string(r.prefix), {r.prefix}, {0, 2}, {}});
  }
  std::vector<double> greedy_esp, sample_esp;
  std::size_t memorized = 0;
  for (const auto& rec : records) {
    greedy_esp.push_back(exact_sample_probability(model, Scheme{Softmax{}, Greedy{}}, rec));
    sample_esp.push_back(exact_sample_probability(model, Scheme{Softmax{}, Sample{}}, rec));
    memorized += is_memorized_greedy(model, Softmax{}, rec);
  }
  const std::vector<double> target{0.4, 0.3, 0.2, 0.05};
  for (std::size_t i = 0; i < 4; ++i) {
    o.expect(std::abs(sample_esp[i] - target[i]) < 1e-12,
             "sampling ESP " + format_double(sample_esp[i]));
  }
  o.expect(memorized == 1, "memorized count " + std::to_string(memorized));

  const auto greedy = leakage_curve(greedy_esp, 50, "greedy");
  const auto sample = leakage_curve(sample_esp, 50, "sample");
  for (const auto& [x, f] : greedy.points) {
    o.expect(f == 0.25, "greedy curve at X=" + std::to_string(x) + " is " + format_double(f));
  }
  // hand thresholds: 1/X against {0.4, 0.3, 0.2, 0.05}
  auto expected = [](std::uint64_t x) {
    if (x <= 2) return 0.0;
    if (x == 3) return 0.25;
    if (x == 4) return 0.5;
    if (x < 20) return 0.75;
    return 1.0;
  };
  for (const auto& [x, f] : sample.points) {
    o.expect(f == expected(x), "sampling curve at X=" + std::to_string(x) + " is " +
                                   format_double(f) + ", expected " +
                                   format_double(expected(x)));
  }
  const auto cross = first_crossing(sample, 0.25);
  o.expect(cross == 4u, "crossing at " + (cross ? std::to_string(*cross) : "none"));
  const auto full = first_crossing(sample, 1.0 - 1e-12);
  o.expect(full == 20u, "reaches 1.0 at " + (full ? std::to_string(*full) : "never"));
  o.detail = "greedy 0.25 flat; sampling crosses greedy at X=" +
             (cross ? std::to_string(*cross) : "none") + ", reaches 1 at X=" +
             (full ? std::to_string(*full) : "never");
  return o;
}

// ---------------------------------------------------------------------------
// 6: trend classifier

std::vector<SeriesPoint> as_series(const std::vector<double>& y) {
  std::vector<SeriesPoint> s;
  for (std::size_t i = 0; i < y.size(); ++i) s.push_back({10.0 * (i + 1), y[i]});
  return s;
}

Outcome criterion_trends() {
  Outcome o;
  std::vector<double> v{0.01, 0.02, 0.05, 0.1, 0.3};
  std::map<std::string, int> counts;
  int perms = 0;
  do {
    ++perms;
    const auto got = classify_trend(as_series(v));
    const std::string name = to_string(got.cls);
    std::ostringstream tag;
    for (double x : v) tag << x << ' ';
    o.expect(name == testing::oracle_trend(v), "ordering " + tag.str() + "-> " + name +
                                                   " vs oracle " + testing::oracle_trend(v));
    o.expect(is_decreasing(got.cls) == (v.back() < v.front()),
             "direction mismatch on " + tag.str());
    ++counts[name];
  } while (std::next_permutation(v.begin(), v.end()));
  int total = 0;
  int dec = 0;
  for (const auto& [name, c] : counts) {
    total += c;
    if (name.ends_with("-dec")) dec += c;
  }
  o.expect(perms == 120 && total == 120, "orderings " + std::to_string(perms));
  o.expect(counts.size() == 6, "only " + std::to_string(counts.size()) + " classes seen");
  o.expect(dec == 60, "decreasing share " + std::to_string(dec));

  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> unit(1e-6, 1.0);
  std::uniform_int_distribution<std::size_t> len(3, 8);
  const std::vector<std::function<double(double)>> transforms = {
      [](double x) { return std::log(x); },
      [](double x) { return std::exp(5 * x); },
      [](double x) { return x * x * x; },
      [](double x) { return 3 * x + 7; },
      [](double x) { return x < 0.5 ? x : 10 * x; },
      [](double x) { return std::sqrt(x); },
  };
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> y(len(rng));
    for (double& x : y) x = unit(rng);
    const auto ref = classify_trend(as_series(y));
    const auto& f = transforms[i % transforms.size()];
    std::vector<double> t(y);
    for (double& x : t) x = f(x);
    const auto got = classify_trend(as_series(t));
    o.expect(got.cls == ref.cls && got.mixed == ref.mixed,
             "series " + std::to_string(i) + " changed under transform " +
                 std::to_string(i % transforms.size()));
  }
  o.detail = "120 orderings match oracle, " + std::to_string(dec) +
             " dec / 60 expected, 1000 transformed series";
  return o;
}

// ---------------------------------------------------------------------------
// 7: outcome-space partition

Outcome criterion_partition() {
  Outcome o;
  std::mt19937_64 rng(7070);
  const std::vector<std::pair<std::string, Scheme>> schemes = {
      {"sample", Scheme{Softmax{}, Sample{}}},
      {"temp:0.5", Scheme{SoftmaxTemperature{0.5}, Sample{}}},
      {"temp:2", Scheme{SoftmaxTemperature{2.0}, Sample{}}},
      {"topk:3", Scheme{Softmax{}, TopK{3}}},
      {"topp:1", Scheme{Softmax{}, TopP{1.0}}},
  };
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    auto model = testing::random_table_model(rng, 3, {0}, 2);
    auto rec = testing::random_record(rng, 3, 2, {0});
    for (const auto& [name, scheme] : schemes) {
      auto c = cumulative_isp(model, scheme, rec, 2);
      const double diff = std::abs(c.value - 1.0);
      worst = std::max(worst, diff);
      o.expect(diff <= kPartitionTol && c.eps == 0.0,
               name + " total " + format_double(c.value));
    }
  }
  o.detail = "20 models x 5 full-support schemes, max |total - 1| " + format_double(worst);
  return o;
}

// ---------------------------------------------------------------------------
// 8: partial vs exact at toy scale

Outcome criterion_partial() {
  Outcome o;
  const Scheme scheme{Softmax{}, Sample{}};
  // peaked: every step puts 0.9 on the true token
  TableModel peaked(6, {0.9, 0.02, 0.02, 0.02, 0.02, 0.02}, "peaked");
  SequenceRecord flat{"peaked", {0}, {0, 0, 0, 0}, {}};
  const double esp_p = exact_sample_probability(peaked, scheme, flat);
  const auto isp_p = n_isp_approx(peaked, scheme, flat, 1);
  const auto narrow_p = n_isp_approx(peaked, scheme, flat, 1, ApproxConfig::width(1));
  o.expect(partial_verdict(esp_p, isp_p) == PartialVerdict::kExactEasier,
           "peaked verdict " + to_string(partial_verdict(esp_p, isp_p)));
  o.expect(partial_verdict(esp_p, narrow_p) == PartialVerdict::kExactEasier,
           "peaked verdict with width 1 " + to_string(partial_verdict(esp_p, narrow_p)));

  // synonym: at position 3 the true token 3 competes with token 5, and the
  // sentence continues identically after either
  TableModel syn(6, std::vector<double>(6, 1.0 / 6), "synonym");
  syn.set_entry({0}, {0.01, 0.95, 0.01, 0.01, 0.01, 0.01});
  syn.set_entry({1}, {0.01, 0.01, 0.95, 0.01, 0.01, 0.01});
  syn.set_entry({2}, {0.0125, 0.0125, 0.0125, 0.45, 0.0125, 0.5});
  syn.set_entry({3}, {0.01, 0.01, 0.01, 0.01, 0.95, 0.01});
  syn.set_entry({5}, {0.01, 0.01, 0.01, 0.01, 0.95, 0.01});
  SequenceRecord named{"synonym", {0}, {1, 2, 3, 4}, {}};
  const double esp_s = exact_sample_probability(syn, scheme, named);
  const auto isp_s = n_isp_approx(syn, scheme, named, 1);
  const auto dom = dominant_pattern(isp_s);
  o.expect(partial_verdict(esp_s, isp_s) == PartialVerdict::kPartialEasier,
           "synonym verdict " + to_string(partial_verdict(esp_s, isp_s)));
  o.expect(dom && dom->label() == "(3)",
           "dominant pattern " + (dom ? dom->label() : std::string("none")));
  std::vector<ScoredIsp> scored{{flat.id, 4, esp_p, isp_p}, {named.id, 4, esp_s, isp_s}};
  const auto report = partial_vs_exact(scored);
  o.expect(report.exact_easier_pct == 50.0 && report.partial_easier_pct == 50.0,
           "report percentages");
  std::ostringstream d;
  d << "peaked ESP " << esp_p << " > 1-ISP " << isp_p.value << "; synonym ESP " << esp_s
    << " < 1-ISP " << isp_s.value << " dominant " << (dom ? dom->label() : "none");
  o.detail = d.str();
  return o;
}

// ---------------------------------------------------------------------------
// 9: CLI end to end

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

Outcome criterion_cli() {
  Outcome o;
  const fs::path toy = fs::path(SEQLEAK_DATA_DIR) / "toy";
  const std::string data = shell_quote((toy / "dataset.jsonl").string());
  const std::string table = shell_quote("table:" + (toy / "table.json").string());
  const std::string corpus = "ngram:" + (toy / "corpus.txt").string();
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"score", "--model " + table},
      {"isp", "--model " + table + " --n 1"},
      {"curve", "--model " + table +
                    " --decode greedy --decode sample --decode topk:2 --decode topp:0.9"},
      {"trends", "--model " + shell_quote(corpus + ",1,0.5") + " --model " +
                     shell_quote(corpus + ",2,0.5") + " --model " +
                     shell_quote(corpus + ",3,0.5")},
      {"positions", "--model " + table},
      {"partial", "--model " + table + " --n 1 --top 10"},
      {"simulate", "--model " + table + " --trials 100000 --seed 9 --jobs 0"},
      {"sweep-prefix", "--model " + shell_quote(corpus + ",4,0.5") + " --lengths 1,2,3,4"},
  };
  std::map<std::string, std::string> golden;
  {
    std::ifstream in(fs::path(SEQLEAK_GOLDEN_DIR) / "csv_headers.txt");
    std::string name, header;
    while (in >> name >> header) golden[name] = header;
  }
  const fs::path root = testing::temp_dir("acceptance_cli");
  const auto t0 = Clock::now();
  std::size_t files = 0;
  for (const auto& [sub, args] : commands) {
    std::map<std::string, std::string> first;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / (sub + "_" + std::to_string(rep));
      const std::string cmd = shell_quote(SEQLEAK_CLI) + " " + sub + " --data " + data + " " +
                              args + " --out " + shell_quote(out.string()) + " >/dev/null";
      const int rc = std::system(cmd.c_str());
      o.expect(rc == 0, sub + " exited with " + std::to_string(rc));
      if (rc != 0) break;
      std::map<std::string, std::string> produced;
      for (const auto& e : fs::directory_iterator(out)) {
        produced[e.path().filename().string()] = slurp(e.path());
      }
      if (rep == 0) {
        first = produced;
        const auto manifest = nlohmann::json::parse(produced["manifest.json"], nullptr, false);
        o.expect(!manifest.is_discarded() && manifest["subcommand"] == sub,
                 sub + " manifest invalid");
        for (const auto& [name, text] : produced) {
          ++files;
          if (name.ends_with(".json")) {
            o.expect(!nlohmann::json::parse(text, nullptr, false).is_discarded(),
                     sub + "/" + name + " is not valid JSON");
            continue;
          }
          std::istringstream lines(text);
          std::string header;
          std::getline(lines, header);
          o.expect(golden.count(name) && golden[name] == header,
                   sub + "/" + name + " header " + header);
          const std::size_t width = split_csv_line(header).size();
          std::string line;
          std::size_t rows = 0;
          while (std::getline(lines, line)) {
            ++rows;
            o.expect(split_csv_line(line).size() == width, sub + "/" + name + " ragged row");
          }
          o.expect(rows > 0, sub + "/" + name + " has no rows");
        }
      } else {
        o.expect(produced == first, sub + " rerun differs");
      }
    }
  }
  const double secs = seconds_since(t0);
  o.expect(secs < kCliSeconds, "runtime " + format_double(secs) + " s");
  std::ostringstream d;
  d << commands.size() << " subcommands x 2 runs, " << files << " files identical, " << secs
    << " s";
  o.detail = d.str();
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  const auto instances = make_instances();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 brute-force equivalence", [&] { return criterion_bruteforce(instances); }},
      {"2 bound validity and refinement", [&] { return criterion_bounds(instances); }},
      {"3 Monte Carlo agreement", criterion_montecarlo},
      {"4 decoding identities", criterion_identities},
      {"5 leakage curve shape", criterion_curve},
      {"6 trend classifier", criterion_trends},
      {"7 outcome-space partition", criterion_partition},
      {"8 partial vs exact verdicts", criterion_partial},
      {"9 CLI end to end", criterion_cli},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << "  (" << o.detail
              << ")\n";
    for (const auto& f : o.failures) std::cout << "      " << f << "\n";
    failed += !o.pass;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " failed")
            << "\n";
  return failed == 0 ? 0 : 1;
}
