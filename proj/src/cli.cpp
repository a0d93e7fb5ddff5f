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

#include "seqleak/cli.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "seqleak/analysis.hpp"
#include "seqleak/bridge.hpp"
#include "seqleak/dataset.hpp"
#include "seqleak/errors.hpp"
#include "seqleak/format.hpp"
#include "seqleak/montecarlo.hpp"
#include "seqleak/report.hpp"

namespace seqleak::cli {

// ---------------------------------------------------------------------------
// Configuration

ModelSpec parse_model_spec(const std::string& text) {
  ModelSpec spec;
  spec.text = text;
  auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ConfigError("model spec '" + text +
                      "' must be table:PATH, ngram:PATH,ORDER,ALPHA or bridge:ENDPOINT");
  }
  const std::string kind = text.substr(0, colon);
  const std::string arg = text.substr(colon + 1);
  if (arg.empty()) throw ConfigError("model spec '" + text + "' has an empty argument");
  if (kind == "table") {
    spec.kind = ModelSpec::Kind::kTable;
    spec.path = arg;
  } else if (kind == "ngram") {
    spec.kind = ModelSpec::Kind::kNGram;
    auto last = arg.rfind(',');
    auto mid = last == std::string::npos ? std::string::npos : arg.rfind(',', last - 1);
    if (last == std::string::npos || mid == std::string::npos || last == 0) {
      throw ConfigError("ngram model spec must be ngram:PATH,ORDER,ALPHA, got '" + text + "'");
    }
    spec.path = arg.substr(0, mid);
    try {
      std::size_t used = 0;
      const std::string order = arg.substr(mid + 1, last - mid - 1);
      spec.order = std::stoul(order, &used);
      if (used != order.size()) throw std::invalid_argument(order);
      const std::string alpha = arg.substr(last + 1);
      spec.alpha = std::stod(alpha, &used);
      if (used != alpha.size()) throw std::invalid_argument(alpha);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse ORDER/ALPHA in model spec '" + text + "'");
    }
    if (spec.order < 1) throw ConfigError("n-gram order must be >= 1");
    if (!(spec.alpha >= 0.0)) throw ConfigError("n-gram alpha must be >= 0");
  } else if (kind == "bridge") {
    spec.kind = ModelSpec::Kind::kBridge;
    spec.endpoint = arg;
    if (arg.rfind("exec:", 0) != 0 && arg.rfind("tcp:", 0) != 0) {
      throw ConfigError("bridge endpoint must be exec:COMMAND or tcp:HOST:PORT, got '" +
                        arg + "'");
    }
  } else {
    throw ConfigError("unknown model kind '" + kind + "'");
  }
  return spec;
}

std::shared_ptr<const LanguageModel> open_model(const ModelSpec& spec,
                                                std::size_t cache_size) {
  std::shared_ptr<const LanguageModel> inner;
  switch (spec.kind) {
    case ModelSpec::Kind::kTable:
      inner = std::make_shared<TableModel>(TableModel::load(spec.path));
      break;
    case ModelSpec::Kind::kNGram: {
      TokenCorpus corpus = load_corpus(spec.path);
      inner = std::make_shared<NGramModel>(train_ngram(
          corpus.tokens, spec.order, spec.alpha, corpus.vocab_size, spec.text));
      break;
    }
    case ModelSpec::Kind::kBridge:
      inner = RemoteModel::connect(spec.endpoint);
      break;
  }
  return std::make_shared<CachedModel>(std::move(inner), cache_size);
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {
      "score", "isp", "curve", "trends", "positions", "partial", "simulate", "sweep-prefix"};
  return names;
}

void RunConfig::validate() const {
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), subcommand) == names.end()) {
    throw ConfigError("unknown subcommand '" + subcommand + "'");
  }
  if (data.empty()) throw ConfigError("--data is required");
  if (models.empty()) throw ConfigError("--model is required");
  if (models.size() > 1 && subcommand != "trends") {
    throw ConfigError("only the trends subcommand accepts several --model values");
  }
  if (!model_labels.empty() && model_labels.size() != models.size()) {
    throw ConfigError("--model-label must be given once per --model");
  }
  seqleak::validate(norm);
  if (decodes.empty()) throw ConfigError("at least one --decode is required");
  for (const auto& d : decodes) seqleak::validate(d);
  if (decodes.size() > 1 && subcommand != "curve") {
    throw ConfigError("only the curve subcommand accepts several --decode values");
  }
  approx.validate();
  if (x_max < 1) throw ConfigError("--xmax must be >= 1");
  if (trials < 1) throw ConfigError("--trials must be >= 1");
  if (!write_csv && !write_json) throw ConfigError("--format selects no output");
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (lengths[i] == 0 || (i > 0 && lengths[i] <= lengths[i - 1])) {
      throw ConfigError("--lengths must be strictly increasing positive integers");
    }
  }
  if (subcommand == "sweep-prefix" && lengths.empty()) {
    throw ConfigError("sweep-prefix requires --lengths");
  }
  if (subcommand == "trends") {
    if (models.size() == 1 && lengths.size() < 3) {
      throw ConfigError(
          "trends needs either 3+ --model values or 3+ prefix --lengths to form a series");
    }
    if (models.size() > 1 && models.size() < 3) {
      throw ConfigError("a model-size series needs at least 3 models");
    }
    if (!model_labels.empty()) {
      for (std::size_t i = 1; i < model_labels.size(); ++i) {
        if (!(model_labels[i] > model_labels[i - 1])) {
          throw ConfigError("--model-label values must be strictly increasing");
        }
      }
    }
  }
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json doc;
  doc["subcommand"] = subcommand;
  doc["data"] = data.generic_string();
  nlohmann::json model_list = nlohmann::json::array();
  for (const auto& m : models) model_list.push_back(m.text);
  doc["models"] = model_list;
  doc["model_labels"] = model_labels;
  doc["norm"] = to_string(norm);
  nlohmann::json decode_list = nlohmann::json::array();
  for (const auto& d : decodes) decode_list.push_back(to_string(d));
  doc["decodes"] = decode_list;
  doc["n"] = n;
  doc["branch_width"] = approx.branch_width ? nlohmann::json(*approx.branch_width) : nlohmann::json(nullptr);
  doc["head_mass"] = approx.head_mass ? nlohmann::json(*approx.head_mass) : nlohmann::json(nullptr);
  doc["max_expansions"] =
      approx.max_expansions ? nlohmann::json(*approx.max_expansions) : nlohmann::json(nullptr);
  doc["xmax"] = x_max;
  doc["lengths"] = lengths;
  doc["seed"] = seed;
  doc["trials"] = trials;
  doc["top"] = top_n;
  doc["log_probs"] = log_probs;
  doc["threshold"] = threshold == ThresholdRule::kAtLeast ? "at-least" : "strictly-above";
  nlohmann::json formats = nlohmann::json::array();
  if (write_csv) formats.push_back("csv");
  if (write_json) formats.push_back("json");
  doc["formats"] = formats;
  return doc;
}

std::string RunConfig::hash() const { return fnv1a_hex(to_json().dump()); }

// ---------------------------------------------------------------------------
// Execution helpers

namespace {

// Evaluates fn(i) for i in [0, count) on up to `jobs` threads; results keep
// input order and the lowest-index failure is rethrown.
template <class T>
std::vector<T> parallel_map(std::size_t count, std::size_t jobs,
                            const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(count);
  std::vector<std::exception_ptr> errors(count);
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, std::max<std::size_t>(count, 1));
  auto work = [&](std::size_t w) {
    for (std::size_t i = w; i < count; i += jobs) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs <= 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < jobs; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

struct Session {
  explicit Session(const RunConfig& c) : cfg(c) {}
  const RunConfig& cfg;
  std::vector<std::shared_ptr<const LanguageModel>> models;
  Dataset data;
  std::vector<Table> tables;
  nlohmann::json summary = nlohmann::json::object();
  bool budget_exhausted = false;

  const LanguageModel& model() const { return *models.front(); }
  Scheme scheme(std::size_t i = 0) const { return Scheme{cfg.norm, cfg.decodes.at(i)}; }
  const std::vector<SequenceRecord>& records() const { return data.records; }
};

nlohmann::json number_or_null(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string join_esps(const std::vector<SeriesPoint>& series) {
  std::string out;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (i) out += ';';
    out += format_double(series[i].esp);
  }
  return out;
}

void check_n_fits(const Session& s) {
  for (const auto& r : s.records()) {
    if (s.cfg.n > r.suffix.size()) {
      throw ConfigError("--n " + std::to_string(s.cfg.n) + " exceeds the " +
                        std::to_string(r.suffix.size()) + "-token suffix of record '" +
                        r.id + "'");
    }
  }
}

void check_lengths_fit(const Session& s) {
  if (s.cfg.lengths.empty()) return;
  for (const auto& r : s.records()) {
    if (s.cfg.lengths.back() > r.prefix.size()) {
      throw ConfigError("--lengths value " + std::to_string(s.cfg.lengths.back()) +
                        " exceeds the " + std::to_string(r.prefix.size()) +
                        "-token prefix of record '" + r.id + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_score(Session& s) {
  const Scheme scheme = s.scheme();
  struct Row {
    LogProb esp;
    bool memorized = false;
  };
  auto rows = parallel_map<Row>(s.records().size(), s.cfg.jobs, [&](std::size_t i) {
    const auto& r = s.records()[i];
    return Row{exact_sample_log_probability(s.model(), scheme, r),
               is_memorized_greedy(s.model(), s.cfg.norm, r)};
  });
  std::vector<std::string> cols = {"id", "prefix_len", "suffix_len", "esp"};
  if (s.cfg.log_probs) cols.push_back("log_esp");
  cols.push_back("greedy_memorized");
  Table table("score", cols);
  std::vector<double> esps;
  std::size_t memorized = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = s.records()[i];
    std::vector<nlohmann::json> cells = {r.id, r.prefix.size(), r.suffix.size(),
                                         rows[i].esp.prob()};
    if (s.cfg.log_probs) cells.push_back(rows[i].esp.log());
    cells.push_back(rows[i].memorized);
    table.add_row(std::move(cells));
    esps.push_back(rows[i].esp.prob());
    if (rows[i].memorized) ++memorized;
  }
  s.tables.push_back(std::move(table));
  s.summary["records"] = esps.size();
  s.summary["scheme"] = to_string(scheme);
  s.summary["extraction_rate"] = extraction_rate(esps);
  s.summary["greedy_memorized_fraction"] =
      static_cast<double>(memorized) / static_cast<double>(esps.size());
}

std::vector<ISPResult> compute_isp(Session& s) {
  check_n_fits(s);
  const Scheme scheme = s.scheme();
  auto results = parallel_map<ISPResult>(s.records().size(), s.cfg.jobs, [&](std::size_t i) {
    return n_isp_approx(s.model(), scheme, s.records()[i], s.cfg.n, s.cfg.approx);
  });
  for (const auto& r : results) s.budget_exhausted = s.budget_exhausted || r.budget_limited;
  return results;
}

void cmd_isp(Session& s) {
  const auto results = compute_isp(s);
  Table table("isp", {"id", "n", "value", "eps", "upper", "expansions", "budget_limited",
                      "dominant_pattern"});
  Table breakdown("isp_breakdown", {"id", "pattern", "mass"});
  std::size_t limited = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    const auto& id = s.records()[i].id;
    auto dom = dominant_pattern(r);
    table.add_row({id, r.n, r.value, r.eps, r.upper(), r.expansions, r.budget_limited,
                   dom ? nlohmann::json(dom->label()) : nlohmann::json(nullptr)});
    for (const auto& [pattern, mass] : r.breakdown) {
      breakdown.add_row({id, pattern.label(), mass});
    }
    if (r.budget_limited) ++limited;
  }
  s.tables.push_back(std::move(table));
  s.tables.push_back(std::move(breakdown));
  s.summary["records"] = results.size();
  s.summary["scheme"] = to_string(s.scheme());
  s.summary["n"] = s.cfg.n;
  s.summary["budget_limited_records"] = limited;
}

void cmd_curve(Session& s) {
  const std::size_t count = s.records().size();
  const Scheme greedy{s.cfg.norm, Greedy{}};
  auto greedy_esps = parallel_map<double>(count, s.cfg.jobs, [&](std::size_t i) {
    return exact_sample_probability(s.model(), greedy, s.records()[i]);
  });
  const double greedy_rate = extraction_rate(greedy_esps);

  std::vector<LeakageCurve> curves;
  nlohmann::json per_scheme = nlohmann::json::array();
  for (std::size_t d = 0; d < s.cfg.decodes.size(); ++d) {
    const Scheme scheme = s.scheme(d);
    auto esps = std::holds_alternative<Greedy>(scheme.decode)
                    ? greedy_esps
                    : parallel_map<double>(count, s.cfg.jobs, [&](std::size_t i) {
                        return exact_sample_probability(s.model(), scheme, s.records()[i]);
                      });
    LeakageCurve curve =
        leakage_curve(esps, s.cfg.x_max, to_string(scheme.decode), s.cfg.threshold);
    auto crossing = first_crossing(curve, greedy_rate);
    per_scheme.push_back(
        {{"scheme", to_string(scheme)},
         {"extraction_rate", extraction_rate(esps)},
         {"fraction_at_xmax", curve.fraction(s.cfg.x_max)},
         {"underestimation_at_xmax",
          number_or_null(underestimation_factor(curve, greedy_rate, s.cfg.x_max))},
         {"first_x_above_greedy",
          crossing ? nlohmann::json(*crossing) : nlohmann::json(nullptr)}});
    curves.push_back(std::move(curve));
  }
  std::vector<std::string> cols = {"x"};
  for (const auto& c : curves) cols.push_back(c.scheme);
  Table table("curve", cols);
  for (std::uint64_t x = 1; x <= s.cfg.x_max; ++x) {
    std::vector<nlohmann::json> cells = {x};
    for (const auto& c : curves) cells.push_back(c.fraction(x));
    table.add_row(std::move(cells));
  }
  s.tables.push_back(std::move(table));
  s.summary["records"] = count;
  s.summary["greedy_rate"] = greedy_rate;
  s.summary["schemes"] = per_scheme;
}

std::vector<std::vector<SeriesPoint>> build_series(Session& s) {
  const Scheme scheme = s.scheme();
  if (s.models.size() > 1) {
    std::vector<const LanguageModel*> models;
    for (const auto& m : s.models) models.push_back(m.get());
    std::vector<double> labels = s.cfg.model_labels;
    if (labels.empty()) {
      for (std::size_t i = 0; i < models.size(); ++i) labels.push_back(static_cast<double>(i + 1));
    }
    return parallel_map<std::vector<SeriesPoint>>(
        s.records().size(), s.cfg.jobs, [&](std::size_t i) {
          return esp_series_over_models(models, labels, scheme, s.records()[i]);
        });
  }
  check_lengths_fit(s);
  return parallel_map<std::vector<SeriesPoint>>(
      s.records().size(), s.cfg.jobs, [&](std::size_t i) {
        return esp_series_over_prefixes(s.model(), scheme, s.records()[i], s.cfg.lengths);
      });
}

void cmd_trends(Session& s) {
  const auto series = build_series(s);
  Table rows("trends", {"id", "class", "mixed", "esps"});
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto c = classify_trend(series[i]);
    rows.add_row({s.records()[i].id, to_string(c.cls), c.mixed, join_esps(series[i])});
  }
  const TrendTable tt = trend_table(series);
  Table table("trend_table", {"class", "count", "percentage"});
  for (TrendClass c : kAllTrendClasses) {
    table.add_row({to_string(c), tt.counts[static_cast<std::size_t>(c)], tt.percentage(c)});
  }
  s.tables.push_back(std::move(rows));
  s.tables.push_back(std::move(table));
  s.summary["records"] = tt.total;
  s.summary["axis"] = s.models.size() > 1 ? "model" : "prefix_length";
  s.summary["decreasing_percentage"] = tt.decreasing_percentage();
  s.summary["mixed_series"] = tt.mixed;
}

void cmd_positions(Session& s) {
  const Scheme scheme = s.scheme();
  const std::size_t m = s.records().front().suffix.size();
  for (const auto& r : s.records()) {
    if (r.suffix.size() != m) {
      throw DatasetError("positions needs a common suffix length; record '" + r.id +
                         "' has " + std::to_string(r.suffix.size()) + ", expected " +
                         std::to_string(m));
    }
  }
  auto rows = parallel_map<std::vector<double>>(s.records().size(), s.cfg.jobs,
                                                [&](std::size_t i) {
                                                  return suffix_token_probabilities(
                                                      s.model(), scheme, s.records()[i]);
                                                });
  const PositionProfile profile = position_profile(rows);
  Table table("positions", {"position", "mean_tp"});
  for (std::size_t i = 0; i < profile.mean_tp.size(); ++i) {
    table.add_row({i + 1, profile.mean_tp[i]});
  }
  s.tables.push_back(std::move(table));
  s.summary["records"] = profile.count;
  s.summary["scheme"] = to_string(scheme);
  s.summary["last_to_first_ratio"] = number_or_null(profile.last_to_first_ratio());
}

void cmd_partial(Session& s) {
  const auto results = compute_isp(s);
  const Scheme scheme = s.scheme();
  auto esps = parallel_map<double>(s.records().size(), s.cfg.jobs, [&](std::size_t i) {
    return exact_sample_probability(s.model(), scheme, s.records()[i]);
  });
  std::vector<ScoredIsp> scored;
  for (std::size_t i = 0; i < results.size(); ++i) {
    scored.push_back({s.records()[i].id, s.records()[i].suffix.size(), esps[i], results[i]});
  }
  const PartialExactReport report = partial_vs_exact(scored);
  Table rows("partial", {"id", "esp", "isp_value", "isp_upper", "verdict"});
  for (const auto& row : report.rows) {
    rows.add_row({row.id, row.esp, row.isp_value, row.isp_upper, to_string(row.verdict)});
  }
  Table patterns("patterns", {"pattern", "count"});
  for (const auto& pc : pattern_breakdown(scored, s.cfg.top_n)) {
    patterns.add_row({pc.pattern.label(), pc.count});
  }
  s.tables.push_back(std::move(rows));
  s.tables.push_back(std::move(patterns));
  s.summary["records"] = report.rows.size();
  s.summary["scheme"] = to_string(scheme);
  s.summary["n"] = s.cfg.n;
  s.summary["partial_easier_pct"] = report.partial_easier_pct;
  s.summary["exact_easier_pct"] = report.exact_easier_pct;
  s.summary["inconclusive_pct"] = report.inconclusive_pct;
  s.summary["top"] = s.cfg.top_n;
}

void cmd_simulate(Session& s) {
  check_n_fits(s);
  const Scheme scheme = s.scheme();
  struct Row {
    double esp = 0.0;
    double isp_lower = 0.0;
    double isp_upper = 0.0;
    bool exact_isp = false;
    FreqEstimate exact;
    FreqEstimate partial;
  };
  // Closed forms run record-parallel; each record's rollouts are split over
  // the same worker count. Both are deterministic in (seed, record, trial).
  std::vector<Row> rows(s.records().size());
  const SamplerConfig sampler{s.cfg.trials, s.cfg.seed, s.cfg.jobs};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = s.records()[i];
    Row& row = rows[i];
    row.esp = exact_sample_probability(s.model(), scheme, r);
    try {
      row.isp_lower = row.isp_upper = n_isp_bruteforce(s.model(), scheme, r, s.cfg.n);
      row.exact_isp = true;
    } catch (const InfeasibleError&) {
      const ISPResult isp = n_isp_approx(s.model(), scheme, r, s.cfg.n, s.cfg.approx);
      row.isp_lower = isp.value;
      row.isp_upper = isp.upper();
      s.budget_exhausted = s.budget_exhausted || isp.budget_limited;
    }
    const auto hist = mismatch_histogram(s.model(), scheme, r, sampler);
    row.exact = FreqEstimate::from_counts(hist[0], s.cfg.trials);
    row.partial = FreqEstimate::from_counts(hist[s.cfg.n], s.cfg.trials);
  }
  Table table("simulate", {"id", "esp", "freq_exact", "stderr_exact", "agree_exact",
                           "isp_lower", "isp_upper", "isp_exact", "freq_partial",
                           "stderr_partial", "agree_partial"});
  std::size_t agree_exact = 0;
  std::size_t agree_partial = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& row = rows[i];
    const bool ok_exact = row.exact.agrees_with(row.esp);
    // An interval closed form agrees when the estimate is within 4 standard
    // errors of some point of [lower, upper].
    const double nearest = std::clamp(row.partial.freq, row.isp_lower, row.isp_upper);
    const bool ok_partial = row.partial.agrees_with(nearest);
    agree_exact += ok_exact;
    agree_partial += ok_partial;
    table.add_row({s.records()[i].id, row.esp, row.exact.freq, row.exact.std_error, ok_exact,
                   row.isp_lower, row.isp_upper, row.exact_isp, row.partial.freq,
                   row.partial.std_error, ok_partial});
  }
  s.tables.push_back(std::move(table));
  s.summary["records"] = rows.size();
  s.summary["scheme"] = to_string(scheme);
  s.summary["n"] = s.cfg.n;
  s.summary["trials"] = s.cfg.trials;
  s.summary["seed"] = s.cfg.seed;
  s.summary["sigmas"] = 4.0;
  s.summary["exact_agreements"] = agree_exact;
  s.summary["partial_agreements"] = agree_partial;
  s.summary["all_agree"] = agree_exact == rows.size() && agree_partial == rows.size();
}

void cmd_sweep_prefix(Session& s) {
  check_lengths_fit(s);
  const Scheme scheme = s.scheme();
  auto series = parallel_map<std::vector<SeriesPoint>>(
      s.records().size(), s.cfg.jobs, [&](std::size_t i) {
        return esp_series_over_prefixes(s.model(), scheme, s.records()[i], s.cfg.lengths);
      });
  Table table("sweep", {"id", "length", "esp"});
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (const auto& p : series[i]) {
      table.add_row({s.records()[i].id, static_cast<std::size_t>(p.label), p.esp});
    }
  }
  s.tables.push_back(std::move(table));
  s.summary["records"] = series.size();
  s.summary["scheme"] = to_string(scheme);
  s.summary["lengths"] = s.cfg.lengths;
}

void write_outputs(const Session& s) {
  const auto& cfg = s.cfg;
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) throw ConfigError("cannot create output directory " + cfg.out.string());
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& t : s.tables) {
    if (cfg.write_csv) {
      write_text_file(cfg.out / (t.name() + ".csv"), t.to_csv());
      outputs.push_back(t.name() + ".csv");
    }
  }
  if (cfg.write_json) {
    nlohmann::json doc;
    doc["subcommand"] = cfg.subcommand;
    doc["summary"] = sanitize_json(s.summary);
    nlohmann::json tables = nlohmann::json::object();
    for (const auto& t : s.tables) tables[t.name()] = t.to_json();
    doc["tables"] = std::move(tables);
    write_text_file(cfg.out / (cfg.subcommand + ".json"), doc.dump(2) + "\n");
    outputs.push_back(cfg.subcommand + ".json");
  }
  nlohmann::json manifest;
  manifest["tool"] = "seqleak";
  manifest["version"] = kToolVersion;
  manifest["subcommand"] = cfg.subcommand;
  manifest["config"] = cfg.to_json();
  manifest["config_hash"] = cfg.hash();
  manifest["seed"] = cfg.seed;
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : s.models) {
    models.push_back({{"name", m->name()}, {"vocab_size", m->vocab_size()}});
  }
  manifest["models"] = models;
  manifest["records"] = s.data.records.size();
  manifest["budget_exhausted"] = s.budget_exhausted;
  manifest["outputs"] = outputs;
  write_text_file(cfg.out / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace

int run_command(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  Session s(cfg);
  for (const auto& spec : cfg.models) s.models.push_back(open_model(spec, cfg.cache_size));
  const std::size_t v = s.models.front()->vocab_size();
  for (const auto& m : s.models) {
    if (m->vocab_size() != v) {
      throw ConfigError("all models in a series must share one vocabulary (saw " +
                        std::to_string(v) + " and " + std::to_string(m->vocab_size()) + ")");
    }
  }
  s.data = ingest_dataset(cfg.data, v);

  static const std::map<std::string, void (*)(Session&)> kCommands = {
      {"score", cmd_score},       {"isp", cmd_isp},
      {"curve", cmd_curve},       {"trends", cmd_trends},
      {"positions", cmd_positions}, {"partial", cmd_partial},
      {"simulate", cmd_simulate}, {"sweep-prefix", cmd_sweep_prefix},
  };
  kCommands.at(cfg.subcommand)(s);
  write_outputs(s);
  log << cfg.subcommand << ": " << s.data.records.size() << " records -> "
      << cfg.out.string() << "\n";
  if (s.budget_exhausted) {
    log << cfg.subcommand << ": expansion budget exhausted; eps covers the unexplored mass\n";
    return kExitBudget;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Front end

namespace {

struct RawOptions {
  std::string data;
  std::vector<std::string> models;
  std::vector<double> model_labels;
  std::string norm = "softmax";
  std::vector<std::string> decodes;
  std::size_t n = 1;
  std::size_t branch_width = 0;
  double head_mass = 0.0;
  std::uint64_t max_expansions = 0;
  std::uint64_t x_max = 50;
  std::vector<std::size_t> lengths;
  std::uint64_t seed = 0;
  std::uint64_t trials = 100000;
  std::size_t jobs = 1;
  std::size_t top_n = 100;
  std::size_t cache_size = 1 << 16;
  std::string out = "out";
  std::string format = "csv,json";
  bool log_probs = false;
  bool strict_threshold = false;
};

void add_common_options(CLI::App& sub, RawOptions& o) {
  sub.add_option("--data", o.data, "JSONL dataset of prefix/suffix records")->required();
  sub.add_option("--model", o.models,
                 "table:PATH | ngram:PATH,ORDER,ALPHA | bridge:ENDPOINT (repeat for a "
                 "model-size series in trends)")
      ->required();
  sub.add_option("--model-label", o.model_labels, "covariate value per --model (e.g. size)");
  sub.add_option("--norm", o.norm, "softmax | temp:K");
  sub.add_option("--decode", o.decodes,
                 "greedy | sample | topk:K | topp:P[:atmost] (repeat in curve)");
  sub.add_option("--n", o.n, "number of mismatching suffix positions");
  sub.add_option("--branch-width", o.branch_width,
                 "expand the top-B non-matching tokens per branch point");
  sub.add_option("--head-mass", o.head_mass,
                 "expand non-matching tokens until this fraction of their mass is covered");
  sub.add_option("--max-expansions", o.max_expansions, "cap on model queries per record");
  sub.add_option("--xmax", o.x_max, "largest query budget X on leakage curves");
  sub.add_option("--lengths", o.lengths, "increasing prefix lengths, e.g. 10,20,30")
      ->delimiter(',');
  sub.add_option("--seed", o.seed, "Monte Carlo seed");
  sub.add_option("--trials", o.trials, "Monte Carlo rollouts per record");
  sub.add_option("--jobs", o.jobs, "worker threads (0 = all cores)");
  sub.add_option("--top", o.top_n, "records tallied in the mismatch-pattern table");
  sub.add_option("--cache-size", o.cache_size, "per-model context cache entries");
  sub.add_option("--out", o.out, "output directory");
  sub.add_option("--format", o.format, "csv, json or csv,json");
  sub.add_flag("--log-probs", o.log_probs, "add a log_esp column to score output");
  sub.add_flag("--strict-threshold", o.strict_threshold,
               "count a record as leaked at X only when ESP > 1/X");
}

RunConfig to_config(const std::string& subcommand, const RawOptions& o, const CLI::App& sub) {
  RunConfig cfg;
  cfg.subcommand = subcommand;
  cfg.data = o.data;
  for (const auto& m : o.models) cfg.models.push_back(parse_model_spec(m));
  cfg.model_labels = o.model_labels;
  cfg.norm = parse_normalization(o.norm);
  if (o.decodes.empty()) {
    cfg.decodes.push_back(Sample{});
  } else {
    for (const auto& d : o.decodes) cfg.decodes.push_back(parse_decoding(d));
  }
  cfg.n = o.n;
  if (sub.count("--branch-width") > 0) cfg.approx.branch_width = o.branch_width;
  if (sub.count("--head-mass") > 0) cfg.approx.head_mass = o.head_mass;
  if (sub.count("--max-expansions") > 0) cfg.approx.max_expansions = o.max_expansions;
  cfg.x_max = o.x_max;
  cfg.lengths = o.lengths;
  cfg.seed = o.seed;
  cfg.trials = o.trials;
  cfg.jobs = o.jobs;
  cfg.top_n = o.top_n;
  cfg.cache_size = o.cache_size;
  cfg.out = o.out;
  cfg.write_csv = false;
  cfg.write_json = false;
  std::stringstream formats(o.format);
  std::string f;
  while (std::getline(formats, f, ',')) {
    if (f == "csv") {
      cfg.write_csv = true;
    } else if (f == "json") {
      cfg.write_json = true;
    } else {
      throw ConfigError("unknown --format '" + f + "'");
    }
  }
  cfg.log_probs = o.log_probs;
  cfg.threshold = o.strict_threshold ? ThresholdRule::kStrictlyAbove : ThresholdRule::kAtLeast;
  return cfg;
}

void print_error(std::ostream& err, int code, const char* kind, const std::string& message) {
  nlohmann::json obj{{"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
  err << obj.dump() << "\n";
}

}  // namespace

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app("Sequence-level training-data leakage probabilities", "seqleak");
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  RawOptions raw;
  const std::map<std::string, std::string> descriptions = {
      {"score", "exact sample probability (ESP) per record"},
      {"isp", "n-mismatch sample probability with error bound and pattern breakdown"},
      {"curve", "fraction of records leaked within X queries, per decoding scheme"},
      {"trends", "classify each record's ESP series over prefix lengths or models"},
      {"positions", "mean token probability per suffix position"},
      {"partial", "partial-vs-exact verdicts and dominant mismatch patterns"},
      {"simulate", "Monte Carlo cross-check of ESP and n-mismatch probability"},
      {"sweep-prefix", "ESP per record for each prefix length"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : subcommands()) {
    CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
    add_common_options(*sub, raw);
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, kExitConfig, "config", e.what());
    return kExitConfig;
  }

  try {
    std::string chosen;
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) chosen = name;
    }
    const RunConfig cfg = to_config(chosen, raw, *subs.at(chosen));
    return run_command(cfg, out);
  } catch (const ConfigError& e) {
    print_error(err, kExitConfig, "config", e.what());
    return kExitConfig;
  } catch (const InfeasibleError& e) {
    print_error(err, kExitConfig, "config", e.what());
    return kExitConfig;
  } catch (const DatasetError& e) {
    print_error(err, kExitDataset, "dataset", e.what());
    return kExitDataset;
  } catch (const ModelError& e) {
    print_error(err, kExitModel, "model", e.what());
    return kExitModel;
  } catch (const std::exception& e) {
    print_error(err, kExitInternal, "internal", e.what());
    return kExitInternal;
  }
}

}  // namespace seqleak::cli
