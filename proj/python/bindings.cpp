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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <iostream>
#include <sstream>

#include "seqleak/analysis.hpp"
#include "seqleak/cli.hpp"
#include "seqleak/distributions.hpp"
#include "seqleak/errors.hpp"
#include "seqleak/metrics.hpp"
#include "seqleak/models.hpp"
#include "seqleak/montecarlo.hpp"

namespace py = pybind11;
using namespace seqleak;

namespace {

Scheme scheme_of(const std::string& norm, const std::string& decode) {
  Scheme s{parse_normalization(norm), parse_decoding(decode)};
  validate(s.norm);
  validate(s.decode);
  return s;
}

SequenceRecord record_of(const std::vector<Token>& prefix, const std::vector<Token>& suffix,
                         const std::string& id) {
  SequenceRecord r;
  r.id = id;
  r.prefix = prefix;
  r.suffix = suffix;
  return r;
}

ApproxConfig approx_of(std::optional<std::size_t> width, std::optional<double> mass,
                       std::optional<std::uint64_t> max_expansions) {
  ApproxConfig cfg{width, mass, max_expansions};
  cfg.validate();
  return cfg;
}

py::dict isp_dict(const ISPResult& r) {
  py::dict breakdown;
  for (const auto& [pattern, mass] : r.breakdown) {
    breakdown[py::tuple(py::cast(pattern.positions))] = mass;
  }
  py::dict d;
  d["n"] = r.n;
  d["value"] = r.value;
  d["eps"] = r.eps;
  d["upper"] = r.upper();
  d["expansions"] = r.expansions;
  d["budget_limited"] = r.budget_limited;
  d["breakdown"] = breakdown;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact and partial extraction probabilities for language models";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DatasetError>(m, "DatasetError", base.ptr());
  auto model_err = py::register_exception<ModelError>(m, "ModelError", base.ptr());
  py::register_exception<ProtocolError>(m, "ProtocolError", model_err.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());

  m.def(
      "effective_distribution",
      [](const std::vector<double>& logits, const std::string& norm, const std::string& decode) {
        auto d = effective_distribution(Logits(logits), scheme_of(norm, decode));
        return std::vector<double>(d.probs().begin(), d.probs().end());
      },
      py::arg("logits"), py::arg("norm") = "softmax", py::arg("decode") = "sample");

  py::class_<LanguageModel, std::shared_ptr<LanguageModel>>(m, "LanguageModel")
      .def_property_readonly("vocab_size", &LanguageModel::vocab_size)
      .def_property_readonly("name", &LanguageModel::name)
      .def("next_logits", [](const LanguageModel& lm, const std::vector<Token>& ctx) {
        auto z = next_distribution(lm, ctx);
        return std::vector<double>(z.values().begin(), z.values().end());
      });

  py::class_<TableModel, LanguageModel, std::shared_ptr<TableModel>>(m, "TableModel")
      .def(py::init<std::size_t, std::vector<double>, std::string>(), py::arg("vocab_size"),
           py::arg("default"), py::arg("name") = "table")
      .def("set_entry", &TableModel::set_entry, py::arg("context"), py::arg("probs"))
      .def_static("load", &TableModel::load)
      .def("save", &TableModel::save)
      .def_static("from_json",
                  [](const std::string& text) {
                    return TableModel::from_json(nlohmann::json::parse(text));
                  })
      .def("to_json", [](const TableModel& t) { return t.to_json().dump(); });

  py::class_<NGramModel, LanguageModel, std::shared_ptr<NGramModel>>(m, "NGramModel")
      .def_property_readonly("order", &NGramModel::order)
      .def_property_readonly("alpha", &NGramModel::alpha)
      .def("conditional", [](const NGramModel& g, const std::vector<Token>& ctx) {
        return g.conditional(ctx);
      });

  m.def(
      "train_ngram",
      [](const std::vector<Token>& corpus, std::size_t order, double alpha,
         std::size_t vocab_size, const std::string& name) {
        return std::make_shared<NGramModel>(train_ngram(corpus, order, alpha, vocab_size, name));
      },
      py::arg("corpus"), py::arg("order"), py::arg("alpha"), py::arg("vocab_size"),
      py::arg("name") = "ngram");

  m.def(
      "exact_sample_probability",
      [](const LanguageModel& lm, const std::vector<Token>& prefix,
         const std::vector<Token>& suffix, const std::string& norm, const std::string& decode) {
        return exact_sample_probability(lm, scheme_of(norm, decode),
                                        record_of(prefix, suffix, "py"));
      },
      py::arg("model"), py::arg("prefix"), py::arg("suffix"), py::arg("norm") = "softmax",
      py::arg("decode") = "sample");

  m.def(
      "exact_sample_log_probability",
      [](const LanguageModel& lm, const std::vector<Token>& prefix,
         const std::vector<Token>& suffix, const std::string& norm, const std::string& decode) {
        return exact_sample_log_probability(lm, scheme_of(norm, decode),
                                            record_of(prefix, suffix, "py"))
            .log();
      },
      py::arg("model"), py::arg("prefix"), py::arg("suffix"), py::arg("norm") = "softmax",
      py::arg("decode") = "sample");

  m.def(
      "token_probabilities",
      [](const LanguageModel& lm, const std::vector<Token>& prefix,
         const std::vector<Token>& suffix, const std::string& norm, const std::string& decode) {
        return suffix_token_probabilities(lm, scheme_of(norm, decode),
                                          record_of(prefix, suffix, "py"));
      },
      py::arg("model"), py::arg("prefix"), py::arg("suffix"), py::arg("norm") = "softmax",
      py::arg("decode") = "sample");

  m.def(
      "is_memorized_greedy",
      [](const LanguageModel& lm, const std::vector<Token>& prefix,
         const std::vector<Token>& suffix, const std::string& norm) {
        return is_memorized_greedy(lm, parse_normalization(norm),
                                   record_of(prefix, suffix, "py"));
      },
      py::arg("model"), py::arg("prefix"), py::arg("suffix"), py::arg("norm") = "softmax");

  m.def(
      "n_isp_bruteforce",
      [](const LanguageModel& lm, const std::vector<Token>& prefix,
         const std::vector<Token>& suffix, std::size_t n, const std::string& norm,
         const std::string& decode) {
        return n_isp_bruteforce(lm, scheme_of(norm, decode), record_of(prefix, suffix, "py"), n);
      },
      py::arg("model"), py::arg("prefix"), py::arg("suffix"), py::arg("n"),
      py::arg("norm") = "softmax", py::arg("decode") = "sample");

  m.def(
      "n_isp",
      [](const LanguageModel& lm, const std::vector<Token>& prefix,
         const std::vector<Token>& suffix, std::size_t n, const std::string& norm,
         const std::string& decode, std::optional<std::size_t> branch_width,
         std::optional<double> head_mass, std::optional<std::uint64_t> max_expansions) {
        return isp_dict(n_isp_approx(lm, scheme_of(norm, decode),
                                     record_of(prefix, suffix, "py"), n,
                                     approx_of(branch_width, head_mass, max_expansions)));
      },
      py::arg("model"), py::arg("prefix"), py::arg("suffix"), py::arg("n"),
      py::arg("norm") = "softmax", py::arg("decode") = "sample",
      py::arg("branch_width") = py::none(), py::arg("head_mass") = py::none(),
      py::arg("max_expansions") = py::none());

  m.def(
      "cumulative_isp",
      [](const LanguageModel& lm, const std::vector<Token>& prefix,
         const std::vector<Token>& suffix, std::size_t n, const std::string& norm,
         const std::string& decode) {
        auto b = cumulative_isp(lm, scheme_of(norm, decode), record_of(prefix, suffix, "py"), n);
        return py::make_tuple(b.value, b.eps);
      },
      py::arg("model"), py::arg("prefix"), py::arg("suffix"), py::arg("n"),
      py::arg("norm") = "softmax", py::arg("decode") = "sample");

  m.def(
      "estimate_leak_freq",
      [](const LanguageModel& lm, const std::vector<Token>& prefix,
         const std::vector<Token>& suffix, const std::string& norm, const std::string& decode,
         std::uint64_t trials, std::uint64_t seed) {
        SamplerConfig cfg;
        cfg.trials = trials;
        cfg.seed = seed;
        auto f = estimate_leak_freq(lm, scheme_of(norm, decode),
                                    record_of(prefix, suffix, "py"), cfg);
        return py::make_tuple(f.freq, f.std_error);
      },
      py::arg("model"), py::arg("prefix"), py::arg("suffix"), py::arg("norm") = "softmax",
      py::arg("decode") = "sample", py::arg("trials") = 100000, py::arg("seed") = 0);

  m.def("extraction_rate",
        [](const std::vector<double>& esps) { return extraction_rate(esps); });

  m.def(
      "leakage_curve",
      [](const std::vector<double>& esps, std::uint64_t x_max, bool strict) {
        auto c = leakage_curve(esps, x_max, "",
                               strict ? ThresholdRule::kStrictlyAbove : ThresholdRule::kAtLeast);
        return c.points;
      },
      py::arg("esps"), py::arg("x_max"), py::arg("strict") = false);

  m.def(
      "classify_trend",
      [](const std::vector<double>& esps, std::optional<std::vector<double>> labels) {
        std::vector<SeriesPoint> s;
        for (std::size_t i = 0; i < esps.size(); ++i) {
          s.push_back({labels ? labels->at(i) : static_cast<double>(i + 1), esps[i]});
        }
        auto c = classify_trend(s);
        return py::make_tuple(to_string(c.cls), c.mixed);
      },
      py::arg("esps"), py::arg("labels") = py::none());

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"seqleak"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));

  m.attr("__version__") = cli::kToolVersion;
}
