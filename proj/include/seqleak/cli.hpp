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

#ifndef SEQLEAK_CLI_HPP_
#define SEQLEAK_CLI_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqleak/analysis.hpp"
#include "seqleak/distributions.hpp"
#include "seqleak/metrics.hpp"
#include "seqleak/models.hpp"

namespace seqleak::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitDataset = 3,
  kExitModel = 4,
  kExitBudget = 5,
};

// --model table:PATH | ngram:PATH,ORDER,ALPHA | bridge:ENDPOINT
struct ModelSpec {
  enum class Kind { kTable, kNGram, kBridge };
  Kind kind = Kind::kTable;
  std::string text;
  std::filesystem::path path;
  std::size_t order = 2;
  double alpha = 1.0;
  std::string endpoint;
};
ModelSpec parse_model_spec(const std::string& text);

// Loads (or connects to) the model named by `spec`, wrapped in an LRU cache.
std::shared_ptr<const LanguageModel> open_model(const ModelSpec& spec,
                                                std::size_t cache_size);

struct RunConfig {
  std::string subcommand;
  std::filesystem::path data;
  std::vector<ModelSpec> models;
  std::vector<double> model_labels;
  NormalizationSpec norm = Softmax{};
  std::vector<DecodingSpec> decodes;
  std::size_t n = 1;
  ApproxConfig approx;
  std::uint64_t x_max = 50;
  std::vector<std::size_t> lengths;
  std::uint64_t seed = 0;
  std::uint64_t trials = 100000;
  std::size_t jobs = 1;
  std::size_t top_n = 100;
  std::size_t cache_size = 1 << 16;
  std::filesystem::path out = "out";
  bool write_csv = true;
  bool write_json = true;
  bool log_probs = false;
  ThresholdRule threshold = ThresholdRule::kAtLeast;

  // Checks everything that can be checked without touching a model or the
  // dataset. Throws ConfigError.
  void validate() const;

  // Canonical form recorded in the manifest. Worker count, cache size and
  // the output directory are excluded: they do not change results.
  nlohmann::json to_json() const;
  std::string hash() const;
};

// All subcommand names, in help order.
const std::vector<std::string>& subcommands();

// Runs one validated configuration, writing reports under cfg.out. Returns
// kExitOk or kExitBudget; failures are thrown.
int run_command(const RunConfig& cfg, std::ostream& log);

// Full front end: parses argv, runs, and on failure prints a one-line JSON
// error object to `err`. Returns the process exit code.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace seqleak::cli

#endif  // SEQLEAK_CLI_HPP_
