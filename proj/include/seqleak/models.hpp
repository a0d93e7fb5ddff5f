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

#ifndef SEQLEAK_MODELS_HPP_
#define SEQLEAK_MODELS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqleak/distributions.hpp"

namespace seqleak {

using Context = std::vector<Token>;

// Conditional next-token provider. Implementations must be deterministic:
// the same context always yields identical logits.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual std::size_t vocab_size() const = 0;
  virtual const std::string& name() const = 0;

  // Raw logits for the token following `context`. Callers go through
  // next_distribution(), which validates the context first.
  virtual Logits next_logits(std::span<const Token> context) const = 0;

  // Several contexts at once. Remote providers pipeline these.
  virtual std::vector<Logits> next_logits_batch(
      std::span<const Context> contexts) const;
};

// Checks every context id against the vocabulary, then queries the model.
// Throws DatasetError on an out-of-vocabulary id.
Logits next_distribution(const LanguageModel& model,
                         std::span<const Token> context);

// Explicit probability tables keyed by context. A query uses the entry for
// the longest listed context that is a suffix of the query context, and the
// default distribution when none matches.
class TableModel final : public LanguageModel {
 public:
  TableModel(std::size_t vocab_size, std::vector<double> default_probs,
             std::string name = "table");

  void set_entry(Context context, std::vector<double> probs);

  std::size_t vocab_size() const override { return vocab_size_; }
  const std::string& name() const override { return name_; }
  Logits next_logits(std::span<const Token> context) const override;

  const std::vector<double>& probs_for(std::span<const Token> context) const;
  const std::vector<double>& default_probs() const { return default_; }
  const std::map<Context, std::vector<double>>& entries() const {
    return entries_;
  }

  // {"vocab_size": V, "default": [...], "entries": [{"context": [...],
  // "probs": [...]}]}
  static TableModel from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
  static TableModel load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<double> checked(std::vector<double> probs) const;

  std::size_t vocab_size_;
  std::string name_;
  std::vector<double> default_;
  std::map<Context, std::vector<double>> entries_;
  std::size_t longest_context_ = 0;
};

// Add-alpha smoothed n-gram model. Conditionals are
// (count + alpha) / (total + alpha * V) over the last order-1 tokens.
// Windows never seen in training (including contexts shorter than order-1)
// fall back to the uniform distribution.
class NGramModel final : public LanguageModel {
 public:
  NGramModel(std::size_t vocab_size, std::size_t order, double alpha,
             std::string name = "ngram");

  std::size_t vocab_size() const override { return vocab_size_; }
  const std::string& name() const override { return name_; }
  Logits next_logits(std::span<const Token> context) const override;

  std::vector<double> conditional(std::span<const Token> context) const;

  std::size_t order() const { return order_; }
  double alpha() const { return alpha_; }

 private:
  friend NGramModel train_ngram(std::span<const Token>, std::size_t, double,
                                std::size_t, std::string);
  struct WindowCounts {
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;
  };

  std::size_t vocab_size_;
  std::size_t order_;
  double alpha_;
  std::string name_;
  std::map<Context, WindowCounts> windows_;
};

// Counts every order-length sliding window in `corpus`.
NGramModel train_ngram(std::span<const Token> corpus, std::size_t order,
                       double alpha, std::size_t vocab_size,
                       std::string name = "ngram");

// Corpus file: whitespace-separated token ids. Lines starting with '#' are
// comments; "#vocab_size: V" declares V, otherwise V = max id + 1.
struct TokenCorpus {
  std::vector<Token> tokens;
  std::size_t vocab_size = 0;
};
TokenCorpus load_corpus(const std::filesystem::path& path);

// Bounded LRU cache in front of another model. Safe for concurrent use.
class CachedModel final : public LanguageModel {
 public:
  CachedModel(std::shared_ptr<const LanguageModel> inner, std::size_t capacity);

  std::size_t vocab_size() const override { return inner_->vocab_size(); }
  const std::string& name() const override { return inner_->name(); }
  Logits next_logits(std::span<const Token> context) const override;
  std::vector<Logits> next_logits_batch(
      std::span<const Context> contexts) const override;

  std::uint64_t hits() const;
  std::uint64_t misses() const;

 private:
  struct VectorHash {
    std::size_t operator()(const Context& c) const noexcept;
  };
  using Lru = std::list<std::pair<Context, Logits>>;

  bool lookup(const Context& key, Logits& out) const;
  void insert(Context key, Logits value) const;

  std::shared_ptr<const LanguageModel> inner_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  mutable Lru lru_;
  mutable std::unordered_map<Context, Lru::iterator, VectorHash> index_;
  mutable std::uint64_t hits_ = 0;
  mutable std::uint64_t misses_ = 0;
};

}  // namespace seqleak

#endif  // SEQLEAK_MODELS_HPP_
