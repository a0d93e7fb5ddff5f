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

#include "seqleak/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "seqleak/errors.hpp"
#include "seqleak/format.hpp"

namespace seqleak {
namespace {

constexpr double kTableSumTolerance = 1e-9;

std::vector<double> log_of(std::span<const double> probs) {
  std::vector<double> out(probs.size());
  std::transform(probs.begin(), probs.end(), out.begin(), [](double p) {
    return LogProb::from_prob(p).log();
  });
  return out;
}

}  // namespace

std::vector<Logits> LanguageModel::next_logits_batch(
    std::span<const Context> contexts) const {
  std::vector<Logits> out;
  out.reserve(contexts.size());
  for (const Context& c : contexts) out.push_back(next_logits(c));
  return out;
}

Logits next_distribution(const LanguageModel& model,
                         std::span<const Token> context) {
  const std::size_t v = model.vocab_size();
  for (std::size_t i = 0; i < context.size(); ++i) {
    if (context[i] >= v) {
      throw DatasetError("token id " + std::to_string(context[i]) +
                         " at context position " + std::to_string(i) +
                         " is outside vocabulary of size " + std::to_string(v));
    }
  }
  Logits logits = model.next_logits(context);
  if (logits.size() != v) {
    throw ModelError("model '" + model.name() + "' returned " +
                     std::to_string(logits.size()) + " logits, expected " +
                     std::to_string(v));
  }
  return logits;
}

// ---------------------------------------------------------------------------
// TableModel

TableModel::TableModel(std::size_t vocab_size, std::vector<double> default_probs,
                       std::string name)
    : vocab_size_(vocab_size), name_(std::move(name)) {
  if (vocab_size_ == 0) throw ConfigError("table model needs vocab_size >= 1");
  default_ = checked(std::move(default_probs));
}

std::vector<double> TableModel::checked(std::vector<double> probs) const {
  if (probs.size() != vocab_size_) {
    throw ConfigError("table distribution has " + std::to_string(probs.size()) +
                      " entries, expected " + std::to_string(vocab_size_));
  }
  // from_probs performs the range and sum checks.
  auto validated = ProbDist::from_probs(probs, kTableSumTolerance);
  (void)validated;
  return probs;
}

void TableModel::set_entry(Context context, std::vector<double> probs) {
  if (context.empty()) throw ConfigError("table entry context must be non-empty");
  for (Token t : context) {
    if (t >= vocab_size_) {
      throw ConfigError("table entry context id " + std::to_string(t) +
                        " outside vocabulary");
    }
  }
  longest_context_ = std::max(longest_context_, context.size());
  entries_[std::move(context)] = checked(std::move(probs));
}

const std::vector<double>& TableModel::probs_for(
    std::span<const Token> context) const {
  const std::size_t longest = std::min(longest_context_, context.size());
  for (std::size_t len = longest; len >= 1; --len) {
    Context key(context.end() - static_cast<std::ptrdiff_t>(len), context.end());
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  return default_;
}

Logits TableModel::next_logits(std::span<const Token> context) const {
  return Logits(log_of(probs_for(context)));
}

TableModel TableModel::from_json(const nlohmann::json& doc) {
  try {
    const std::size_t v = doc.at("vocab_size").get<std::size_t>();
    TableModel model(v, doc.at("default").get<std::vector<double>>(),
                     doc.value("name", std::string("table")));
    if (doc.contains("entries")) {
      for (const auto& entry : doc.at("entries")) {
        model.set_entry(entry.at("context").get<Context>(),
                        entry.at("probs").get<std::vector<double>>());
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid table model document: ") + e.what());
  }
}

nlohmann::json TableModel::to_json() const {
  nlohmann::json doc;
  doc["vocab_size"] = vocab_size_;
  doc["name"] = name_;
  doc["default"] = default_;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [context, probs] : entries_) {
    entries.push_back({{"context", context}, {"probs", probs}});
  }
  doc["entries"] = std::move(entries);
  return doc;
}

TableModel TableModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open table model file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("table model file " + path.string() +
                      " is not valid JSON at byte " + std::to_string(e.byte));
  }
  return from_json(doc);
}

void TableModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write table model file " + path.string());
  out << to_json().dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// NGramModel

NGramModel::NGramModel(std::size_t vocab_size, std::size_t order, double alpha,
                       std::string name)
    : vocab_size_(vocab_size), order_(order), alpha_(alpha), name_(std::move(name)) {
  if (vocab_size_ == 0) throw ConfigError("n-gram model needs vocab_size >= 1");
  if (order_ < 1) throw ConfigError("n-gram order must be >= 1");
  if (!(alpha_ >= 0.0) || !std::isfinite(alpha_)) {
    throw ConfigError("n-gram alpha must be finite and >= 0");
  }
}

std::vector<double> NGramModel::conditional(std::span<const Token> context) const {
  const std::size_t window = order_ - 1;
  std::vector<double> out(vocab_size_, 1.0 / static_cast<double>(vocab_size_));
  if (context.size() < window) return out;
  Context key(context.end() - static_cast<std::ptrdiff_t>(window), context.end());
  auto it = windows_.find(key);
  if (it == windows_.end()) return out;
  const WindowCounts& wc = it->second;
  const double denom =
      static_cast<double>(wc.total) + alpha_ * static_cast<double>(vocab_size_);
  if (denom == 0.0) return out;
  for (std::size_t t = 0; t < vocab_size_; ++t) {
    out[t] = (static_cast<double>(wc.counts[t]) + alpha_) / denom;
  }
  return out;
}

Logits NGramModel::next_logits(std::span<const Token> context) const {
  return Logits(log_of(conditional(context)));
}

NGramModel train_ngram(std::span<const Token> corpus, std::size_t order,
                       double alpha, std::size_t vocab_size, std::string name) {
  if (corpus.empty()) throw ConfigError("cannot train an n-gram model on an empty corpus");
  if (corpus.size() < order) {
    throw ConfigError("corpus of " + std::to_string(corpus.size()) +
                      " tokens is shorter than n-gram order " + std::to_string(order));
  }
  NGramModel model(vocab_size, order, alpha, std::move(name));
  for (Token t : corpus) {
    if (t >= vocab_size) {
      throw ConfigError("corpus token " + std::to_string(t) + " outside vocabulary");
    }
  }
  for (std::size_t end = order; end <= corpus.size(); ++end) {
    const std::size_t begin = end - order;
    Context key(corpus.begin() + static_cast<std::ptrdiff_t>(begin),
                corpus.begin() + static_cast<std::ptrdiff_t>(end - 1));
    auto& wc = model.windows_[key];
    if (wc.counts.empty()) wc.counts.assign(vocab_size, 0);
    ++wc.counts[corpus[end - 1]];
    ++wc.total;
  }
  return model;
}

TokenCorpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open corpus file " + path.string());
  TokenCorpus corpus;
  std::size_t declared = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '#') {
      constexpr std::string_view kKey = "#vocab_size:";
      if (line.rfind(kKey, 0) == 0) {
        try {
          declared = std::stoul(line.substr(kKey.size()));
        } catch (const std::exception&) {
          throw ConfigError("corpus " + path.string() + " line " +
                            std::to_string(line_no) + ": bad vocab_size");
        }
      }
      continue;
    }
    std::istringstream fields(line);
    std::string field;
    while (fields >> field) {
      std::size_t pos = 0;
      unsigned long id = 0;
      try {
        id = std::stoul(field, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != field.size() || field[0] == '-') {
        throw ConfigError("corpus " + path.string() + " line " +
                          std::to_string(line_no) + ": bad token '" + field + "'");
      }
      corpus.tokens.push_back(static_cast<Token>(id));
    }
  }
  Token max_id = 0;
  for (Token t : corpus.tokens) max_id = std::max(max_id, t);
  corpus.vocab_size = declared != 0 ? declared : static_cast<std::size_t>(max_id) + 1;
  return corpus;
}

// ---------------------------------------------------------------------------
// CachedModel

std::size_t CachedModel::VectorHash::operator()(const Context& c) const noexcept {
  // FNV-1a over the token ids.
  std::uint64_t h = 1469598103934665603ull;
  for (Token t : c) {
    h ^= t;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

CachedModel::CachedModel(std::shared_ptr<const LanguageModel> inner,
                         std::size_t capacity)
    : inner_(std::move(inner)), capacity_(capacity) {
  if (!inner_) throw ConfigError("cached model needs an inner model");
}

bool CachedModel::lookup(const Context& key, Logits& out) const {
  std::lock_guard lock(mu_);
  auto it = index_.find(key);
  if (it == index_.end()) {
    ++misses_;
    return false;
  }
  ++hits_;
  lru_.splice(lru_.begin(), lru_, it->second);
  out = it->second->second;
  return true;
}

void CachedModel::insert(Context key, Logits value) const {
  if (capacity_ == 0) return;
  std::lock_guard lock(mu_);
  if (auto it = index_.find(key); it != index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    return;
  }
  lru_.emplace_front(std::move(key), std::move(value));
  index_.emplace(lru_.front().first, lru_.begin());
  while (lru_.size() > capacity_) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
}

Logits CachedModel::next_logits(std::span<const Token> context) const {
  Context key(context.begin(), context.end());
  Logits out;
  if (lookup(key, out)) return out;
  out = inner_->next_logits(context);
  insert(std::move(key), out);
  return out;
}

std::vector<Logits> CachedModel::next_logits_batch(
    std::span<const Context> contexts) const {
  std::vector<Logits> out(contexts.size());
  std::vector<Context> missing;
  std::vector<std::size_t> missing_at;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    if (!lookup(contexts[i], out[i])) {
      missing.push_back(contexts[i]);
      missing_at.push_back(i);
    }
  }
  if (!missing.empty()) {
    std::vector<Logits> fetched = inner_->next_logits_batch(missing);
    for (std::size_t j = 0; j < missing.size(); ++j) {
      out[missing_at[j]] = fetched[j];
      insert(std::move(missing[j]), std::move(fetched[j]));
    }
  }
  return out;
}

std::uint64_t CachedModel::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::uint64_t CachedModel::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

}  // namespace seqleak
