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

#include "seqleak/dataset.hpp"

#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

#include "seqleak/errors.hpp"

namespace seqleak {
namespace {

std::vector<Token> token_array(const nlohmann::json& rec, const char* field,
                               const std::string& where) {
  if (!rec.contains(field) || !rec[field].is_array()) {
    throw DatasetError(where + ": field \"" + field + "\" must be an array of token ids");
  }
  std::vector<Token> out;
  out.reserve(rec[field].size());
  for (const auto& v : rec[field]) {
    if (!v.is_number_unsigned()) {
      throw DatasetError(where + ": field \"" + field +
                         "\" contains a non-token value " + v.dump());
    }
    const auto id = v.get<std::uint64_t>();
    if (id > std::numeric_limits<Token>::max()) {
      throw DatasetError(where + ": token id " + std::to_string(id) + " is too large");
    }
    out.push_back(static_cast<Token>(id));
  }
  return out;
}

}  // namespace

Dataset parse_dataset(std::istream& in, std::size_t vocab_size,
                      const std::string& source_name) {
  Dataset data;
  data.source = source_name;
  data.vocab_size = vocab_size;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source_name + ":" + std::to_string(line_no);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DatasetError(where + ": malformed JSON at byte " + std::to_string(e.byte));
    }
    if (!rec.is_object()) throw DatasetError(where + ": record must be a JSON object");
    if (!rec.contains("id") || !rec["id"].is_string()) {
      throw DatasetError(where + ": field \"id\" must be a string");
    }
    SequenceRecord r;
    r.id = rec["id"].get<std::string>();
    r.prefix = token_array(rec, "prefix", where);
    r.suffix = token_array(rec, "suffix", where);
    if (rec.contains("tags")) {
      if (!rec["tags"].is_object()) {
        throw DatasetError(where + ": field \"tags\" must be an object");
      }
      r.tags = rec["tags"];
    }
    if (r.prefix.empty() || r.suffix.empty()) {
      throw DatasetError(where + ": record '" + r.id +
                         "' needs a non-empty prefix and suffix");
    }
    auto check_vocab = [&](const std::vector<Token>& tokens, const char* field) {
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] >= vocab_size) {
          throw DatasetError(where + ": record '" + r.id + "' " + field + "[" +
                             std::to_string(i) + "] = " + std::to_string(tokens[i]) +
                             " is outside vocabulary of size " +
                             std::to_string(vocab_size));
        }
      }
    };
    check_vocab(r.prefix, "prefix");
    check_vocab(r.suffix, "suffix");
    if (!seen.insert(r.id).second) {
      throw DatasetError(where + ": duplicate record id '" + r.id + "'");
    }
    data.records.push_back(std::move(r));
  }
  if (data.records.empty()) {
    throw DatasetError(source_name + ": dataset contains no records");
  }
  return data;
}

Dataset ingest_dataset(const std::filesystem::path& path, std::size_t vocab_size) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset " + path.string());
  Dataset data = parse_dataset(in, vocab_size, path.string());
  data.source = path;
  return data;
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  for (const auto& r : dataset.records) {
    nlohmann::json rec{{"id", r.id}, {"prefix", r.prefix}, {"suffix", r.suffix},
                       {"tags", r.tags}};
    out << rec.dump() << '\n';
  }
}

}  // namespace seqleak
