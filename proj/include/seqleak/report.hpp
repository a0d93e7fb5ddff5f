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

#ifndef SEQLEAK_REPORT_HPP_
#define SEQLEAK_REPORT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace seqleak {

// A rectangular report with typed cells. CSV renders numbers as shortest
// round-trip decimals and infinities as "inf"/"-inf"; JSON renders them as
// null.
class Table {
 public:
  Table(std::string name, std::vector<std::string> columns);

  void add_row(std::vector<nlohmann::json> cells);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return rows_.size(); }

  std::string to_csv() const;
  nlohmann::json to_json() const;

 private:
  std::string name_;
  std::vector<std::string> columns_;
  std::vector<std::vector<nlohmann::json>> rows_;
};

std::string csv_cell(const nlohmann::json& cell);

// Replaces NaN/inf numbers with null so the document is valid JSON.
nlohmann::json sanitize_json(nlohmann::json value);

// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& data);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace seqleak

#endif  // SEQLEAK_REPORT_HPP_
