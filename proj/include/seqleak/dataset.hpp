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

#ifndef SEQLEAK_DATASET_HPP_
#define SEQLEAK_DATASET_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "seqleak/metrics.hpp"

namespace seqleak {

struct Dataset {
  std::vector<SequenceRecord> records;
  std::filesystem::path source;
  std::size_t vocab_size = 0;
};

// JSONL, one record per line:
//   {"id": "...", "prefix": [ids], "suffix": [ids], "tags": {...}}
// Blank lines are skipped. Throws DatasetError naming the line (and for
// vocabulary violations the record id and position) on the first problem.
Dataset parse_dataset(std::istream& in, std::size_t vocab_size,
                      const std::string& source_name = "<input>");
Dataset ingest_dataset(const std::filesystem::path& path, std::size_t vocab_size);

void write_dataset(std::ostream& out, const Dataset& dataset);

}  // namespace seqleak

#endif  // SEQLEAK_DATASET_HPP_
