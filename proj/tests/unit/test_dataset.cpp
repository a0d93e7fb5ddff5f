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

#include <sstream>

#include "seqleak/dataset.hpp"
#include "seqleak/errors.hpp"

using namespace seqleak;

namespace {

std::string error_of(const std::string& text, std::size_t v = 5) {
  std::istringstream in(text);
  try {
    parse_dataset(in, v, "d.jsonl");
  } catch (const DatasetError& e) {
    return e.what();
  }
  return "";
}

bool has(const std::string& s, const std::string& part) {
  return s.find(part) != std::string::npos;
}

}  // namespace

TEST_CASE("valid dataset") {
  std::istringstream in(
      "{\"id\":\"a\",\"prefix\":[1,2],\"suffix\":[3],\"tags\":{\"k\":1}}\n"
      "\n"
      "{\"id\":\"b\",\"prefix\":[0],\"suffix\":[4,4]}\n");
  auto d = parse_dataset(in, 5, "d.jsonl");
  REQUIRE(d.records.size() == 2);
  CHECK(d.records[0].tags["k"] == 1);
  CHECK(d.records[1].suffix == std::vector<Token>{4, 4});
  CHECK(d.vocab_size == 5);

  std::ostringstream out;
  write_dataset(out, d);
  std::istringstream again(out.str());
  auto d2 = parse_dataset(again, 5);
  CHECK(d2.records[1].prefix == d.records[1].prefix);
}

TEST_CASE("dataset diagnostics") {
  auto oov = error_of("{\"id\":\"a\",\"prefix\":[1],\"suffix\":[3]}\n"
                      "{\"id\":\"rec7\",\"prefix\":[1,9],\"suffix\":[3]}\n");
  CHECK(has(oov, "d.jsonl:2"));
  CHECK(has(oov, "rec7"));
  CHECK(has(oov, "prefix[1]"));
  auto dup = error_of("{\"id\":\"a\",\"prefix\":[1],\"suffix\":[3]}\n"
                      "{\"id\":\"a\",\"prefix\":[1],\"suffix\":[3]}\n");
  CHECK(has(dup, "duplicate"));
  CHECK(has(error_of(""), "no records"));
  CHECK(has(error_of("{\"id\":\"a\",\"prefix\":[1],\n"), "d.jsonl:1"));
  CHECK(has(error_of("{\"id\":\"a\",\"prefix\":[1],\n"), "byte"));
  CHECK(has(error_of("{\"id\":3,\"prefix\":[1],\"suffix\":[3]}"), "\"id\""));
  CHECK(has(error_of("{\"id\":\"a\",\"prefix\":[-1],\"suffix\":[3]}"), "prefix"));
  CHECK(has(error_of("{\"id\":\"a\",\"prefix\":[],\"suffix\":[3]}"), "non-empty"));
  CHECK(has(error_of("{\"id\":\"a\",\"prefix\":[1]}"), "suffix"));
  CHECK(has(error_of("[1,2]"), "object"));
  CHECK_THROWS_AS(ingest_dataset("/nonexistent/file.jsonl", 5), DatasetError);
}
