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

#ifndef SEQLEAK_ERRORS_HPP_
#define SEQLEAK_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace seqleak {

// Error taxonomy. The CLI maps each class onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration (bad K, bad k/p, malformed flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Corrupt or inconsistent input data: malformed records, out-of-vocab ids.
class DatasetError : public Error {
 public:
  using Error::Error;
};

// Failure inside a model provider or the bridge connection.
class ModelError : public Error {
 public:
  explicit ModelError(const std::string& what, bool retryable = false)
      : Error(what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

// Wire-protocol violation: unparsable line, wrong version, bad array length.
class ProtocolError : public ModelError {
 public:
  explicit ProtocolError(const std::string& what) : ModelError(what, false) {}
};

// Exhaustive enumeration requested beyond the configured feasibility cap.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace seqleak

#endif  // SEQLEAK_ERRORS_HPP_
