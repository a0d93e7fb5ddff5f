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

#ifndef SEQLEAK_LOGPROB_HPP_
#define SEQLEAK_LOGPROB_HPP_

#include <cmath>
#include <limits>

namespace seqleak {

// A probability held in log space. Zero is a distinguished state (negative
// infinity); it is never approximated by a large negative float.
class LogProb {
 public:
  constexpr LogProb() : log_(0.0) {}

  static constexpr LogProb one() { return LogProb(0.0); }
  static constexpr LogProb zero() {
    return LogProb(-std::numeric_limits<double>::infinity());
  }
  static LogProb from_prob(double p) {
    return p > 0.0 ? LogProb(std::log(p)) : zero();
  }
  static constexpr LogProb from_log(double log_value) {
    return LogProb(log_value);
  }

  constexpr bool is_zero() const {
    return log_ == -std::numeric_limits<double>::infinity();
  }
  constexpr double log() const { return log_; }
  double prob() const { return is_zero() ? 0.0 : std::exp(log_); }

  friend LogProb operator*(LogProb a, LogProb b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return LogProb(a.log_ + b.log_);
  }
  LogProb& operator*=(LogProb other) { return *this = *this * other; }

  friend constexpr bool operator==(LogProb a, LogProb b) {
    return a.log_ == b.log_;
  }
  friend constexpr bool operator<(LogProb a, LogProb b) {
    return a.log_ < b.log_;
  }

 private:
  explicit constexpr LogProb(double log_value) : log_(log_value) {}
  double log_;
};

// Streaming log-sum-exp. Keeps a running maximum and rescales the partial
// sum whenever a larger term arrives, so no intermediate exp overflows.
class LogSumAccumulator {
 public:
  void add(LogProb term) {
    if (term.is_zero()) return;
    if (empty_) {
      max_ = term.log();
      scaled_sum_ = 1.0;
      empty_ = false;
      return;
    }
    if (term.log() > max_) {
      scaled_sum_ = scaled_sum_ * std::exp(max_ - term.log()) + 1.0;
      max_ = term.log();
    } else {
      scaled_sum_ += std::exp(term.log() - max_);
    }
  }
  void add(const LogSumAccumulator& other) {
    if (other.empty_) return;
    if (empty_) {
      *this = other;
      return;
    }
    if (other.max_ > max_) {
      scaled_sum_ = scaled_sum_ * std::exp(max_ - other.max_) + other.scaled_sum_;
      max_ = other.max_;
    } else {
      scaled_sum_ += other.scaled_sum_ * std::exp(other.max_ - max_);
    }
  }

  LogProb total() const {
    return empty_ ? LogProb::zero() : LogProb::from_log(max_ + std::log(scaled_sum_));
  }
  double prob() const { return total().prob(); }
  bool empty() const { return empty_; }

 private:
  bool empty_ = true;
  double max_ = 0.0;
  double scaled_sum_ = 0.0;
};

}  // namespace seqleak

#endif  // SEQLEAK_LOGPROB_HPP_
