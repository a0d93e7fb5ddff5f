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

#ifndef SEQLEAK_ANALYSIS_HPP_
#define SEQLEAK_ANALYSIS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seqleak/metrics.hpp"

namespace seqleak {

// Mean ESP over a dataset. Throws ConfigError on empty input.
double extraction_rate(std::span<const double> esps);

// Whether a record counts as leaked within X queries.
enum class ThresholdRule {
  kAtLeast,        // ESP >= 1/X
  kStrictlyAbove,  // ESP > 1/X
};

struct LeakageCurve {
  std::string scheme;
  // (X, fraction of records leaked within X queries), X = 1..X_max.
  std::vector<std::pair<std::uint64_t, double>> points;

  // Throws ConfigError when X is outside the curve.
  double fraction(std::uint64_t x) const;
};

LeakageCurve leakage_curve(std::span<const double> esps, std::uint64_t x_max,
                           std::string scheme = {},
                           ThresholdRule rule = ThresholdRule::kAtLeast);

// fraction(X) / greedy_rate; nullopt when greedy_rate is zero.
std::optional<double> underestimation_factor(const LeakageCurve& randomized,
                                             double greedy_rate, std::uint64_t x);

// First X at which the curve strictly exceeds `level`, if any.
std::optional<std::uint64_t> first_crossing(const LeakageCurve& curve, double level);

enum class TrendClass {
  kStraightDec,
  kInvertedUDec,
  kUShapeDec,
  kStraightInc,
  kUShapeInc,
  kInvertedUInc,
};
inline constexpr std::array<TrendClass, 6> kAllTrendClasses = {
    TrendClass::kStraightDec, TrendClass::kInvertedUDec, TrendClass::kUShapeDec,
    TrendClass::kStraightInc, TrendClass::kUShapeInc,    TrendClass::kInvertedUInc,
};
std::string to_string(TrendClass c);
bool is_decreasing(TrendClass c);

struct SeriesPoint {
  double label = 0.0;  // prefix length, model size, ...
  double esp = 0.0;
};

struct TrendClassification {
  TrendClass cls = TrendClass::kStraightInc;
  // Series had both an interior maximum and an interior minimum.
  bool mixed = false;
};

// Start/end comparison picks Inc or Dec (equal endpoints count as Inc). An
// interior point above both endpoints makes the shape InvertedU, one below
// both makes it UShape. When both occur, the side with more points outside
// the endpoint band wins, ties going to the extremum that occurs first.
// Throws ConfigError for fewer than 3 points or non-increasing labels.
TrendClassification classify_trend(std::span<const SeriesPoint> series);

struct TrendTable {
  std::array<std::size_t, 6> counts{};
  std::size_t total = 0;
  std::size_t mixed = 0;

  double percentage(TrendClass c) const;
  double decreasing_percentage() const;
};

TrendTable trend_table(std::span<const std::vector<SeriesPoint>> series_set);

// ESP of `record` when only the last L prefix tokens are kept, for each L.
std::vector<SeriesPoint> esp_series_over_prefixes(const LanguageModel& model,
                                                  const Scheme& scheme,
                                                  const SequenceRecord& record,
                                                  std::span<const std::size_t> lengths);

// ESP of one record across several models (e.g. increasing size). Labels
// are supplied by the caller.
std::vector<SeriesPoint> esp_series_over_models(
    std::span<const LanguageModel* const> models, std::span<const double> labels,
    const Scheme& scheme, const SequenceRecord& record);

struct PositionProfile {
  std::vector<double> mean_tp;  // index i holds suffix position i + 1
  std::size_t count = 0;

  // mean_tp.back() / mean_tp.front(); nullopt when the first mean is zero.
  std::optional<double> last_to_first_ratio() const;
};

PositionProfile position_profile(std::span<const SequenceRecord> records,
                                 const LanguageModel& model, const Scheme& scheme);
// Same aggregation over precomputed per-record TP rows.
PositionProfile position_profile(std::span<const std::vector<double>> tp_rows);

enum class PartialVerdict { kPartialEasier, kExactEasier, kInconclusive };
std::string to_string(PartialVerdict v);

PartialVerdict partial_verdict(double esp, const ISPResult& isp);

struct PartialExactRow {
  std::string id;
  double esp = 0.0;
  double isp_value = 0.0;
  double isp_upper = 0.0;
  PartialVerdict verdict = PartialVerdict::kInconclusive;
};

struct PartialExactReport {
  std::vector<PartialExactRow> rows;
  double partial_easier_pct = 0.0;
  double exact_easier_pct = 0.0;
  double inconclusive_pct = 0.0;
};

struct ScoredIsp {
  std::string id;
  std::size_t suffix_length = 0;
  double esp = 0.0;
  ISPResult isp;
};

// Throws ConfigError if the records were scored with different n.
PartialExactReport partial_vs_exact(std::span<const ScoredIsp> scored);

// Pattern carrying the largest breakdown mass; ties go to the
// lexicographically smallest pattern. nullopt for an empty breakdown.
std::optional<MismatchPattern> dominant_pattern(const ISPResult& isp);

struct PatternCount {
  MismatchPattern pattern;
  std::size_t count = 0;
};

// Tallies the dominant pattern of the top_n records by ISP value (ties by
// input order). Every C(m, n) pattern is listed, including zero counts,
// when all records share m.
std::vector<PatternCount> pattern_breakdown(std::span<const ScoredIsp> scored,
                                            std::size_t top_n);

}  // namespace seqleak

#endif  // SEQLEAK_ANALYSIS_HPP_
