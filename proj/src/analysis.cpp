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

#include "seqleak/analysis.hpp"

#include <algorithm>
#include <numeric>

#include "seqleak/errors.hpp"

namespace seqleak {
namespace {

// Relative slack on the 1/X threshold. ESPs that are products of table
// probabilities (0.05 = 1/20, 0.25 = 1/4, ...) land within a few ulps of the
// threshold and must compare as equal to it.
constexpr double kThresholdSlack = 1e-12;

double pct(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

double extraction_rate(std::span<const double> esps) {
  if (esps.empty()) throw ConfigError("extraction rate of an empty set is undefined");
  double sum = 0.0;
  for (double e : esps) sum += e;
  return sum / static_cast<double>(esps.size());
}

double LeakageCurve::fraction(std::uint64_t x) const {
  if (x < 1 || x > points.size()) {
    throw ConfigError("X = " + std::to_string(x) + " is outside the curve (1.." +
                      std::to_string(points.size()) + ")");
  }
  return points[x - 1].second;
}

LeakageCurve leakage_curve(std::span<const double> esps, std::uint64_t x_max,
                           std::string scheme, ThresholdRule rule) {
  if (x_max < 1) throw ConfigError("X_max must be >= 1");
  LeakageCurve curve;
  curve.scheme = std::move(scheme);
  curve.points.reserve(x_max);
  for (std::uint64_t x = 1; x <= x_max; ++x) {
    const double threshold = 1.0 / static_cast<double>(x);
    std::size_t leaked = 0;
    for (double e : esps) {
      const bool hit = rule == ThresholdRule::kAtLeast
                           ? e >= threshold * (1.0 - kThresholdSlack)
                           : e > threshold * (1.0 + kThresholdSlack);
      if (hit) ++leaked;
    }
    const double frac =
        esps.empty() ? 0.0 : static_cast<double>(leaked) / static_cast<double>(esps.size());
    curve.points.emplace_back(x, frac);
  }
  return curve;
}

std::optional<double> underestimation_factor(const LeakageCurve& randomized,
                                             double greedy_rate, std::uint64_t x) {
  if (!(greedy_rate > 0.0)) return std::nullopt;
  return randomized.fraction(x) / greedy_rate;
}

std::optional<std::uint64_t> first_crossing(const LeakageCurve& curve, double level) {
  for (const auto& [x, frac] : curve.points) {
    if (frac > level) return x;
  }
  return std::nullopt;
}

std::string to_string(TrendClass c) {
  switch (c) {
    case TrendClass::kStraightDec: return "straight-dec";
    case TrendClass::kInvertedUDec: return "inverted-u-dec";
    case TrendClass::kUShapeDec: return "u-shape-dec";
    case TrendClass::kStraightInc: return "straight-inc";
    case TrendClass::kUShapeInc: return "u-shape-inc";
    case TrendClass::kInvertedUInc: return "inverted-u-inc";
  }
  return "unknown";
}

bool is_decreasing(TrendClass c) {
  return c == TrendClass::kStraightDec || c == TrendClass::kInvertedUDec ||
         c == TrendClass::kUShapeDec;
}

TrendClassification classify_trend(std::span<const SeriesPoint> series) {
  if (series.size() < 3) {
    throw ConfigError("trend classification needs at least 3 points, got " +
                      std::to_string(series.size()));
  }
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (!(series[i].label > series[i - 1].label)) {
      throw ConfigError("series labels must be strictly increasing");
    }
  }
  const double start = series.front().esp;
  const double end = series.back().esp;
  const double hi = std::max(start, end);
  const double lo = std::min(start, end);
  const bool increasing = end >= start;

  std::size_t above = 0;
  std::size_t below = 0;
  double peak = hi;
  double trough = lo;
  std::size_t peak_at = 0;
  std::size_t trough_at = 0;
  for (std::size_t i = 1; i + 1 < series.size(); ++i) {
    const double v = series[i].esp;
    if (v > hi) {
      ++above;
      if (v > peak) {
        peak = v;
        peak_at = i;
      }
    }
    if (v < lo) {
      ++below;
      if (v < trough) {
        trough = v;
        trough_at = i;
      }
    }
  }

  enum class Shape { kStraight, kInvertedU, kU } shape = Shape::kStraight;
  TrendClassification out;
  if (above > 0 && below > 0) {
    out.mixed = true;
    if (above != below) {
      shape = above > below ? Shape::kInvertedU : Shape::kU;
    } else {
      shape = peak_at < trough_at ? Shape::kInvertedU : Shape::kU;
    }
  } else if (above > 0) {
    shape = Shape::kInvertedU;
  } else if (below > 0) {
    shape = Shape::kU;
  }

  switch (shape) {
    case Shape::kStraight:
      out.cls = increasing ? TrendClass::kStraightInc : TrendClass::kStraightDec;
      break;
    case Shape::kInvertedU:
      out.cls = increasing ? TrendClass::kInvertedUInc : TrendClass::kInvertedUDec;
      break;
    case Shape::kU:
      out.cls = increasing ? TrendClass::kUShapeInc : TrendClass::kUShapeDec;
      break;
  }
  return out;
}

double TrendTable::percentage(TrendClass c) const {
  return pct(counts[static_cast<std::size_t>(c)], total);
}

double TrendTable::decreasing_percentage() const {
  return percentage(TrendClass::kStraightDec) + percentage(TrendClass::kInvertedUDec) +
         percentage(TrendClass::kUShapeDec);
}

TrendTable trend_table(std::span<const std::vector<SeriesPoint>> series_set) {
  TrendTable table;
  for (const auto& series : series_set) {
    const TrendClassification c = classify_trend(series);
    ++table.counts[static_cast<std::size_t>(c.cls)];
    ++table.total;
    if (c.mixed) ++table.mixed;
  }
  return table;
}

std::vector<SeriesPoint> esp_series_over_prefixes(const LanguageModel& model,
                                                  const Scheme& scheme,
                                                  const SequenceRecord& record,
                                                  std::span<const std::size_t> lengths) {
  record.validate();
  std::vector<SeriesPoint> out;
  out.reserve(lengths.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const std::size_t len = lengths[i];
    if (len == 0) throw ConfigError("prefix lengths must be >= 1");
    if (i > 0 && len <= lengths[i - 1]) {
      throw ConfigError("prefix lengths must be strictly increasing");
    }
    if (len > record.prefix.size()) {
      throw ConfigError("prefix length " + std::to_string(len) + " exceeds the " +
                        std::to_string(record.prefix.size()) +
                        "-token prefix of record '" + record.id + "'");
    }
    SequenceRecord truncated = record;
    truncated.prefix.assign(record.prefix.end() - static_cast<std::ptrdiff_t>(len),
                            record.prefix.end());
    out.push_back({static_cast<double>(len),
                   exact_sample_probability(model, scheme, truncated)});
  }
  return out;
}

std::vector<SeriesPoint> esp_series_over_models(
    std::span<const LanguageModel* const> models, std::span<const double> labels,
    const Scheme& scheme, const SequenceRecord& record) {
  if (models.size() != labels.size()) {
    throw ConfigError("one label is required per model");
  }
  std::vector<SeriesPoint> out;
  out.reserve(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    out.push_back({labels[i], exact_sample_probability(*models[i], scheme, record)});
  }
  return out;
}

std::optional<double> PositionProfile::last_to_first_ratio() const {
  if (mean_tp.empty() || !(mean_tp.front() > 0.0)) return std::nullopt;
  return mean_tp.back() / mean_tp.front();
}

PositionProfile position_profile(std::span<const std::vector<double>> tp_rows) {
  PositionProfile profile;
  if (tp_rows.empty()) return profile;
  const std::size_t m = tp_rows.front().size();
  profile.mean_tp.assign(m, 0.0);
  for (const auto& row : tp_rows) {
    if (row.size() != m) {
      throw DatasetError("position profile needs a common suffix length; saw " +
                         std::to_string(m) + " and " + std::to_string(row.size()));
    }
    for (std::size_t i = 0; i < m; ++i) profile.mean_tp[i] += row[i];
  }
  for (double& v : profile.mean_tp) v /= static_cast<double>(tp_rows.size());
  profile.count = tp_rows.size();
  return profile;
}

PositionProfile position_profile(std::span<const SequenceRecord> records,
                                 const LanguageModel& model, const Scheme& scheme) {
  std::vector<std::vector<double>> rows;
  rows.reserve(records.size());
  for (const auto& r : records) {
    if (!rows.empty() && r.suffix.size() != rows.front().size()) {
      throw DatasetError("record '" + r.id + "' has suffix length " +
                         std::to_string(r.suffix.size()) + "; expected " +
                         std::to_string(rows.front().size()));
    }
    rows.push_back(suffix_token_probabilities(model, scheme, r));
  }
  return position_profile(rows);
}

std::string to_string(PartialVerdict v) {
  switch (v) {
    case PartialVerdict::kPartialEasier: return "partial-easier";
    case PartialVerdict::kExactEasier: return "exact-easier";
    case PartialVerdict::kInconclusive: return "inconclusive";
  }
  return "unknown";
}

PartialVerdict partial_verdict(double esp, const ISPResult& isp) {
  if (isp.value > esp) return PartialVerdict::kPartialEasier;
  if (isp.upper() < esp) return PartialVerdict::kExactEasier;
  return PartialVerdict::kInconclusive;
}

PartialExactReport partial_vs_exact(std::span<const ScoredIsp> scored) {
  PartialExactReport report;
  std::size_t partial = 0;
  std::size_t exact = 0;
  std::size_t unsure = 0;
  for (const auto& s : scored) {
    if (s.isp.n != scored.front().isp.n) {
      throw ConfigError("partial-vs-exact report mixes n = " +
                        std::to_string(scored.front().isp.n) + " and n = " +
                        std::to_string(s.isp.n));
    }
    PartialExactRow row{s.id, s.esp, s.isp.value, s.isp.upper(),
                        partial_verdict(s.esp, s.isp)};
    switch (row.verdict) {
      case PartialVerdict::kPartialEasier: ++partial; break;
      case PartialVerdict::kExactEasier: ++exact; break;
      case PartialVerdict::kInconclusive: ++unsure; break;
    }
    report.rows.push_back(std::move(row));
  }
  report.partial_easier_pct = pct(partial, scored.size());
  report.exact_easier_pct = pct(exact, scored.size());
  report.inconclusive_pct = pct(unsure, scored.size());
  return report;
}

std::optional<MismatchPattern> dominant_pattern(const ISPResult& isp) {
  std::optional<MismatchPattern> best;
  double best_mass = 0.0;
  // std::map iterates patterns in lexicographic order, so a strict '>'
  // keeps the smallest pattern among equal masses.
  for (const auto& [pattern, mass] : isp.breakdown) {
    if (mass > best_mass) {
      best = pattern;
      best_mass = mass;
    }
  }
  return best;
}

namespace {

void all_patterns(std::size_t m, std::size_t n, std::size_t next,
                  std::vector<std::size_t>& cur, std::vector<PatternCount>& out) {
  if (cur.size() == n) {
    out.push_back({MismatchPattern{cur}, 0});
    return;
  }
  for (std::size_t p = next; p <= m; ++p) {
    cur.push_back(p);
    all_patterns(m, n, p + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<PatternCount> pattern_breakdown(std::span<const ScoredIsp> scored,
                                            std::size_t top_n) {
  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scored[a].isp.value > scored[b].isp.value;
  });
  order.resize(std::min(top_n, order.size()));

  std::vector<PatternCount> tally;
  if (!scored.empty()) {
    const std::size_t m = scored.front().suffix_length;
    const std::size_t n = scored.front().isp.n;
    const bool shared_m = std::all_of(scored.begin(), scored.end(), [&](const ScoredIsp& s) {
      return s.suffix_length == m;
    });
    if (shared_m && m > 0 && n <= m) {
      std::vector<std::size_t> cur;
      all_patterns(m, n, 1, cur, tally);
    }
  }
  for (std::size_t idx : order) {
    auto pattern = dominant_pattern(scored[idx].isp);
    if (!pattern) continue;
    auto it = std::find_if(tally.begin(), tally.end(),
                           [&](const PatternCount& pc) { return pc.pattern == *pattern; });
    if (it == tally.end()) {
      tally.push_back({*pattern, 1});
    } else {
      ++it->count;
    }
  }
  std::sort(tally.begin(), tally.end(), [](const PatternCount& a, const PatternCount& b) {
    return a.pattern < b.pattern;
  });
  return tally;
}

}  // namespace seqleak
