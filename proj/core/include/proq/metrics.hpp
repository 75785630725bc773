#pragma once

#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "proq/model.hpp"

namespace proq {

// Object ids whose ground-truth tags satisfy the expression.
std::unordered_set<std::string> ground_truth_set(const Expression& expr,
                                                 const Dataset& ds,
                                                 std::span<const int> subset);

struct TrueScore {
  double precision = 0.0;  // empty answer -> 0
  double recall = 0.0;     // empty truth -> 1
  double f = 0.0;
};

TrueScore true_score(std::span<const std::string> answer_ids,
                     const std::unordered_set<std::string>& truth,
                     double alpha);

// Normalized improvement (f_t - f_0) / (f_max - f_0), clamped to [0, 1].
// Degenerate denominators (f_max <= f_0) yield 0 and set *degenerate.
double gain(double f_t, double f_0, double f_max, bool* degenerate = nullptr);

struct TimelinePoint {
  int epoch = 0;
  double clock = 0.0;
  double t0 = 0.0;
  int triples = 0;
  double expected = 0.0;
  double true_f = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  int answer_size = 0;
};

using Timeline = std::vector<TimelinePoint>;

void write_timeline_csv(const Timeline& tl, const std::string& path);
Timeline read_timeline_csv(const std::string& path);

// Progressiveness of a quality-over-time series: sum over checkpoints of
// urgency weight times step-interpolated quality. values[i] is the quality
// at times[i]; checkpoints are n_intervals equal slices of [0, v_end]
// (their right endpoints). The weight of checkpoint v is
// max(1 - prev(v) / v_end, 0) with prev the preceding checkpoint (0 for
// the first). A single checkpoint at v_end with weight 1 expresses a pure
// budget run.
double progressiveness(std::span<const double> times,
                       std::span<const double> values, double v_end,
                       int n_intervals = 10);

// Step interpolation: latest value at or before t (0 before the first).
double value_at(std::span<const double> times, std::span<const double> values,
                double t);

}  // namespace proq
