#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "proq/config.hpp"
#include "proq/engine.hpp"
#include "proq/metrics.hpp"
#include "proq/model.hpp"

namespace proq {

// Reference workload: two binary tag types (color, shape), four functions
// each with distinct quality/cost trade-offs, one precise bucket attribute
// giving exact filter selectivity, query color("red") AND shape("circle").
Config standard_config(double selectivity = 0.05);

// Objects with uniform bucket values and truth tags drawn from per-tag-type
// priors (defaults match standard_config: 0.45 for the queried tags).
Dataset standard_dataset(int n, std::uint64_t seed);
Dataset generate_dataset(
    const Schema& schema, int n, std::uint64_t seed,
    const std::map<std::string, std::map<std::string, double>>& priors);

struct RunResult {
  Timeline timeline;
  double completion = 0.0;  // final clock
  double final_true_f = 0.0;
  double initial_true_f = 0.0;
  int epochs = 0;
  std::vector<std::string> warnings;
};

RunResult run_query(const Config& cfg, const Dataset& ds, const StopRule& stop);

struct CompareRow {
  Approach approach = Approach::Progressive;
  double score = 0.0;  // gain progressiveness over the shared horizon
  double completion = 0.0;
  double f0 = 0.0;
  double f_max = 0.0;  // own fully-enriched true quality
  double final_true_f = 0.0;
  bool degenerate_gain = false;
};

struct CompareResult {
  std::vector<CompareRow> rows;  // progressive first, then baselines
  double v_end = 0.0;            // shared horizon: min completion
};

// Runs all four approaches on identical data/seed/epoch and scores
// progressiveness on the gain scale over the shared horizon.
CompareResult compare_approaches(const Config& cfg, const Dataset& ds,
                                 const std::string& timeline_dir = "");
void write_compare_report(const CompareResult& res, const std::string& path);

struct SweepEntry {
  double fraction = 0.0;
  double epoch = 0.0;
  double score = 0.0;  // true-quality progressiveness, shared horizon
  double completion = 0.0;
};

struct SweepResult {
  double t_q = 0.0;  // fastest completion among probe epochs
  std::vector<double> probe_completions;
  std::vector<SweepEntry> entries;
  double best_epoch = 0.0;
  double best_fraction = 0.0;
};

// Two-phase epoch calibration: probe runs find the query completion time,
// then candidate epochs (fractions of it) are scored by progressiveness.
SweepResult epoch_sweep(const Config& cfg, const Dataset& ds);
void write_sweep_report(const SweepResult& res, const std::string& path);

}  // namespace proq
