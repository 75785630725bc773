#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "proq/model.hpp"

namespace proq {

enum class Approach { Progressive, FunctionFirst, ObjectFirst, RandomTriples };

Approach parse_approach(const std::string& name);
std::string approach_name(Approach a);

enum class TableSource { LearnOffline, LearnOnline, File };

struct StopRule {
  enum class Kind { FullyTagged, Budget, Target };
  Kind kind = Kind::FullyTagged;
  double value = 0.0;  // global budget or target expected quality

  static StopRule parse(const std::string& text);  // full | budget=N | target=F
  std::string to_string() const;
};

struct EngineSettings {
  double alpha = 1.0;
  double epoch = 5.0;
  std::uint64_t seed = 1;
  double plan_unit_cost = 1e-4;  // bookkeeping time per queue operation
  double cost_jitter = 0.0;
  int decision_buckets = 10;
  TableSource table_source = TableSource::LearnOffline;
  std::string table_path;        // when table_source == File
  double online_fraction = 0.1;  // share of the first epoch spent learning
  int validation_size = 400;
  Approach approach = Approach::Progressive;
};

struct DiskSettings {
  bool enabled = false;
  int block_size = 64;
  int capacity = 4;        // d0: memory-resident block budget
  double load_cost = 1.0;  // time charged per block load
  std::string block_file = "blocks.jsonl";
  std::string index_file = "blocks.index.json";
};

struct SweepSettings {
  std::vector<double> probe_epochs = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> fractions = {0.01, 0.02, 0.03, 0.04, 0.05,
                                   0.06, 0.07, 0.08, 0.09, 0.10};
};

struct Config {
  Schema schema;
  std::string expression;
  PreciseFilter filter;
  EngineSettings engine;
  DiskSettings disk;
  SweepSettings sweep;
};

Config load_config(const std::string& path);
void save_config(const Config& cfg, const std::string& path);
Config config_from_json_string(const std::string& text);
std::string config_to_json_string(const Config& cfg);

}  // namespace proq
