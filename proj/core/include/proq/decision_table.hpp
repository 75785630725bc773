#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "proq/model.hpp"

namespace proq {

struct DecisionBucket {
  double lo = 0.0, hi = 0.0;  // uncertainty interval [lo, hi)
  int next_function = -1;     // index within the tag type's function list
  double expected_delta = 0.0;  // expected change of uncertainty, <= 0
  bool filled = false;
};

struct DecisionRow {
  StateVector state;
  std::vector<DecisionBucket> buckets;  // m uniform buckets over [0, 1]
};

// Maps (tag type, tag, execution state, uncertainty bucket) to the next
// enrichment function and its expected uncertainty reduction.
class DecisionTable {
 public:
  DecisionTable() = default;
  explicit DecisionTable(int buckets) : m_(buckets) {}

  int bucket_count() const { return m_; }
  int bucket_of(double h) const;

  void set(const std::string& tag_type, const std::string& tag,
           StateVector state, int bucket, int next_function, double delta);

  // Filled bucket for (tag_type, tag, state, h), if any.
  std::optional<DecisionBucket> lookup(const std::string& tag_type,
                                       const std::string& tag,
                                       StateVector state, double h) const;

  const DecisionRow* row(const std::string& tag_type, const std::string& tag,
                         StateVector state) const;

  std::size_t row_count() const { return rows_.size(); }

  // Copies the other table's filled cells in (bucket counts must agree).
  void absorb(const DecisionTable& other);

  void save(const std::string& path) const;
  static DecisionTable load(const std::string& path);

  std::string to_json_string() const;
  static DecisionTable from_json_string(const std::string& text);

 private:
  using Key = std::tuple<std::string, std::string, std::uint32_t, int>;
  int m_ = 10;
  std::map<Key, DecisionRow> rows_;
};

}  // namespace proq
