#include "proq/decision_table.hpp"

#include <fstream>

#include <json.hpp>

namespace proq {

using nlohmann::ordered_json;

int DecisionTable::bucket_of(double h) const {
  if (h < 0.0) h = 0.0;
  int b = static_cast<int>(h * m_);
  if (b >= m_) b = m_ - 1;
  return b;
}

void DecisionTable::set(const std::string& tag_type, const std::string& tag,
                        StateVector state, int bucket, int next_function,
                        double delta) {
  if (bucket < 0 || bucket >= m_)
    throw std::out_of_range("decision table bucket");
  Key key{tag_type, tag, state.bits, state.size};
  auto& row = rows_[key];
  if (row.buckets.empty()) {
    row.state = state;
    row.buckets.resize(m_);
    for (int i = 0; i < m_; ++i) {
      row.buckets[i].lo = static_cast<double>(i) / m_;
      row.buckets[i].hi = static_cast<double>(i + 1) / m_;
    }
  }
  auto& cell = row.buckets[bucket];
  cell.next_function = next_function;
  cell.expected_delta = delta <= 0.0 ? delta : 0.0;
  cell.filled = true;
}

std::optional<DecisionBucket> DecisionTable::lookup(const std::string& tag_type,
                                                    const std::string& tag,
                                                    StateVector state,
                                                    double h) const {
  const DecisionRow* r = row(tag_type, tag, state);
  if (!r) return std::nullopt;
  const DecisionBucket& cell = r->buckets[bucket_of(h)];
  if (!cell.filled) return std::nullopt;
  return cell;
}

const DecisionRow* DecisionTable::row(const std::string& tag_type,
                                      const std::string& tag,
                                      StateVector state) const {
  auto it = rows_.find(Key{tag_type, tag, state.bits, state.size});
  return it == rows_.end() ? nullptr : &it->second;
}

void DecisionTable::absorb(const DecisionTable& other) {
  if (other.rows_.empty()) return;
  if (other.m_ != m_)
    throw std::invalid_argument("decision table bucket counts differ");
  for (const auto& [key, row] : other.rows_) {
    for (int b = 0; b < m_; ++b) {
      const auto& cell = row.buckets[b];
      if (cell.filled)
        set(std::get<0>(key), std::get<1>(key), row.state, b,
            cell.next_function, cell.expected_delta);
    }
  }
}

std::string DecisionTable::to_json_string() const {
  ordered_json j;
  j["buckets"] = m_;
  ordered_json rows = ordered_json::array();
  for (const auto& [key, row] : rows_) {
    ordered_json r;
    r["tag_type"] = std::get<0>(key);
    r["tag"] = std::get<1>(key);
    ordered_json state = ordered_json::array();
    for (int i = 0; i < row.state.size; ++i)
      state.push_back(row.state.test(i) ? 1 : 0);
    r["state"] = state;
    ordered_json cells = ordered_json::array();
    for (const auto& c : row.buckets) {
      if (!c.filled) continue;
      ordered_json cj;
      cj["lo"] = c.lo;
      cj["hi"] = c.hi;
      cj["next"] = c.next_function;
      cj["delta"] = c.expected_delta;
      cells.push_back(cj);
    }
    r["cells"] = cells;
    rows.push_back(r);
  }
  j["rows"] = rows;
  return j.dump(2);
}

DecisionTable DecisionTable::from_json_string(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("decision table parse: ") + e.what());
  }
  DecisionTable t(j.value("buckets", 10));
  for (const auto& r : j.value("rows", ordered_json::array())) {
    StateVector st = make_state(static_cast<int>(r["state"].size()));
    for (int i = 0; i < st.size; ++i)
      if (r["state"][i].get<int>()) st = mark_executed(st, i);
    for (const auto& c : r["cells"]) {
      double lo = c["lo"].get<double>();
      int bucket = t.bucket_of(lo + 1e-12);
      t.set(r["tag_type"].get<std::string>(), r["tag"].get<std::string>(), st,
            bucket, c["next"].get<int>(), c["delta"].get<double>());
    }
  }
  return t;
}

void DecisionTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write decision table: " + path);
  out << to_json_string() << "\n";
}

DecisionTable DecisionTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open decision table: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_string(text);
}

}  // namespace proq
