#include "proq/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace proq {

namespace {

bool truth_holds(const Expression& e, const ExprNode& n, const Object& o) {
  switch (n.kind) {
    case ExprNode::Kind::Leaf: {
      const Predicate& p = e.predicates[n.leaf];
      auto it = o.truth.find(p.tag_type);
      bool eq = it != o.truth.end() && it->second == p.tag;
      return p.op == Op::Equal ? eq : !eq;
    }
    case ExprNode::Kind::And:
      for (const auto& c : n.children)
        if (!truth_holds(e, c, o)) return false;
      return true;
    case ExprNode::Kind::Or:
      for (const auto& c : n.children)
        if (truth_holds(e, c, o)) return true;
      return false;
  }
  return false;
}

}  // namespace

std::unordered_set<std::string> ground_truth_set(const Expression& expr,
                                                 const Dataset& ds,
                                                 std::span<const int> subset) {
  std::unordered_set<std::string> out;
  for (int i : subset)
    if (truth_holds(expr, expr.root, ds.objects[i]))
      out.insert(ds.objects[i].id);
  return out;
}

TrueScore true_score(std::span<const std::string> answer_ids,
                     const std::unordered_set<std::string>& truth,
                     double alpha) {
  TrueScore s;
  if (answer_ids.empty()) {
    s.precision = 0.0;
    s.recall = truth.empty() ? 1.0 : 0.0;
    s.f = 0.0;
    return s;
  }
  double hit = 0.0;
  for (const auto& id : answer_ids)
    if (truth.count(id)) hit += 1.0;
  s.precision = hit / static_cast<double>(answer_ids.size());
  s.recall = truth.empty() ? 1.0 : hit / static_cast<double>(truth.size());
  double denom = alpha * s.precision + s.recall;
  s.f = denom > 0.0 ? (1.0 + alpha) * s.precision * s.recall / denom : 0.0;
  return s;
}

double gain(double f_t, double f_0, double f_max, bool* degenerate) {
  if (degenerate) *degenerate = false;
  if (f_max <= f_0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  return std::clamp((f_t - f_0) / (f_max - f_0), 0.0, 1.0);
}

void write_timeline_csv(const Timeline& tl, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write timeline: " + path);
  out << "epoch,clock,t0,triples_executed,expected_f,true_f1,precision,recall,"
         "answer_size\n";
  char buf[320];
  for (const auto& p : tl) {
    std::snprintf(buf, sizeof buf,
                  "%d,%.12g,%.12g,%d,%.12g,%.12g,%.12g,%.12g,%d\n", p.epoch,
                  p.clock, p.t0, p.triples, p.expected, p.true_f, p.precision,
                  p.recall, p.answer_size);
    out << buf;
  }
}

Timeline read_timeline_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open timeline: " + path);
  Timeline tl;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    TimelinePoint p;
    std::istringstream ss(line);
    std::string field;
    auto next = [&]() {
      if (!std::getline(ss, field, ','))
        throw ConfigError("short timeline row: " + line);
      return field;
    };
    p.epoch = std::stoi(next());
    p.clock = std::stod(next());
    p.t0 = std::stod(next());
    p.triples = std::stoi(next());
    p.expected = std::stod(next());
    p.true_f = std::stod(next());
    p.precision = std::stod(next());
    p.recall = std::stod(next());
    p.answer_size = std::stoi(next());
    tl.push_back(p);
  }
  return tl;
}

double value_at(std::span<const double> times, std::span<const double> values,
                double t) {
  if (times.size() != values.size())
    throw std::invalid_argument("value_at: span size mismatch");
  double v = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] > t) break;
    v = values[i];
  }
  return v;
}

double progressiveness(std::span<const double> times,
                       std::span<const double> values, double v_end,
                       int n_intervals) {
  if (v_end <= 0.0 || n_intervals < 1) return 0.0;
  // Sum of urgency-weighted quality improvements over equally spaced
  // checkpoints; weights fall linearly so early gains count most.
  double qty = 0.0;
  double prev_cp = 0.0;
  double prev_val = value_at(times, values, 0.0);
  for (int i = 1; i <= n_intervals; ++i) {
    double cp = v_end * static_cast<double>(i) / n_intervals;
    double w = std::max(1.0 - prev_cp / v_end, 0.0);
    double val = value_at(times, values, cp);
    qty += w * (val - prev_val);
    prev_cp = cp;
    prev_val = val;
  }
  return qty;
}

}  // namespace proq
