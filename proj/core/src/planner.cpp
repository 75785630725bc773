#include "proq/planner.hpp"

#include <algorithm>
#include <cmath>

namespace proq {

bool TripleOrder::operator()(const Triple& a, const Triple& b) const {
  if (a.benefit != b.benefit) return a.benefit > b.benefit;
  if (a.cost != b.cost) return a.cost < b.cost;
  if (a.object_id != b.object_id) return a.object_id < b.object_id;
  if (a.predicate != b.predicate) return a.predicate < b.predicate;
  return a.function < b.function;
}

bool PlanQueue::insert(const Triple& t) {
  auto [it, ok] = q_.insert(t);
  if (ok) by_object_[t.object].push_back(t);
  return ok;
}

std::size_t PlanQueue::erase_object(int object) {
  auto it = by_object_.find(object);
  if (it == by_object_.end()) return 0;
  std::size_t removed = 0;
  for (const Triple& t : it->second) removed += q_.erase(t);
  by_object_.erase(it);
  return removed;
}

const Triple& PlanQueue::top() const {
  if (q_.empty()) throw std::out_of_range("empty plan queue");
  return *q_.begin();
}

Triple PlanQueue::pop() {
  if (q_.empty()) throw std::out_of_range("empty plan queue");
  Triple t = *q_.begin();
  q_.erase(q_.begin());
  auto& v = by_object_[t.object];
  v.erase(std::find(v.begin(), v.end(), t));
  if (v.empty()) by_object_.erase(t.object);
  return t;
}

bool PlanQueue::remove(const Triple& t) {
  if (!q_.erase(t)) return false;
  auto& v = by_object_[t.object];
  v.erase(std::find(v.begin(), v.end(), t));
  if (v.empty()) by_object_.erase(t.object);
  return true;
}

std::vector<Triple> PlanQueue::triples_of(int object) const {
  auto it = by_object_.find(object);
  return it == by_object_.end() ? std::vector<Triple>{} : it->second;
}

void PlanQueue::clear() {
  q_.clear();
  by_object_.clear();
}

double triple_benefit(double esp_before, double esp_delta, double cost) {
  if (cost <= 0.0) throw std::invalid_argument("triple_benefit: cost <= 0");
  return esp_before * (esp_before + esp_delta) / cost;
}

std::optional<NextFunction> next_function(const DecisionTable& table,
                                          const TagType& tt,
                                          const std::string& tag,
                                          StateVector state, double h) {
  if (state.all()) return std::nullopt;
  if (auto cell = table.lookup(tt.id, tag, state, h);
      cell && !state.test(cell->next_function))
    return NextFunction{cell->next_function, cell->expected_delta, true};
  // Fallback: cheapest unexecuted, with a quality-discounted optimistic
  // reduction.
  int pick = -1;
  for (std::size_t j = 0; j < tt.functions.size(); ++j) {
    if (state.test(static_cast<int>(j))) continue;
    if (pick < 0 || tt.functions[j].cost < tt.functions[pick].cost)
      pick = static_cast<int>(j);
  }
  if (pick < 0) return std::nullopt;
  return NextFunction{pick, -h * (1.0 - tt.functions[pick].quality), false};
}

EspEstimate estimate_esp(const Expression& expr,
                         std::span<const double> leaf_probs, int leaf,
                         double delta_h) {
  if (leaf < 0 || static_cast<std::size_t>(leaf) >= leaf_probs.size())
    throw std::out_of_range("estimate_esp: leaf index");
  double h = entropy(leaf_probs[leaf]);
  double h_hat = std::clamp(h + delta_h, 1e-6, 1.0);
  // ESP grows with the op-adjusted leaf probability, so project onto the
  // upper entropy root.
  double p_hat = inverse_entropy(h_hat, 1.0);
  p_hat = std::clamp(p_hat, 1e-6, 1.0 - 1e-6);
  std::vector<double> probs(leaf_probs.begin(), leaf_probs.end());
  probs[leaf] = p_hat;
  return {p_hat, esp(expr, probs)};
}

std::vector<int> select_candidates(std::span<const char> in_answer) {
  std::vector<int> out;
  for (std::size_t i = 0; i < in_answer.size(); ++i)
    if (!in_answer[i]) out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace proq
