#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "proq/decision_table.hpp"
#include "proq/model.hpp"
#include "proq/probability.hpp"

namespace proq {

// One candidate enrichment step: run `function` of `predicate`'s tag type
// on `object`.
struct Triple {
  int object = -1;     // index into the engine's object array
  int predicate = -1;  // index into Expression::predicates
  int function = -1;   // index within the tag type's function list
  double cost = 0.0;   // planned (mean) execution cost
  double benefit = 0.0;
  double esp_before = 0.0;
  double esp_after_est = 0.0;
  std::string object_id;  // ordering tie-break

  friend bool operator==(const Triple&, const Triple&) = default;
};

// Benefit descending, then cheaper first, then object id ascending, then
// predicate index: a total order for deterministic execution.
struct TripleOrder {
  bool operator()(const Triple& a, const Triple& b) const;
};

// Priority queue over candidate triples with per-object removal.
class PlanQueue {
 public:
  bool insert(const Triple& t);           // false if an identical key exists
  std::size_t erase_object(int object);   // removes all of the object's triples
  const Triple& top() const;
  Triple pop();
  bool remove(const Triple& t);           // exact-match removal
  bool empty() const { return q_.empty(); }
  std::size_t size() const { return q_.size(); }

  auto begin() const { return q_.begin(); }
  auto end() const { return q_.end(); }

  std::vector<Triple> triples_of(int object) const;
  void clear();

 private:
  std::set<Triple, TripleOrder> q_;
  std::unordered_map<int, std::vector<Triple>> by_object_;
};

// Expected-benefit rate of enriching: current ESP times estimated ESP after
// the step, per unit cost.
double triple_benefit(double esp_before, double esp_delta, double cost);

// Next function choice for one predicate of one object. Consults the
// decision table; on a miss falls back to the cheapest unexecuted function
// with delta = -h * (1 - quality). Returns nothing when every function has
// run.
struct NextFunction {
  int function = -1;
  double expected_delta = 0.0;
  bool from_table = false;
};
std::optional<NextFunction> next_function(const DecisionTable& table,
                                          const TagType& tt,
                                          const std::string& tag,
                                          StateVector state, double h);

struct EspEstimate {
  double leaf_prob = 0.0;  // projected predicate probability
  double esp = 0.0;        // projected expression probability
};

// Projects the ESP after an enrichment step that moves leaf `leaf` from
// uncertainty h to h + delta_h. The projected leaf probability is the
// ESP-raising entropy root (the upper one for the op-adjusted leaf value,
// since ESP is monotone in it). Uncertainty and probability are clamped
// away from the boundaries.
EspEstimate estimate_esp(const Expression& expr,
                         std::span<const double> leaf_probs, int leaf,
                         double delta_h);

// Object indices outside the answer set. in_answer must cover all objects.
std::vector<int> select_candidates(std::span<const char> in_answer);

}  // namespace proq
