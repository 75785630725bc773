#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "proq/decision_table.hpp"
#include "proq/model.hpp"

namespace proq {

// Inverse standard normal CDF (Acklam's rational approximation,
// |relative error| < 1.15e-9 on (0,1)).
double norm_ppf(double p);

// Advances simulated time. In realtime mode charge() additionally sleeps
// for the charged amount (units = seconds); default is purely logical.
struct LogicalClock {
  double now = 0.0;
  bool realtime = false;

  void charge(double cost);
};

// Deterministic sub-stream per (seed, function, object, tag).
std::uint64_t derive_stream(std::uint64_t seed, const std::string& function_id,
                            const std::string& object_id,
                            const std::string& tag);

struct EvalResult {
  double probability = 0.0;  // posterior that the object carries the tag
  double cost = 0.0;         // charged execution time
};

// Runs one enrichment function on (object, tag). The simulated classifier
// scores tag-carriers N(delta, 1) and the rest N(0, 1) with
// delta = sqrt(2) * norm_ppf(quality), so the area under its ROC curve
// equals quality and the returned posterior is calibrated under equal
// priors. cost_jitter (fraction, >= 0) spreads the charged cost uniformly
// around FunctionSpec::cost. The charge lands on the clock.
EvalResult evaluate_function(const FunctionSpec& fn, std::uint64_t seed,
                             const std::string& object_id,
                             const std::string& tag, bool truth_matches,
                             double cost_jitter, LogicalClock& clock);

// Labelled sample used for offline parameter learning.
struct ValidationSet {
  std::string tag_type;
  std::vector<std::string> object_ids;
  std::vector<std::string> truth;  // tag per object, uniform over the vocabulary
};

ValidationSet make_validation_set(const TagType& tt, int n,
                                  std::uint64_t seed);

// Mean observed execution cost of fn across the validation objects.
double learn_cost(const FunctionSpec& fn, const ValidationSet& vs,
                  std::uint64_t seed, double cost_jitter);

// Area under the ROC curve of fn's outputs over (object, tag) pairs,
// Mann-Whitney estimate with tie correction.
double learn_quality_auc(const FunctionSpec& fn, const TagType& tt,
                         const ValidationSet& vs, std::uint64_t seed);

struct ReliabilityBin {
  double lo = 0.0, hi = 0.0;
  double mean_predicted = 0.0;
  double fraction_true = 0.0;
  std::size_t count = 0;
};

// Decile reliability diagram of fn's posteriors over the validation set.
std::vector<ReliabilityBin> reliability_diagram(const FunctionSpec& fn,
                                                const TagType& tt,
                                                const ValidationSet& vs,
                                                std::uint64_t seed,
                                                int bins = 10);

// Index of the function that maximizes quality / cost (ties: lower index).
int seed_function(std::span<const FunctionSpec> fns);

// Learns the (state, uncertainty bucket) -> (next function, expected delta)
// table for one tag type from simulated outputs on the validation set.
// States are the prefixes of function execution orders: every permutation
// when the tag type has at most 4 functions, otherwise max_orders random
// orders. Buckets average the uncertainty reduction of the best next
// function; deltas are clamped to <= 0.
DecisionTable learn_decision_table(const TagType& tt, const ValidationSet& vs,
                                   std::uint64_t seed, int buckets,
                                   int max_orders = 24);

// Same aggregation over caller-supplied outputs[sample][tag][function];
// lets tests drive the learner with hand-built behaviours.
DecisionTable build_table_from_outputs(
    const TagType& tt,
    const std::vector<std::vector<std::vector<double>>>& outputs,
    std::uint64_t seed, int buckets, int max_orders = 24);

// Merges per-tag-type tables into one.
DecisionTable merge_tables(std::vector<DecisionTable> parts);

struct BootstrapResult {
  DecisionTable table;
  double consumed = 0.0;  // enrichment time spent, charged to the caller's clock
  std::vector<double> mean_costs;  // per function of tt, observed means
};

// Online variant: spends at most `budget` time units enriching a sample of
// the live objects round-robin over random execution orders, then builds
// the table from those observations. Uses the same bucket semantics as the
// offline learner.
BootstrapResult bootstrap_decision_table(
    const TagType& tt, std::span<const Object* const> objects, double budget,
    std::uint64_t seed, int buckets, double cost_jitter, LogicalClock& clock);

}  // namespace proq
