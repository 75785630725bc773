#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "proq/answer.hpp"
#include "proq/config.hpp"
#include "proq/decision_table.hpp"
#include "proq/metrics.hpp"
#include "proq/model.hpp"
#include "proq/planner.hpp"
#include "proq/sim.hpp"
#include "proq/storage.hpp"

namespace proq {

struct EpochReport {
  int epoch = 0;
  double t0 = 0.0;
  int triples = 0;
  int loads = 0;  // disk mode block loads
  double consumed = 0.0;  // planned cost admitted this epoch
  double clock_after = 0.0;
  double expected = 0.0;
  int answer_size = 0;
};

// Per-object evaluation state for one predicate.
struct PredicateState {
  StateVector state;
  std::vector<double> outputs;    // op-adjusted, aligned with executed bits
  std::vector<double> qualities;  // matching qualities
  double prob = 0.5;              // fused predicate probability
};

// Progressive evaluation driver: alternates bounded enrichment rounds with
// answer re-selection. Also hosts the comparison baselines (function-first,
// object-first, random) so all approaches share initialization, budgets and
// epoch boundaries, and the paged (disk) execution mode.
class Engine {
 public:
  Engine(const Config& cfg, const Dataset& full);

  // One enrichment round: plan bookkeeping, triple execution within
  // epoch - t0 (and under budget_cap when given), answer re-selection.
  EpochReport run_epoch(std::optional<double> budget_cap = {});

  // Runs epochs until the stop rule is met; returns the quality timeline
  // (first row is the post-initialization state).
  Timeline run(const StopRule& stop);

  const Config& config() const { return cfg_; }
  const Expression& expression() const { return expr_; }
  double clock_now() const { return clock_.now; }
  double expected() const { return ans_.expected; }
  const AnswerSelection& answer() const { return ans_; }
  std::vector<std::string> answer_ids() const;
  const PlanQueue& queue() const { return pq_; }
  const Timeline& timeline() const { return timeline_; }
  int epochs_run() const { return epoch_; }
  std::size_t object_count() const { return objs_.objects.size(); }
  bool fully_tagged() const;
  const std::vector<std::string>& warnings() const { return warnings_; }
  const DecisionTable& table() const { return table_; }

  double object_prob(int obj) const { return esp_[obj]; }
  const PredicateState& predicate_state(int obj, int pred) const {
    return st_[obj][pred];
  }

  // Accounting for the conservation invariant:
  // clock == init_cost + total_t0 + total_exec + total_load.
  double init_cost() const { return init_cost_; }
  double total_t0() const { return sum_t0_; }
  double total_exec() const { return sum_exec_; }
  double total_load() const { return sum_load_; }

  // Fresh plan built from current state; the live queue must match this
  // after any epoch.
  PlanQueue rebuild_plan() const;

  TrueScore score_answer() const;

  // Disk-mode inspection.
  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<int>& object_block() const { return object_block_; }
  std::vector<double> current_block_benefits() const;

 private:
  void init();
  void init_disk();
  void validate() const;
  std::size_t build_plan(PlanQueue& pq) const;
  std::size_t gen_triples(PlanQueue& pq, int obj) const;
  std::optional<Triple> make_triple(int obj, int pred) const;
  void exec_triple(const Triple& t);
  void select_answer();
  std::size_t sync_plan(const std::vector<int>& executed,
                        const std::vector<char>& was_in_answer);
  void charge(double cost, double& bucket);
  void push_timeline_row(const EpochReport& rep);
  double plan_cost(int pred, int fn) const;
  void run_bootstrap(double& spent);
  void warn(const std::string& msg);

  EpochReport epoch_progressive(std::optional<double> budget_cap);
  EpochReport epoch_baseline(std::optional<double> budget_cap);
  bool baseline_exhausted() const;

  // baseline schedules
  void build_baseline_order();
  void ensure_block_resident(int block, double& consumed, EpochReport& rep);

  // disk helpers
  void apply_swaps(const DiskPlan& plan);
  void refresh_block_benefits();

  Config cfg_;
  Expression expr_;
  std::vector<const TagType*> pred_tt_;  // per predicate
  std::vector<int> pred_tt_index_;
  std::vector<int> seed_fn_;             // per predicate
  std::vector<std::vector<double>> costs_;  // planning costs per (tt, fn)
  Dataset objs_;  // filtered working set
  std::vector<std::string> ids_;
  DecisionTable table_;
  LogicalClock clock_;
  std::vector<std::vector<PredicateState>> st_;  // [object][predicate]
  std::vector<double> esp_;
  AnswerSelection ans_;
  std::vector<char> in_answer_;
  PlanQueue pq_;
  bool plan_built_ = false;
  std::size_t pending_ops_ = 0;
  int epoch_ = 0;
  double init_cost_ = 0.0, sum_t0_ = 0.0, sum_exec_ = 0.0, sum_load_ = 0.0;
  bool bootstrap_done_ = true;  // false only for online table learning
  std::mt19937_64 rng_;
  Timeline timeline_;
  std::unordered_set<std::string> truth_;
  std::vector<std::string> warnings_;

  // baselines
  std::vector<Triple> baseline_sched_;
  std::size_t baseline_pos_ = 0;
  std::vector<Triple> random_pool_;
  bool order_charged_ = false;

  // disk mode
  std::vector<Block> blocks_;
  std::vector<int> object_block_;
  std::vector<double> block_benefit_;
  std::vector<char> block_touched_;
};

}  // namespace proq
