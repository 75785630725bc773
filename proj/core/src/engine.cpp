#include "proq/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "proq/probability.hpp"

namespace proq {

namespace {

std::vector<int> all_indices(std::size_t n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

Engine::Engine(const Config& cfg, const Dataset& full) : cfg_(cfg) {
  expr_ = parse_expression(cfg_.expression, cfg_.schema);
  validate();

  std::vector<int> keep = filter_precise(full, cfg_.filter);
  objs_.objects.reserve(keep.size());
  for (int i : keep) objs_.objects.push_back(full.objects[i]);
  for (const auto& o : objs_.objects) ids_.push_back(o.id);

  for (const auto& p : expr_.predicates) {
    pred_tt_.push_back(cfg_.schema.find(p.tag_type));
    pred_tt_index_.push_back(cfg_.schema.index_of(p.tag_type));
    seed_fn_.push_back(seed_function(pred_tt_.back()->functions));
  }
  costs_.resize(cfg_.schema.tag_types.size());
  for (std::size_t t = 0; t < cfg_.schema.tag_types.size(); ++t)
    for (const auto& fn : cfg_.schema.tag_types[t].functions)
      costs_[t].push_back(fn.cost);

  rng_.seed(cfg_.engine.seed ^ 0x9e3779b97f4a7c15ULL);
  init();
}

void Engine::validate() const {
  const auto& e = cfg_.engine;
  if (e.alpha <= 0.0) throw ConfigError("alpha must be positive");
  if (e.epoch <= 0.0) throw ConfigError("epoch length must be positive");
  if (e.plan_unit_cost < 0.0) throw ConfigError("plan_unit_cost negative");
  if (e.decision_buckets < 1) throw ConfigError("decision_buckets < 1");
  if (e.online_fraction < 0.0 || e.online_fraction > 1.0)
    throw ConfigError("online_fraction outside [0, 1]");
  if (e.validation_size < 1) throw ConfigError("validation_size < 1");
  std::set<std::string> seen;
  for (const auto& p : expr_.predicates) {
    if (!seen.insert(p.tag_type).second) continue;
    const TagType* tt = cfg_.schema.find(p.tag_type);
    if (!tt || tt->functions.empty())
      throw ConfigError("tag type without enrichment functions: " +
                        p.tag_type);
    if (tt->functions.size() > 32)
      throw ConfigError("more than 32 functions for tag type: " + p.tag_type);
    for (const auto& fn : tt->functions) {
      if (!(fn.quality > 0.5 && fn.quality <= 1.0))
        throw ConfigError("function quality outside (0.5, 1]: " + fn.id);
      if (fn.cost <= 0.0) throw ConfigError("function cost <= 0: " + fn.id);
    }
  }
  if (cfg_.disk.enabled) {
    if (cfg_.disk.block_size < 1) throw ConfigError("block_size < 1");
    if (cfg_.disk.capacity < 1) throw ConfigError("disk capacity < 1");
    if (cfg_.disk.load_cost < 0.0) throw ConfigError("load_cost negative");
  }
}

void Engine::init() {
  const std::size_t n = objs_.objects.size();
  const std::size_t np = expr_.predicates.size();

  truth_ = ground_truth_set(expr_, objs_, all_indices(n));

  // Parameter table: offline learning happens on validation data before the
  // clock starts; online mode defers to a bootstrap slice of epoch 1.
  table_ = DecisionTable(cfg_.engine.decision_buckets);
  switch (cfg_.engine.table_source) {
    case TableSource::File:
      table_ = DecisionTable::load(cfg_.engine.table_path);
      break;
    case TableSource::LearnOffline: {
      std::vector<DecisionTable> parts;
      std::set<std::string> seen;
      for (const auto& p : expr_.predicates) {
        if (!seen.insert(p.tag_type).second) continue;
        const TagType* tt = cfg_.schema.find(p.tag_type);
        ValidationSet vs = make_validation_set(
            *tt, cfg_.engine.validation_size,
            cfg_.engine.seed ^ 0x5eedf00dULL);
        parts.push_back(learn_decision_table(
            *tt, vs, cfg_.engine.seed ^ 0x5eedf00dULL,
            cfg_.engine.decision_buckets));
      }
      table_ = merge_tables(std::move(parts));
      break;
    }
    case TableSource::LearnOnline:
      bootstrap_done_ = false;
      break;
  }

  // Seed pass: the cheapest-per-quality function of each predicate runs on
  // every object so each state starts non-empty.
  st_.assign(n, std::vector<PredicateState>(np));
  esp_.assign(n, 0.0);
  std::vector<double> probs(np);
  for (std::size_t i = 0; i < n; ++i) {
    const Object& o = objs_.objects[i];
    for (std::size_t k = 0; k < np; ++k) {
      const Predicate& pred = expr_.predicates[k];
      const TagType& tt = *pred_tt_[k];
      const FunctionSpec& fn = tt.functions[seed_fn_[k]];
      auto it = o.truth.find(tt.id);
      bool match = it != o.truth.end() && it->second == pred.tag;
      LogicalClock probe;
      EvalResult r = evaluate_function(fn, cfg_.engine.seed, o.id, pred.tag,
                                       match, cfg_.engine.cost_jitter, probe);
      clock_.charge(r.cost);
      auto& ps = st_[i][k];
      ps.state = make_state(static_cast<int>(tt.functions.size()));
      ps.state = mark_executed(ps.state, seed_fn_[k]);
      ps.outputs.push_back(apply_op(r.probability, pred.op));
      ps.qualities.push_back(fn.quality);
      ps.prob = combine_outputs(ps.outputs, ps.qualities);
      probs[k] = ps.prob;
    }
    esp_[i] = esp(expr_, probs);
  }
  init_cost_ = clock_.now;

  select_answer();
  if (cfg_.disk.enabled) init_disk();

  EpochReport rep;
  rep.epoch = 0;
  rep.clock_after = clock_.now;
  rep.expected = ans_.expected;
  rep.answer_size = static_cast<int>(ans_.answer.size());
  push_timeline_row(rep);
}

void Engine::init_disk() {
  std::vector<int> order = all_indices(objs_.objects.size());
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (esp_[a] != esp_[b]) return esp_[a] > esp_[b];
    return ids_[a] < ids_[b];
  });
  blocks_ = partition_blocks(order, cfg_.disk.block_size);
  write_block_file(objs_, blocks_, cfg_.disk.block_file);
  write_block_index(blocks_, objs_, cfg_.disk.index_file);
  object_block_.assign(objs_.objects.size(), -1);
  for (const Block& b : blocks_)
    for (int o : b.objects) object_block_[o] = b.id;
  for (Block& b : blocks_) {
    drop_block_payloads(b, objs_);
    b.in_memory = false;
  }
  block_benefit_.assign(blocks_.size(), 0.0);
  block_touched_.assign(blocks_.size(), 0);
}

void Engine::charge(double cost, double& bucket) {
  bucket += cost;
  clock_.charge(cost);
  // keep the conservation identity exact under float reassociation
  clock_.now = init_cost_ + sum_t0_ + sum_exec_ + sum_load_;
}

void Engine::warn(const std::string& msg) {
  if (std::find(warnings_.begin(), warnings_.end(), msg) == warnings_.end())
    warnings_.push_back(msg);
}

double Engine::plan_cost(int pred, int fn) const {
  return costs_[pred_tt_index_[pred]][fn];
}

void Engine::select_answer() {
  ans_ = select_answer_set(ids_, esp_, cfg_.engine.alpha);
  in_answer_.assign(objs_.objects.size(), 0);
  for (int idx : ans_.answer) in_answer_[idx] = 1;
}

std::vector<std::string> Engine::answer_ids() const {
  std::vector<std::string> out;
  out.reserve(ans_.answer.size());
  for (int idx : ans_.answer) out.push_back(ids_[idx]);
  return out;
}

TrueScore Engine::score_answer() const {
  auto ids = answer_ids();
  return true_score(ids, truth_, cfg_.engine.alpha);
}

bool Engine::fully_tagged() const {
  // No work left for the active approach. Progressive runs finish when the
  // refreshed plan is empty (answer members generate no triples, so their
  // remaining functions stay unexecuted); baselines when their order runs out.
  if (cfg_.engine.approach == Approach::Progressive)
    return plan_built_ && pq_.empty() && pending_ops_ == 0 && bootstrap_done_;
  return order_charged_ && baseline_exhausted();
}

std::optional<Triple> Engine::make_triple(int obj, int pred) const {
  const PredicateState& ps = st_[obj][pred];
  if (ps.state.all()) return std::nullopt;
  const Predicate& p = expr_.predicates[pred];
  const TagType& tt = *pred_tt_[pred];
  double h = entropy(ps.prob);
  auto nf = next_function(table_, tt, p.tag, ps.state, h);
  if (!nf) return std::nullopt;

  const std::size_t np = expr_.predicates.size();
  std::vector<double> probs(np);
  for (std::size_t k = 0; k < np; ++k) probs[k] = st_[obj][k].prob;
  EspEstimate est = estimate_esp(expr_, probs, pred, nf->expected_delta);

  Triple t;
  t.object = obj;
  t.predicate = pred;
  t.function = nf->function;
  t.cost = plan_cost(pred, nf->function);
  t.esp_before = esp_[obj];
  double delta = std::max(0.0, est.esp - esp_[obj]);
  t.esp_after_est = esp_[obj] + delta;
  t.benefit = triple_benefit(esp_[obj], delta, t.cost);
  t.object_id = ids_[obj];
  return t;
}

std::size_t Engine::gen_triples(PlanQueue& pq, int obj) const {
  std::size_t ops = 0;
  for (std::size_t k = 0; k < expr_.predicates.size(); ++k)
    if (auto t = make_triple(obj, static_cast<int>(k)); t && pq.insert(*t))
      ++ops;
  return ops;
}

std::size_t Engine::build_plan(PlanQueue& pq) const {
  std::size_t ops = 0;
  for (std::size_t i = 0; i < objs_.objects.size(); ++i)
    if (!in_answer_[i]) ops += gen_triples(pq, static_cast<int>(i));
  return ops;
}

PlanQueue Engine::rebuild_plan() const {
  PlanQueue fresh;
  build_plan(fresh);
  return fresh;
}

void Engine::exec_triple(const Triple& t) {
  if (cfg_.disk.enabled && !blocks_[object_block_[t.object]].in_memory)
    throw std::logic_error("enrichment step on a paged-out block");
  const Predicate& pred = expr_.predicates[t.predicate];
  const TagType& tt = *pred_tt_[t.predicate];
  const FunctionSpec& fn = tt.functions[t.function];
  const Object& o = objs_.objects[t.object];
  auto it = o.truth.find(tt.id);
  bool match = it != o.truth.end() && it->second == pred.tag;
  LogicalClock probe;
  EvalResult r = evaluate_function(fn, cfg_.engine.seed, o.id, pred.tag, match,
                                   cfg_.engine.cost_jitter, probe);
  charge(r.cost, sum_exec_);

  auto& ps = st_[t.object][t.predicate];
  ps.state = mark_executed(ps.state, t.function);
  ps.outputs.push_back(apply_op(r.probability, pred.op));
  ps.qualities.push_back(fn.quality);
  ps.prob = combine_outputs(ps.outputs, ps.qualities);

  const std::size_t np = expr_.predicates.size();
  std::vector<double> probs(np);
  for (std::size_t k = 0; k < np; ++k) probs[k] = st_[t.object][k].prob;
  esp_[t.object] = esp(expr_, probs);
}

std::size_t Engine::sync_plan(const std::vector<int>& executed,
                              const std::vector<char>& was_in_answer) {
  std::vector<int> affected = executed;
  for (std::size_t i = 0; i < in_answer_.size(); ++i)
    if (in_answer_[i] != was_in_answer[i]) affected.push_back(static_cast<int>(i));
  std::sort(affected.begin(), affected.end());
  affected.erase(std::unique(affected.begin(), affected.end()),
                 affected.end());

  std::size_t ops = 0;
  for (int o : affected) {
    ops += pq_.erase_object(o);
    if (!in_answer_[o]) ops += gen_triples(pq_, o);
    if (cfg_.disk.enabled) block_touched_[object_block_[o]] = 1;
  }
  if (cfg_.disk.enabled) refresh_block_benefits();
  return ops;
}

void Engine::refresh_block_benefits() {
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (!block_touched_[b]) continue;
    double sum = 0.0;
    for (int o : blocks_[b].objects)
      for (const Triple& t : pq_.triples_of(o)) sum += t.benefit;
    block_benefit_[b] = sum;
    blocks_[b].benefit = sum;
    block_touched_[b] = 0;
  }
}

std::vector<double> Engine::current_block_benefits() const {
  return block_benefits(pq_, object_block_, blocks_.size());
}

void Engine::run_bootstrap(double& spent) {
  double budget = cfg_.engine.online_fraction * cfg_.engine.epoch;
  std::set<std::string> seen;
  std::vector<const TagType*> tts;
  for (const auto& p : expr_.predicates)
    if (seen.insert(p.tag_type).second) tts.push_back(cfg_.schema.find(p.tag_type));
  double share = budget / static_cast<double>(tts.size());
  for (std::size_t i = 0; i < tts.size(); ++i) {
    std::vector<const Object*> ptrs;
    for (const auto& o : objs_.objects)
      if (o.payload_loaded) ptrs.push_back(&o);
    LogicalClock probe;
    BootstrapResult res = bootstrap_decision_table(
        *tts[i], ptrs, share, cfg_.engine.seed + i, cfg_.engine.decision_buckets,
        cfg_.engine.cost_jitter, probe);
    charge(probe.now, sum_exec_);
    spent += probe.now;
    table_.absorb(res.table);
  }
  bootstrap_done_ = true;
}

EpochReport Engine::run_epoch(std::optional<double> budget_cap) {
  return cfg_.engine.approach == Approach::Progressive
             ? epoch_progressive(budget_cap)
             : epoch_baseline(budget_cap);
}

EpochReport Engine::epoch_progressive(std::optional<double> budget_cap) {
  ++epoch_;
  EpochReport rep;
  rep.epoch = epoch_;

  double bootstrap_spent = 0.0;
  if (!bootstrap_done_) run_bootstrap(bootstrap_spent);

  std::size_t ops;
  if (!plan_built_) {
    ops = build_plan(pq_);
    plan_built_ = true;
    if (cfg_.disk.enabled) {
      std::fill(block_touched_.begin(), block_touched_.end(), 1);
      refresh_block_benefits();
    }
  } else {
    ops = pending_ops_;
  }
  pending_ops_ = 0;
  double t0 = cfg_.engine.plan_unit_cost * static_cast<double>(ops);
  charge(t0, sum_t0_);
  rep.t0 = t0;

  double spend_cap = cfg_.engine.epoch - t0 - bootstrap_spent;
  if (spend_cap < 0.0) {
    warn("epoch budget consumed entirely by plan bookkeeping");
    spend_cap = 0.0;
  }

  std::vector<char> was = in_answer_;
  std::vector<int> executed;

  if (!cfg_.disk.enabled) {
    double consumed = 0.0;
    while (!pq_.empty()) {
      const Triple& t = pq_.top();
      if (consumed + t.cost > spend_cap) break;
      if (budget_cap && clock_.now + t.cost > *budget_cap) break;
      Triple tr = pq_.pop();
      exec_triple(tr);
      consumed += tr.cost;
      executed.push_back(tr.object);
      ++rep.triples;
    }
    rep.consumed = consumed;
  } else {
    double effective = spend_cap;
    if (budget_cap)
      effective = std::min(effective, std::max(0.0, *budget_cap - clock_.now));
    BlockQueues queues = build_block_queues(blocks_);
    DiskPlan plan =
        enumerate_disk_plans(blocks_, queues, pq_, object_block_,
                             cfg_.disk.capacity, cfg_.disk.load_cost, effective);
    apply_swaps(plan);
    rep.loads = plan.loads;
    for (const Triple& t : plan.triples) {
      pq_.remove(t);
      exec_triple(t);
      rep.consumed += t.cost;
      executed.push_back(t.object);
      ++rep.triples;
    }
  }

  select_answer();
  pending_ops_ = sync_plan(executed, was);

  rep.clock_after = clock_.now;
  rep.expected = ans_.expected;
  rep.answer_size = static_cast<int>(ans_.answer.size());
  push_timeline_row(rep);
  return rep;
}

void Engine::apply_swaps(const DiskPlan& plan) {
  for (int b : plan.flush) {
    drop_block_payloads(blocks_[b], objs_);
    blocks_[b].in_memory = false;
  }
  for (int b : plan.load) {
    load_block_payloads(cfg_.disk.block_file, blocks_[b], objs_);
    blocks_[b].in_memory = true;
  }
  if (plan.load_time > 0.0) charge(plan.load_time, sum_load_);
}

// ---- baselines ----

void Engine::build_baseline_order() {
  std::vector<int> order = all_indices(objs_.objects.size());
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (esp_[a] != esp_[b]) return esp_[a] > esp_[b];
    return ids_[a] < ids_[b];
  });

  // (predicate, function) pairs by quality per cost, best first.
  std::vector<std::pair<int, int>> fns;
  for (std::size_t k = 0; k < expr_.predicates.size(); ++k)
    for (std::size_t j = 0; j < pred_tt_[k]->functions.size(); ++j)
      fns.emplace_back(static_cast<int>(k), static_cast<int>(j));
  auto rate = [&](const std::pair<int, int>& e) {
    const FunctionSpec& f = pred_tt_[e.first]->functions[e.second];
    return f.quality / f.cost;
  };
  std::sort(fns.begin(), fns.end(), [&](const auto& a, const auto& b) {
    double ra = rate(a), rb = rate(b);
    if (ra != rb) return ra > rb;
    return a < b;
  });

  auto push = [&](int o, int k, int j) {
    if (st_[o][k].state.test(j)) return;
    Triple t;
    t.object = o;
    t.predicate = k;
    t.function = j;
    t.cost = plan_cost(k, j);
    t.object_id = ids_[o];
    baseline_sched_.push_back(std::move(t));
  };

  switch (cfg_.engine.approach) {
    case Approach::FunctionFirst:
      for (const auto& [k, j] : fns)
        for (int o : order) push(o, k, j);
      break;
    case Approach::ObjectFirst:
      for (int o : order)
        for (const auto& [k, j] : fns) push(o, k, j);
      break;
    case Approach::RandomTriples:
      for (int o : order)
        for (const auto& [k, j] : fns) push(o, k, j);
      random_pool_ = std::move(baseline_sched_);
      baseline_sched_.clear();
      break;
    default:
      break;
  }

  if (cfg_.disk.enabled) {
    // Disk baselines order work by static block benefit from one throwaway
    // plan build, charged as their ordering overhead.
    PlanQueue tmp;
    std::size_t ops = build_plan(tmp);
    charge(cfg_.engine.plan_unit_cost * static_cast<double>(ops), sum_t0_);
    std::fill(block_touched_.begin(), block_touched_.end(), 1);
    std::vector<double> bb = block_benefits(tmp, object_block_, blocks_.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      block_benefit_[b] = bb[b];
      blocks_[b].benefit = bb[b];
      block_touched_[b] = 0;
    }
    std::vector<int> border = all_indices(blocks_.size());
    std::sort(border.begin(), border.end(), [&](int a, int b) {
      if (block_benefit_[a] != block_benefit_[b])
        return block_benefit_[a] > block_benefit_[b];
      return a < b;
    });
    std::vector<int> rank(blocks_.size());
    for (std::size_t i = 0; i < border.size(); ++i) rank[border[i]] = static_cast<int>(i);
    auto block_of = [&](const Triple& t) { return object_block_[t.object]; };
    // Regroup the schedule so consecutive work stays within one block:
    // object sweeps visit whole blocks in benefit order, function sweeps
    // visit blocks in benefit order within each function segment.
    if (cfg_.engine.approach == Approach::ObjectFirst) {
      std::stable_sort(baseline_sched_.begin(), baseline_sched_.end(),
                       [&](const Triple& a, const Triple& b) {
                         return rank[block_of(a)] < rank[block_of(b)];
                       });
    } else if (cfg_.engine.approach == Approach::FunctionFirst) {
      std::vector<Triple> regrouped;
      regrouped.reserve(baseline_sched_.size());
      std::size_t i = 0;
      while (i < baseline_sched_.size()) {
        std::size_t j = i;
        while (j < baseline_sched_.size() &&
               baseline_sched_[j].predicate == baseline_sched_[i].predicate &&
               baseline_sched_[j].function == baseline_sched_[i].function)
          ++j;
        std::vector<Triple> seg(baseline_sched_.begin() + i,
                                baseline_sched_.begin() + j);
        std::stable_sort(seg.begin(), seg.end(),
                         [&](const Triple& a, const Triple& b) {
                           return rank[block_of(a)] < rank[block_of(b)];
                         });
        for (auto& t : seg) regrouped.push_back(std::move(t));
        i = j;
      }
      baseline_sched_ = std::move(regrouped);
    }
  } else if (cfg_.engine.approach != Approach::RandomTriples) {
    // One-time ordering overhead: one bookkeeping unit per object.
    charge(cfg_.engine.plan_unit_cost * static_cast<double>(objs_.objects.size()),
           sum_t0_);
  }
}

bool Engine::baseline_exhausted() const {
  if (cfg_.engine.approach == Approach::RandomTriples)
    return random_pool_.empty();
  return baseline_pos_ >= baseline_sched_.size();
}

void Engine::ensure_block_resident(int block, double& consumed,
                                   EpochReport& rep) {
  Block& b = blocks_[block];
  if (b.in_memory) return;
  int resident = 0;
  for (const Block& x : blocks_) resident += x.in_memory ? 1 : 0;
  if (resident >= cfg_.disk.capacity) {
    int victim = -1;
    for (const Block& x : blocks_)
      if (x.in_memory &&
          (victim < 0 || block_benefit_[x.id] < block_benefit_[victim]))
        victim = x.id;
    drop_block_payloads(blocks_[victim], objs_);
    blocks_[victim].in_memory = false;
  }
  load_block_payloads(cfg_.disk.block_file, b, objs_);
  b.in_memory = true;
  charge(cfg_.disk.load_cost, sum_load_);
  consumed += cfg_.disk.load_cost;
  ++rep.loads;
}

EpochReport Engine::epoch_baseline(std::optional<double> budget_cap) {
  ++epoch_;
  EpochReport rep;
  rep.epoch = epoch_;

  if (!order_charged_) {
    double before = sum_t0_;
    build_baseline_order();
    rep.t0 = sum_t0_ - before;
    order_charged_ = true;
  }

  const bool random = cfg_.engine.approach == Approach::RandomTriples;
  const double unit = cfg_.engine.plan_unit_cost;
  double spend_cap = cfg_.engine.epoch - rep.t0;
  if (spend_cap < 0.0) spend_cap = 0.0;
  double consumed = 0.0;

  auto fits = [&](double step) {
    if (consumed + step > spend_cap) return false;
    if (budget_cap && clock_.now + step > *budget_cap) return false;
    return true;
  };

  if (!cfg_.disk.enabled) {
    if (random && !random_pool_.empty())
      std::shuffle(random_pool_.begin(), random_pool_.end(), rng_);
    while (!baseline_exhausted()) {
      const Triple& t = random ? random_pool_.back()
                               : baseline_sched_[baseline_pos_];
      double step = t.cost + (random ? unit : 0.0);
      if (!fits(step)) break;
      if (random) {
        charge(unit, sum_t0_);
        rep.t0 += unit;
      }
      exec_triple(t);
      consumed += step;
      ++rep.triples;
      rep.consumed += t.cost;
      if (random)
        random_pool_.pop_back();
      else
        ++baseline_pos_;
    }
  } else if (!random) {
    while (baseline_pos_ < baseline_sched_.size()) {
      const Triple& t = baseline_sched_[baseline_pos_];
      int blk = object_block_[t.object];
      double step = t.cost +
                    (blocks_[blk].in_memory ? 0.0 : cfg_.disk.load_cost);
      if (!fits(step)) break;
      ensure_block_resident(blk, consumed, rep);
      exec_triple(t);
      consumed += t.cost;
      ++rep.triples;
      rep.consumed += t.cost;
      ++baseline_pos_;
    }
  } else {
    // random block walk: prefer resident work, load a random block with
    // pending triples when none is left
    while (!random_pool_.empty()) {
      std::vector<std::size_t> resident_work;
      for (std::size_t i = 0; i < random_pool_.size(); ++i)
        if (blocks_[object_block_[random_pool_[i].object]].in_memory)
          resident_work.push_back(i);
      if (!resident_work.empty()) {
        std::size_t pick = resident_work[rng_() % resident_work.size()];
        Triple t = random_pool_[pick];
        double step = t.cost + unit;
        if (!fits(step)) break;
        charge(unit, sum_t0_);
        rep.t0 += unit;
        exec_triple(t);
        consumed += step;
        ++rep.triples;
        rep.consumed += t.cost;
        random_pool_.erase(random_pool_.begin() + pick);
        continue;
      }
      std::vector<int> candidates;
      for (const Triple& t : random_pool_) candidates.push_back(object_block_[t.object]);
      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()),
                       candidates.end());
      int blk = candidates[rng_() % candidates.size()];
      if (!fits(cfg_.disk.load_cost)) break;
      ensure_block_resident(blk, consumed, rep);
    }
  }

  select_answer();

  rep.clock_after = clock_.now;
  rep.expected = ans_.expected;
  rep.answer_size = static_cast<int>(ans_.answer.size());
  push_timeline_row(rep);
  return rep;
}

void Engine::push_timeline_row(const EpochReport& rep) {
  TrueScore s = score_answer();
  TimelinePoint p;
  p.epoch = rep.epoch;
  p.clock = clock_.now;
  p.t0 = rep.t0;
  p.triples = rep.triples;
  p.expected = ans_.expected;
  p.true_f = s.f;
  p.precision = s.precision;
  p.recall = s.recall;
  p.answer_size = static_cast<int>(ans_.answer.size());
  timeline_.push_back(p);
}

Timeline Engine::run(const StopRule& stop) {
  const bool progressive = cfg_.engine.approach == Approach::Progressive;
  std::optional<double> cap;
  if (stop.kind == StopRule::Kind::Budget) cap = stop.value;
  while (true) {
    if (stop.kind == StopRule::Kind::Target && ans_.expected >= stop.value)
      break;
    if (fully_tagged()) break;
    if (cap) {
      if (clock_.now >= *cap) break;
      double t0n = plan_built_
                       ? cfg_.engine.plan_unit_cost *
                             static_cast<double>(pending_ops_)
                       : 0.0;
      if (clock_.now + t0n > *cap) break;
    }
    EpochReport rep = run_epoch(cap);
    if (rep.triples == 0 && rep.t0 == 0.0 && rep.loads == 0) {
      bool work_left =
          progressive ? !pq_.empty() : !baseline_exhausted();
      if (work_left) warn("stalled: no enrichment step fits the epoch budget");
      break;
    }
  }
  return timeline_;
}

}  // namespace proq
