#include "proq/harness.hpp"

#include "proq/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace proq {

using nlohmann::ordered_json;

Config standard_config(double selectivity) {
  if (selectivity <= 0.0 || selectivity > 1.0)
    throw ConfigError("selectivity outside (0, 1]");
  Config cfg;
  auto mk = [](std::string id, std::vector<std::string> tags,
               const char* prefix) {
    TagType tt;
    tt.id = std::move(id);
    tt.tags = std::move(tags);
    // one cheap, sharp seed candidate plus three heavier refiners; the seed
    // must separate most objects on its own or the first answer set freezes
    // a blob of half-known members that no later epoch may touch
    const double q[] = {0.90, 0.85, 0.88, 0.90};
    const double c[] = {0.25, 1.0, 1.0, 1.0};
    for (int i = 0; i < 4; ++i) {
      FunctionSpec fn;
      fn.id = std::string(prefix) + std::to_string(i);
      fn.quality = q[i];
      fn.cost = c[i];
      tt.functions.push_back(std::move(fn));
    }
    return tt;
  };
  cfg.schema.tag_types.push_back(mk("color", {"red", "blue"}, "cf"));
  cfg.schema.tag_types.push_back(mk("shape", {"circle", "square"}, "sf"));
  cfg.expression = "color(\"red\") AND shape(\"circle\")";

  PreciseCondition cond;
  cond.kind = PreciseCondition::Kind::Range;
  cond.lo = 0.0;
  cond.hi = std::round(selectivity * 1000.0) - 1.0;
  cfg.filter["bucket"] = cond;

  cfg.engine.alpha = 1.0;
  cfg.engine.epoch = 5.0;
  cfg.engine.seed = 1;
  cfg.engine.plan_unit_cost = 1e-4;
  cfg.engine.decision_buckets = 10;
  cfg.engine.validation_size = 400;
  return cfg;
}

Dataset generate_dataset(
    const Schema& schema, int n, std::uint64_t seed,
    const std::map<std::string, std::map<std::string, double>>& priors) {
  Dataset ds;
  ds.objects.reserve(n);
  for (int i = 0; i < n; ++i) {
    Object o;
    char buf[32];
    std::snprintf(buf, sizeof buf, "o%06d", i);
    o.id = buf;
    // bucket walks all residues of 1000, so range filters hit exact shares
    o.precise["bucket"] = static_cast<double>((i * 997) % 1000);
    for (const auto& tt : schema.tag_types) {
      std::uint64_t s = derive_stream(seed, "truth:" + tt.id, o.id, "");
      double u = (static_cast<double>(s >> 11) + 0.5) * 0x1.0p-53;
      auto pit = priors.find(tt.id);
      double cum = 0.0;
      std::string pick = tt.tags.back();
      for (const auto& tag : tt.tags) {
        double p = 1.0 / static_cast<double>(tt.tags.size());
        if (pit != priors.end()) {
          auto t = pit->second.find(tag);
          if (t != pit->second.end()) p = t->second;
        }
        cum += p;
        if (u < cum) {
          pick = tag;
          break;
        }
      }
      o.truth[tt.id] = pick;
    }
    ds.objects.push_back(std::move(o));
  }
  return ds;
}

Dataset standard_dataset(int n, std::uint64_t seed) {
  Config cfg = standard_config();
  // queried tags carry most of the prior: the precise filter has already
  // narrowed the pool, so enrichment adjudicates among plausible candidates
  std::map<std::string, std::map<std::string, double>> priors;
  priors["color"] = {{"red", 0.65}, {"blue", 0.35}};
  priors["shape"] = {{"circle", 0.65}, {"square", 0.35}};
  return generate_dataset(cfg.schema, n, seed, priors);
}

RunResult run_query(const Config& cfg, const Dataset& ds,
                    const StopRule& stop) {
  Engine e(cfg, ds);
  RunResult r;
  r.timeline = e.run(stop);
  r.completion = e.clock_now();
  r.epochs = e.epochs_run();
  r.warnings = e.warnings();
  r.initial_true_f = r.timeline.empty() ? 0.0 : r.timeline.front().true_f;
  r.final_true_f = r.timeline.empty() ? 0.0 : r.timeline.back().true_f;
  return r;
}

CompareResult compare_approaches(const Config& cfg, const Dataset& ds,
                                 const std::string& timeline_dir) {
  const Approach order[] = {Approach::Progressive, Approach::FunctionFirst,
                            Approach::ObjectFirst, Approach::RandomTriples};
  CompareResult res;
  std::vector<RunResult> runs;
  for (Approach a : order) {
    Config c = cfg;
    c.engine.approach = a;
    RunResult r = run_query(c, ds, StopRule{});
    if (!timeline_dir.empty())
      write_timeline_csv(r.timeline, timeline_dir + "/timeline_" +
                                         approach_name(a) + ".csv");
    runs.push_back(std::move(r));
  }
  res.v_end = runs.front().completion;
  for (const auto& r : runs) res.v_end = std::min(res.v_end, r.completion);

  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunResult& r = runs[i];
    CompareRow row;
    row.approach = order[i];
    row.completion = r.completion;
    row.f0 = r.initial_true_f;
    row.f_max = r.final_true_f;
    row.final_true_f = r.final_true_f;
    std::vector<double> times, gains;
    bool degenerate = false;
    for (const auto& p : r.timeline) {
      times.push_back(p.clock);
      bool d = false;
      gains.push_back(gain(p.true_f, row.f0, row.f_max, &d));
      degenerate = degenerate || d;
    }
    row.degenerate_gain = degenerate;
    row.score = progressiveness(times, gains, res.v_end);
    res.rows.push_back(std::move(row));
  }
  return res;
}

void write_compare_report(const CompareResult& res, const std::string& path) {
  ordered_json j = ordered_json::object();
  for (const auto& row : res.rows) {
    ordered_json r;
    r["score"] = row.score;
    r["completion_time"] = row.completion;
    r["final_f1"] = row.final_true_f;
    j[approach_name(row.approach)] = r;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write report: " + path);
  out << j.dump(2) << "\n";
}

namespace {

// An epoch too small for the next enrichment step aborts the run with a
// stall warning. Such a run never finishes the workload, so its abort time
// is not a completion time: letting it into the minima below would shrink
// T_q (and the shared scoring horizon) to roughly the initialization cost
// and make every candidate epoch look equally useless.
bool run_stalled(const RunResult& r) {
  for (const auto& w : r.warnings)
    if (w.find("stalled") != std::string::npos) return true;
  return false;
}

}  // namespace

SweepResult epoch_sweep(const Config& cfg, const Dataset& ds) {
  if (cfg.sweep.probe_epochs.empty() || cfg.sweep.fractions.empty())
    throw ConfigError("sweep needs probe_epochs and fractions");
  SweepResult res;
  res.t_q = 0.0;
  bool finished_probe = false;
  for (double e : cfg.sweep.probe_epochs) {
    Config c = cfg;
    c.engine.epoch = e;
    RunResult r = run_query(c, ds, StopRule{});
    res.probe_completions.push_back(r.completion);
    if (run_stalled(r)) continue;
    if (!finished_probe || r.completion < res.t_q) res.t_q = r.completion;
    finished_probe = true;
  }
  if (!finished_probe)  // nothing completed; fall back to the raw minimum
    for (double c : res.probe_completions)
      if (res.t_q == 0.0 || c < res.t_q) res.t_q = c;

  std::vector<RunResult> runs;
  std::vector<char> finished;
  bool any_finished = false;
  for (double f : cfg.sweep.fractions) {
    Config c = cfg;
    c.engine.epoch = std::max(f * res.t_q, 1e-9);
    runs.push_back(run_query(c, ds, StopRule{}));
    finished.push_back(!run_stalled(runs.back()));
    any_finished = any_finished || finished.back();
  }
  if (!any_finished) finished.assign(runs.size(), 1);
  double v_end = 0.0;
  bool have_end = false;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!finished[i]) continue;
    v_end = have_end ? std::min(v_end, runs[i].completion)
                     : runs[i].completion;
    have_end = true;
  }

  for (std::size_t i = 0; i < runs.size(); ++i) {
    SweepEntry e;
    e.fraction = cfg.sweep.fractions[i];
    e.epoch = std::max(cfg.sweep.fractions[i] * res.t_q, 1e-9);
    e.completion = runs[i].completion;
    if (finished[i]) {
      std::vector<double> times, values;
      for (const auto& p : runs[i].timeline) {
        times.push_back(p.clock);
        values.push_back(p.true_f);
      }
      e.score = progressiveness(times, values, v_end);
    }
    res.entries.push_back(e);
  }
  bool have_best = false;
  double best = 0.0;
  for (std::size_t i = 0; i < res.entries.size(); ++i) {
    if (!finished[i]) continue;
    if (!have_best || res.entries[i].score > best) {
      best = res.entries[i].score;
      res.best_fraction = res.entries[i].fraction;
      res.best_epoch = res.entries[i].epoch;
      have_best = true;
    }
  }
  return res;
}

void write_sweep_report(const SweepResult& res, const std::string& path) {
  ordered_json j;
  j["t_q"] = res.t_q;
  j["probe_completions"] = res.probe_completions;
  ordered_json entries = ordered_json::array();
  for (const auto& e : res.entries) {
    ordered_json ej;
    ej["fraction"] = e.fraction;
    ej["epoch"] = e.epoch;
    ej["score"] = e.score;
    ej["completion"] = e.completion;
    entries.push_back(ej);
  }
  j["entries"] = entries;
  j["best_epoch"] = res.best_epoch;
  j["best_fraction"] = res.best_fraction;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write sweep report: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace proq
