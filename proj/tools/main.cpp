// proq: progressive query evaluation over lazily enriched data.
//
// Subcommands:
//   gen         write a synthetic dataset plus a matching config
//   run         one approach -> timeline CSV
//   compare     all approaches, shared seed -> per-approach CSVs + report
//   sweep-epoch two-phase epoch-size calibration -> report
//   disk-run    run with the block-storage engine

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "proq/config.hpp"
#include "proq/engine.hpp"
#include "proq/harness.hpp"
#include "proq/metrics.hpp"
#include "proq/model.hpp"

namespace {

struct RunOpts {
  std::string dataset;
  std::string config;
  std::string out = "timeline.csv";
  std::string approach;
  std::string stop = "full";
  std::string mode;
  double alpha = -1.0;
  double epoch = -1.0;
  std::int64_t seed = -1;
};

void add_run_flags(CLI::App* cmd, RunOpts& o, bool with_mode) {
  cmd->add_option("--dataset", o.dataset, "dataset JSON-lines file")
      ->required();
  cmd->add_option("--config", o.config, "config JSON file")->required();
  cmd->add_option("--out", o.out, "timeline CSV path");
  cmd->add_option("--approach", o.approach,
                  "progressive|function-first|object-first|random");
  cmd->add_option("--stop", o.stop, "full | budget=N | target=F");
  cmd->add_option("--alpha", o.alpha, "F weighting parameter");
  cmd->add_option("--epoch", o.epoch, "epoch length (cost units)");
  cmd->add_option("--seed", o.seed, "RNG seed override");
  if (with_mode) cmd->add_option("--mode", o.mode, "mem | disk");
}

proq::Config load_overridden(const RunOpts& o) {
  proq::Config cfg = proq::load_config(o.config);
  if (o.alpha >= 0.0) cfg.engine.alpha = o.alpha;
  if (o.epoch >= 0.0) cfg.engine.epoch = o.epoch;
  if (o.seed >= 0) cfg.engine.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.approach.empty())
    cfg.engine.approach = proq::parse_approach(o.approach);
  if (o.mode == "disk")
    cfg.disk.enabled = true;
  else if (o.mode == "mem")
    cfg.disk.enabled = false;
  else if (!o.mode.empty())
    throw proq::ConfigError("unknown --mode: " + o.mode);
  return cfg;
}

int do_run(const RunOpts& o, bool force_disk) {
  proq::Config cfg = load_overridden(o);
  if (force_disk) cfg.disk.enabled = true;
  proq::Dataset ds = proq::load_dataset(o.dataset);
  proq::StopRule stop = proq::StopRule::parse(o.stop);
  proq::RunResult r = proq::run_query(cfg, ds, stop);
  proq::write_timeline_csv(r.timeline, o.out);
  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("epochs %d clock %.12g expected_f %.12g true_f %.12g\n",
              r.epochs, r.completion,
              r.timeline.empty() ? 0.0 : r.timeline.back().expected,
              r.final_true_f);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"progressive query evaluation over lazily enriched data"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate dataset + config");
  int gen_n = 2000;
  double gen_sel = 0.05;
  std::int64_t gen_seed = 1;
  std::string gen_out = "dataset.jsonl";
  std::string gen_cfg = "config.json";
  gen->add_option("--n", gen_n, "object count");
  gen->add_option("--selectivity", gen_sel, "precise filter selectivity");
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--out", gen_out, "dataset path");
  gen->add_option("--config-out", gen_cfg, "config path");

  RunOpts run_o;
  auto* run = app.add_subcommand("run", "run one approach");
  add_run_flags(run, run_o, true);

  RunOpts disk_o;
  auto* diskrun = app.add_subcommand("disk-run", "run with block storage");
  add_run_flags(diskrun, disk_o, false);

  RunOpts cmp_o;
  std::string cmp_dir = ".";
  std::string cmp_report = "report.json";
  auto* cmp = app.add_subcommand("compare", "score all approaches");
  cmp->add_option("--dataset", cmp_o.dataset, "dataset JSON-lines file")
      ->required();
  cmp->add_option("--config", cmp_o.config, "config JSON file")->required();
  cmp->add_option("--alpha", cmp_o.alpha, "F weighting parameter");
  cmp->add_option("--epoch", cmp_o.epoch, "epoch length (cost units)");
  cmp->add_option("--seed", cmp_o.seed, "RNG seed override");
  cmp->add_option("--mode", cmp_o.mode, "mem | disk");
  cmp->add_option("--out-dir", cmp_dir, "directory for per-approach CSVs");
  cmp->add_option("--report", cmp_report, "progressiveness report path");

  RunOpts sw_o;
  std::string sw_report = "sweep.json";
  auto* sweep = app.add_subcommand("sweep-epoch", "calibrate epoch length");
  sweep->add_option("--dataset", sw_o.dataset, "dataset JSON-lines file")
      ->required();
  sweep->add_option("--config", sw_o.config, "config JSON file")->required();
  sweep->add_option("--alpha", sw_o.alpha, "F weighting parameter");
  sweep->add_option("--seed", sw_o.seed, "RNG seed override");
  sweep->add_option("--report", sw_report, "sweep report path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      proq::Config cfg = proq::standard_config(gen_sel);
      cfg.engine.seed = static_cast<std::uint64_t>(gen_seed);
      proq::Dataset ds =
          proq::standard_dataset(gen_n, static_cast<std::uint64_t>(gen_seed));
      proq::save_dataset(ds, gen_out);
      proq::save_config(cfg, gen_cfg);
      std::printf("wrote %zu objects to %s, config to %s\n",
                  ds.objects.size(), gen_out.c_str(), gen_cfg.c_str());
      return 0;
    }
    if (run->parsed()) return do_run(run_o, false);
    if (diskrun->parsed()) return do_run(disk_o, true);
    if (cmp->parsed()) {
      proq::Config cfg = load_overridden(cmp_o);
      proq::Dataset ds = proq::load_dataset(cmp_o.dataset);
      proq::CompareResult res = proq::compare_approaches(cfg, ds, cmp_dir);
      proq::write_compare_report(res, cmp_report);
      for (const auto& row : res.rows)
        std::printf("%-15s score %.4f completion %.6g final_f1 %.4f%s\n",
                    proq::approach_name(row.approach), row.score,
                    row.completion, row.final_true_f,
                    row.degenerate_gain ? " (degenerate gain)" : "");
      return 0;
    }
    if (sweep->parsed()) {
      proq::Config cfg = load_overridden(sw_o);
      proq::Dataset ds = proq::load_dataset(sw_o.dataset);
      proq::SweepResult res = proq::epoch_sweep(cfg, ds);
      proq::write_sweep_report(res, sw_report);
      std::printf("T_q %.6g best epoch %.6g (fraction %.3g)\n", res.t_q,
                  res.best_epoch, res.best_fraction);
      return 0;
    }
  } catch (const proq::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
