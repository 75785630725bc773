#include "proq/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "proq/probability.hpp"

namespace proq {

// Acklam's rational approximation to the probit function.
double norm_ppf(double p) {
  if (p <= 0.0 || p >= 1.0)
    throw std::domain_error("norm_ppf: p outside (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > phigh) {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
             c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
          a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

void LogicalClock::charge(double cost) {
  now += cost;
  if (realtime && cost > 0.0)
    std::this_thread::sleep_for(std::chrono::duration<double>(cost));
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_string(std::uint64_t h, const std::string& s) {
  for (unsigned char c : s) h = splitmix64(h ^ c);
  return splitmix64(h ^ s.size());
}

// Strictly inside (0, 1).
double to_unit(std::uint64_t x) {
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

double separation(double quality) {
  double q = std::clamp(quality, 0.5, 1.0 - 1e-9);
  return std::sqrt(2.0) * norm_ppf(q);
}

}  // namespace

std::uint64_t derive_stream(std::uint64_t seed, const std::string& function_id,
                            const std::string& object_id,
                            const std::string& tag) {
  std::uint64_t h = splitmix64(seed);
  h = mix_string(h, function_id);
  h = mix_string(h, object_id);
  h = mix_string(h, tag);
  return h;
}

EvalResult evaluate_function(const FunctionSpec& fn, std::uint64_t seed,
                             const std::string& object_id,
                             const std::string& tag, bool truth_matches,
                             double cost_jitter, LogicalClock& clock) {
  std::uint64_t s0 = derive_stream(seed, fn.id, object_id, tag);
  double delta = separation(fn.quality);
  double score =
      norm_ppf(to_unit(splitmix64(s0 ^ 0x1))) + (truth_matches ? delta : 0.0);
  // Posterior under equal priors for score ~ N(delta*match, 1).
  double prob = 1.0 / (1.0 + std::exp(delta * delta / 2.0 - delta * score));
  double cost = fn.cost;
  if (cost_jitter > 0.0) {
    double u = to_unit(splitmix64(s0 ^ 0x2));
    cost *= 1.0 + cost_jitter * (2.0 * u - 1.0);
  }
  clock.charge(cost);
  return {prob, cost};
}

ValidationSet make_validation_set(const TagType& tt, int n,
                                  std::uint64_t seed) {
  if (tt.tags.empty()) throw ConfigError("tag type without tags: " + tt.id);
  ValidationSet vs;
  vs.tag_type = tt.id;
  std::uint64_t h = mix_string(splitmix64(seed), tt.id);
  for (int i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "v%05d", i);
    vs.object_ids.emplace_back(buf);
    // round-robin keeps tag priors exactly equal
    vs.truth.push_back(tt.tags[(i + static_cast<int>(h % tt.tags.size())) %
                               tt.tags.size()]);
  }
  return vs;
}

double learn_cost(const FunctionSpec& fn, const ValidationSet& vs,
                  std::uint64_t seed, double cost_jitter) {
  if (vs.object_ids.empty()) throw std::invalid_argument("empty validation set");
  LogicalClock c;
  for (std::size_t i = 0; i < vs.object_ids.size(); ++i)
    evaluate_function(fn, seed, vs.object_ids[i], vs.truth[i],
                      true, cost_jitter, c);
  return c.now / static_cast<double>(vs.object_ids.size());
}

double learn_quality_auc(const FunctionSpec& fn, const TagType& tt,
                         const ValidationSet& vs, std::uint64_t seed) {
  std::vector<std::pair<double, int>> scored;  // (output, label)
  LogicalClock c;
  for (std::size_t i = 0; i < vs.object_ids.size(); ++i)
    for (const std::string& tag : tt.tags) {
      bool match = vs.truth[i] == tag;
      double out = evaluate_function(fn, seed, vs.object_ids[i], tag, match,
                                     0.0, c)
                       .probability;
      scored.emplace_back(out, match ? 1 : 0);
    }
  std::sort(scored.begin(), scored.end());
  // Mann-Whitney with midranks for ties.
  double n_pos = 0, n_neg = 0, rank_sum = 0;
  std::size_t i = 0;
  while (i < scored.size()) {
    std::size_t j = i;
    while (j < scored.size() && scored[j].first == scored[i].first) ++j;
    double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (scored[k].second) rank_sum += midrank;
    i = j;
  }
  for (const auto& [s, l] : scored) (l ? n_pos : n_neg) += 1.0;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("degenerate validation labels");
  return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg);
}

std::vector<ReliabilityBin> reliability_diagram(const FunctionSpec& fn,
                                                const TagType& tt,
                                                const ValidationSet& vs,
                                                std::uint64_t seed, int bins) {
  std::vector<ReliabilityBin> out(bins);
  for (int b = 0; b < bins; ++b) {
    out[b].lo = static_cast<double>(b) / bins;
    out[b].hi = static_cast<double>(b + 1) / bins;
  }
  LogicalClock c;
  for (std::size_t i = 0; i < vs.object_ids.size(); ++i)
    for (const std::string& tag : tt.tags) {
      bool match = vs.truth[i] == tag;
      double p = evaluate_function(fn, seed, vs.object_ids[i], tag, match, 0.0,
                                   c)
                     .probability;
      int b = std::min(static_cast<int>(p * bins), bins - 1);
      out[b].mean_predicted += p;
      out[b].fraction_true += match ? 1.0 : 0.0;
      out[b].count += 1;
    }
  for (auto& bin : out)
    if (bin.count) {
      bin.mean_predicted /= static_cast<double>(bin.count);
      bin.fraction_true /= static_cast<double>(bin.count);
    }
  return out;
}

int seed_function(std::span<const FunctionSpec> fns) {
  if (fns.empty()) throw std::invalid_argument("no functions");
  int best = 0;
  double best_rate = fns[0].quality / fns[0].cost;
  for (std::size_t i = 1; i < fns.size(); ++i) {
    double rate = fns[i].quality / fns[i].cost;
    if (rate > best_rate) {
      best_rate = rate;
      best = static_cast<int>(i);
    }
  }
  return best;
}

namespace {

// Unique execution states reachable as order prefixes (non-empty, proper).
std::vector<std::uint32_t> prefix_states(int nf, std::uint64_t seed,
                                         int max_orders) {
  std::vector<std::uint32_t> states;
  auto add_prefixes = [&](const std::vector<int>& order) {
    std::uint32_t bits = 0;
    for (int k = 0; k < nf - 1; ++k) {
      bits |= 1u << order[k];
      if (std::find(states.begin(), states.end(), bits) == states.end())
        states.push_back(bits);
    }
  };
  std::vector<int> order(nf);
  std::iota(order.begin(), order.end(), 0);
  if (nf <= 4) {
    do
      add_prefixes(order);
    while (std::next_permutation(order.begin(), order.end()));
  } else {
    std::mt19937_64 rng(splitmix64(seed ^ 0x0fdecade));
    for (int i = 0; i < max_orders; ++i) {
      std::shuffle(order.begin(), order.end(), rng);
      add_prefixes(order);
    }
  }
  std::sort(states.begin(), states.end());
  return states;
}

double fused_prob(const TagType& tt, std::uint32_t bits,
                  std::span<const double> outputs) {
  std::vector<double> outs, quals;
  for (std::size_t j = 0; j < tt.functions.size(); ++j)
    if ((bits >> j) & 1u) {
      outs.push_back(outputs[j]);
      quals.push_back(tt.functions[j].quality);
    }
  return combine_outputs(outs, quals);
}

}  // namespace

DecisionTable build_table_from_outputs(
    const TagType& tt,
    const std::vector<std::vector<std::vector<double>>>& outputs,
    std::uint64_t seed, int buckets, int max_orders) {
  const int nf = static_cast<int>(tt.functions.size());
  if (nf == 0) throw ConfigError("tag type without functions: " + tt.id);
  DecisionTable table(buckets);
  std::vector<std::uint32_t> states = prefix_states(nf, seed, max_orders);

  struct Acc {
    double sum = 0.0;
    std::size_t count = 0;
  };
  // (tag, state, bucket, candidate) -> reduction stats
  std::map<std::tuple<std::string, std::uint32_t, int, int>, Acc> acc;

  for (const auto& sample : outputs) {
    for (std::size_t g = 0; g < tt.tags.size(); ++g) {
      const std::vector<double>& outs = sample[g];
      for (std::uint32_t bits : states) {
        double h = entropy(fused_prob(tt, bits, outs));
        int bucket = table.bucket_of(h);
        for (int f = 0; f < nf; ++f) {
          if ((bits >> f) & 1u) continue;
          double h_next = entropy(fused_prob(tt, bits | (1u << f), outs));
          auto& a = acc[{tt.tags[g], bits, bucket, f}];
          a.sum += h - h_next;
          a.count += 1;
        }
      }
    }
  }

  // Best mean reduction per (tag, state, bucket); ties to the lower index.
  std::map<std::tuple<std::string, std::uint32_t, int>, std::pair<int, double>>
      best;
  for (const auto& [key, a] : acc) {
    const auto& [tag, bits, bucket, f] = key;
    double mean = a.sum / static_cast<double>(a.count);
    auto k = std::make_tuple(tag, bits, bucket);
    auto it = best.find(k);
    if (it == best.end() || mean > it->second.second)
      best[k] = {f, mean};
  }
  for (const auto& [key, choice] : best) {
    const auto& [tag, bits, bucket] = key;
    StateVector st = make_state(nf);
    st.bits = bits;
    table.set(tt.id, tag, st, bucket, choice.first,
              std::min(0.0, -choice.second));
  }
  return table;
}

DecisionTable learn_decision_table(const TagType& tt, const ValidationSet& vs,
                                   std::uint64_t seed, int buckets,
                                   int max_orders) {
  const int nf = static_cast<int>(tt.functions.size());
  if (nf == 0) throw ConfigError("tag type without functions: " + tt.id);
  LogicalClock c;
  std::vector<std::vector<std::vector<double>>> outputs(
      vs.object_ids.size(),
      std::vector<std::vector<double>>(tt.tags.size(),
                                       std::vector<double>(nf)));
  for (std::size_t i = 0; i < vs.object_ids.size(); ++i)
    for (std::size_t g = 0; g < tt.tags.size(); ++g) {
      bool match = vs.truth[i] == tt.tags[g];
      for (int j = 0; j < nf; ++j)
        outputs[i][g][j] =
            evaluate_function(tt.functions[j], seed, vs.object_ids[i],
                              tt.tags[g], match, 0.0, c)
                .probability;
    }
  return build_table_from_outputs(tt, outputs, seed, buckets, max_orders);
}

DecisionTable merge_tables(std::vector<DecisionTable> parts) {
  if (parts.empty()) return DecisionTable();
  DecisionTable out = std::move(parts.front());
  for (std::size_t i = 1; i < parts.size(); ++i) out.absorb(parts[i]);
  return out;
}

BootstrapResult bootstrap_decision_table(
    const TagType& tt, std::span<const Object* const> objects, double budget,
    std::uint64_t seed, int buckets, double cost_jitter, LogicalClock& clock) {
  const int nf = static_cast<int>(tt.functions.size());
  BootstrapResult res;
  res.table = DecisionTable(buckets);
  res.mean_costs.assign(nf, 0.0);
  if (objects.empty() || nf == 0) return res;

  std::mt19937_64 rng(splitmix64(seed ^ 0xb007));
  std::vector<std::vector<int>> orders;
  std::vector<int> base(nf);
  std::iota(base.begin(), base.end(), 0);
  if (nf <= 4) {
    do
      orders.push_back(base);
    while (std::next_permutation(base.begin(), base.end()));
    std::shuffle(orders.begin(), orders.end(), rng);
  } else {
    for (int i = 0; i < 24; ++i) {
      std::shuffle(base.begin(), base.end(), rng);
      orders.push_back(base);
    }
  }
  std::vector<int> visit(objects.size());
  std::iota(visit.begin(), visit.end(), 0);
  std::shuffle(visit.begin(), visit.end(), rng);

  struct Acc {
    double sum = 0.0;
    std::size_t count = 0;
  };
  std::map<std::tuple<std::string, std::uint32_t, int, int>, Acc> acc;
  std::vector<double> cost_sum(nf, 0.0);
  std::vector<std::size_t> cost_n(nf, 0);

  double consumed = 0.0;
  bool exhausted = false;
  for (std::size_t vi = 0; vi < visit.size() && !exhausted; ++vi) {
    const Object& obj = *objects[visit[vi]];
    const auto& order = orders[vi % orders.size()];
    std::vector<std::vector<double>> outputs(
        tt.tags.size(), std::vector<double>(nf, 0.0));
    std::uint32_t bits = 0;
    for (int step = 0; step < nf; ++step) {
      int f = order[step];
      if (consumed + tt.functions[f].cost > budget) {
        exhausted = true;
        break;
      }
      // One run scores every tag of the type at a single charge.
      double charged = 0.0;
      auto truth_it = obj.truth.find(tt.id);
      for (std::size_t g = 0; g < tt.tags.size(); ++g) {
        bool match =
            truth_it != obj.truth.end() && truth_it->second == tt.tags[g];
        LogicalClock probe;
        EvalResult r = evaluate_function(tt.functions[f], seed, obj.id,
                                         tt.tags[g], match, cost_jitter, probe);
        outputs[g][f] = r.probability;
        charged = r.cost;
      }
      clock.charge(charged);
      consumed += charged;
      cost_sum[f] += charged;
      cost_n[f] += 1;
      if (bits != 0) {
        for (std::size_t g = 0; g < tt.tags.size(); ++g) {
          double h = entropy(fused_prob(tt, bits, outputs[g]));
          double h_next =
              entropy(fused_prob(tt, bits | (1u << f), outputs[g]));
          auto& a = acc[{tt.tags[g], bits, res.table.bucket_of(h), f}];
          a.sum += h - h_next;
          a.count += 1;
        }
      }
      bits |= 1u << f;
    }
  }

  std::map<std::tuple<std::string, std::uint32_t, int>, std::pair<int, double>>
      best;
  for (const auto& [key, a] : acc) {
    const auto& [tag, bits, bucket, f] = key;
    double mean = a.sum / static_cast<double>(a.count);
    auto k = std::make_tuple(tag, bits, bucket);
    auto it = best.find(k);
    if (it == best.end() || mean > it->second.second) best[k] = {f, mean};
  }
  for (const auto& [key, choice] : best) {
    const auto& [tag, bits, bucket] = key;
    StateVector st = make_state(nf);
    st.bits = bits;
    res.table.set(tt.id, tag, st, bucket, choice.first,
                  std::min(0.0, -choice.second));
  }
  for (int f = 0; f < nf; ++f)
    res.mean_costs[f] =
        cost_n[f] ? cost_sum[f] / static_cast<double>(cost_n[f])
                  : tt.functions[f].cost;
  res.consumed = consumed;
  return res;
}

}  // namespace proq
