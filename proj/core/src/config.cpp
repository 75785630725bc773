#include "proq/config.hpp"

#include <fstream>

#include <json.hpp>

namespace proq {

using nlohmann::ordered_json;

Approach parse_approach(const std::string& name) {
  if (name == "progressive") return Approach::Progressive;
  if (name == "function-first" || name == "b1") return Approach::FunctionFirst;
  if (name == "object-first" || name == "b2") return Approach::ObjectFirst;
  if (name == "random" || name == "b3") return Approach::RandomTriples;
  throw ConfigError("unknown approach: " + name);
}

std::string approach_name(Approach a) {
  switch (a) {
    case Approach::Progressive: return "progressive";
    case Approach::FunctionFirst: return "function-first";
    case Approach::ObjectFirst: return "object-first";
    case Approach::RandomTriples: return "random";
  }
  return "?";
}

StopRule StopRule::parse(const std::string& text) {
  StopRule s;
  if (text == "full" || text == "fully-tagged" || text.empty()) {
    s.kind = Kind::FullyTagged;
    return s;
  }
  auto eq = text.find('=');
  std::string head = text.substr(0, eq);
  if (head == "budget" || head == "target") {
    if (eq == std::string::npos)
      throw ConfigError("stop rule '" + head + "' needs a value");
    double v;
    try {
      v = std::stod(text.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad stop rule value: " + text);
    }
    if (v <= 0.0) throw ConfigError("stop rule value must be positive");
    s.kind = head == "budget" ? Kind::Budget : Kind::Target;
    s.value = v;
    return s;
  }
  throw ConfigError("unknown stop rule: " + text);
}

std::string StopRule::to_string() const {
  switch (kind) {
    case Kind::FullyTagged: return "full";
    case Kind::Budget: return "budget=" + std::to_string(value);
    case Kind::Target: return "target=" + std::to_string(value);
  }
  return "?";
}

namespace {

std::string table_source_name(TableSource s) {
  switch (s) {
    case TableSource::LearnOffline: return "offline";
    case TableSource::LearnOnline: return "online";
    case TableSource::File: return "file";
  }
  return "?";
}

TableSource parse_table_source(const std::string& s) {
  if (s == "offline") return TableSource::LearnOffline;
  if (s == "online") return TableSource::LearnOnline;
  if (s == "file") return TableSource::File;
  throw ConfigError("unknown table source: " + s);
}

PreciseValue precise_value(const ordered_json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  throw ConfigError("unsupported filter value: " + v.dump());
}

ordered_json precise_json(const PreciseValue& v) {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
  if (std::holds_alternative<double>(v)) {
    double d = std::get<double>(v);
    if (d == static_cast<long long>(d)) return static_cast<long long>(d);
    return d;
  }
  return std::get<std::string>(v);
}

}  // namespace

Config config_from_json_string(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse: ") + e.what());
  }
  Config cfg;
  if (!j.contains("schema") || !j["schema"].contains("tag_types"))
    throw ConfigError("config lacks schema.tag_types");
  for (const auto& tj : j["schema"]["tag_types"]) {
    TagType tt;
    tt.id = tj.at("id").get<std::string>();
    for (const auto& g : tj.value("tags", ordered_json::array()))
      tt.tags.push_back(g.get<std::string>());
    for (const auto& fj : tj.value("functions", ordered_json::array())) {
      FunctionSpec fn;
      fn.id = fj.at("id").get<std::string>();
      fn.quality = fj.at("quality").get<double>();
      fn.cost = fj.at("cost").get<double>();
      tt.functions.push_back(std::move(fn));
    }
    cfg.schema.tag_types.push_back(std::move(tt));
  }
  if (!j.contains("expression"))
    throw ConfigError("config lacks an expression");
  cfg.expression = j["expression"].get<std::string>();

  for (auto& [attr, cj] : j.value("filter", ordered_json::object()).items()) {
    PreciseCondition cond;
    if (cj.contains("eq")) {
      cond.kind = PreciseCondition::Kind::Eq;
      cond.eq = precise_value(cj["eq"]);
    } else if (cj.contains("in")) {
      cond.kind = PreciseCondition::Kind::In;
      for (const auto& v : cj["in"]) cond.in_set.push_back(precise_value(v));
    } else if (cj.contains("range")) {
      if (!cj["range"].is_array() || cj["range"].size() != 2)
        throw ConfigError("filter range must be [lo, hi]");
      cond.kind = PreciseCondition::Kind::Range;
      cond.lo = cj["range"][0].get<double>();
      cond.hi = cj["range"][1].get<double>();
    } else {
      throw ConfigError("filter condition needs eq, in or range: " + attr);
    }
    cfg.filter[attr] = std::move(cond);
  }

  if (j.contains("engine")) {
    const auto& e = j["engine"];
    auto& s = cfg.engine;
    s.alpha = e.value("alpha", s.alpha);
    s.epoch = e.value("epoch", s.epoch);
    s.seed = e.value("seed", s.seed);
    s.plan_unit_cost = e.value("plan_unit_cost", s.plan_unit_cost);
    s.cost_jitter = e.value("cost_jitter", s.cost_jitter);
    s.decision_buckets = e.value("decision_buckets", s.decision_buckets);
    if (e.contains("table_source"))
      s.table_source = parse_table_source(e["table_source"].get<std::string>());
    s.table_path = e.value("table_path", s.table_path);
    s.online_fraction = e.value("online_fraction", s.online_fraction);
    s.validation_size = e.value("validation_size", s.validation_size);
    if (e.contains("approach"))
      s.approach = parse_approach(e["approach"].get<std::string>());
  }
  if (j.contains("disk")) {
    const auto& d = j["disk"];
    auto& s = cfg.disk;
    s.enabled = d.value("enabled", s.enabled);
    s.block_size = d.value("block_size", s.block_size);
    s.capacity = d.value("capacity", s.capacity);
    s.load_cost = d.value("load_cost", s.load_cost);
    s.block_file = d.value("block_file", s.block_file);
    s.index_file = d.value("index_file", s.index_file);
  }
  if (j.contains("sweep")) {
    const auto& w = j["sweep"];
    if (w.contains("probe_epochs")) {
      cfg.sweep.probe_epochs.clear();
      for (const auto& v : w["probe_epochs"])
        cfg.sweep.probe_epochs.push_back(v.get<double>());
    }
    if (w.contains("fractions")) {
      cfg.sweep.fractions.clear();
      for (const auto& v : w["fractions"])
        cfg.sweep.fractions.push_back(v.get<double>());
    }
  }
  return cfg;
}

std::string config_to_json_string(const Config& cfg) {
  ordered_json j;
  ordered_json tts = ordered_json::array();
  for (const auto& tt : cfg.schema.tag_types) {
    ordered_json tj;
    tj["id"] = tt.id;
    tj["tags"] = tt.tags;
    ordered_json fns = ordered_json::array();
    for (const auto& fn : tt.functions) {
      ordered_json fj;
      fj["id"] = fn.id;
      fj["quality"] = fn.quality;
      fj["cost"] = fn.cost;
      fns.push_back(fj);
    }
    tj["functions"] = fns;
    tts.push_back(tj);
  }
  j["schema"]["tag_types"] = tts;
  j["expression"] = cfg.expression;

  ordered_json filt = ordered_json::object();
  for (const auto& [attr, cond] : cfg.filter) {
    ordered_json cj;
    switch (cond.kind) {
      case PreciseCondition::Kind::Eq:
        cj["eq"] = precise_json(cond.eq);
        break;
      case PreciseCondition::Kind::In: {
        ordered_json arr = ordered_json::array();
        for (const auto& v : cond.in_set) arr.push_back(precise_json(v));
        cj["in"] = arr;
        break;
      }
      case PreciseCondition::Kind::Range:
        cj["range"] = {cond.lo, cond.hi};
        break;
    }
    filt[attr] = cj;
  }
  j["filter"] = filt;

  const auto& e = cfg.engine;
  j["engine"]["alpha"] = e.alpha;
  j["engine"]["epoch"] = e.epoch;
  j["engine"]["seed"] = e.seed;
  j["engine"]["plan_unit_cost"] = e.plan_unit_cost;
  j["engine"]["cost_jitter"] = e.cost_jitter;
  j["engine"]["decision_buckets"] = e.decision_buckets;
  j["engine"]["table_source"] = table_source_name(e.table_source);
  if (!e.table_path.empty()) j["engine"]["table_path"] = e.table_path;
  j["engine"]["online_fraction"] = e.online_fraction;
  j["engine"]["validation_size"] = e.validation_size;
  j["engine"]["approach"] = approach_name(e.approach);

  const auto& d = cfg.disk;
  j["disk"]["enabled"] = d.enabled;
  j["disk"]["block_size"] = d.block_size;
  j["disk"]["capacity"] = d.capacity;
  j["disk"]["load_cost"] = d.load_cost;
  j["disk"]["block_file"] = d.block_file;
  j["disk"]["index_file"] = d.index_file;

  j["sweep"]["probe_epochs"] = cfg.sweep.probe_epochs;
  j["sweep"]["fractions"] = cfg.sweep.fractions;
  // checkpoint weights decrease toward the horizon (the guard on weight
  // growth in the source formulation reads as a typo for decrease)
  j["notes"]["progressiveness_weights"] =
      "linear_decreasing: W(v_i) = max(1 - v_{i-1}/v_end, 0)";
  return j.dump(2);
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return config_from_json_string(text);
}

void save_config(const Config& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config: " + path);
  out << config_to_json_string(cfg) << "\n";
}

}  // namespace proq
