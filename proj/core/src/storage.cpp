#include "proq/storage.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace proq {

using nlohmann::ordered_json;

std::vector<Block> partition_blocks(std::span<const int> order,
                                    int block_size) {
  if (block_size < 1) throw ConfigError("block_size < 1");
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < order.size(); i += block_size) {
    Block b;
    b.id = static_cast<int>(blocks.size());
    std::size_t end = std::min(order.size(), i + block_size);
    b.objects.assign(order.begin() + i, order.begin() + end);
    b.in_memory = true;
    blocks.push_back(std::move(b));
  }
  return blocks;
}

namespace {

ordered_json object_json(const Object& o) {
  ordered_json j;
  j["id"] = o.id;
  ordered_json pj = ordered_json::object();
  for (const auto& [k, v] : o.precise) {
    if (std::holds_alternative<bool>(v))
      pj[k] = std::get<bool>(v);
    else if (std::holds_alternative<double>(v)) {
      double d = std::get<double>(v);
      if (d == static_cast<long long>(d))
        pj[k] = static_cast<long long>(d);
      else
        pj[k] = d;
    } else
      pj[k] = std::get<std::string>(v);
  }
  j["precise"] = pj;
  ordered_json tj = ordered_json::object();
  for (const auto& [k, v] : o.truth) tj[k] = v;
  j["truth"] = tj;
  return j;
}

}  // namespace

void write_block_file(const Dataset& ds, std::vector<Block>& blocks,
                      const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write block file: " + path);
  std::uint64_t offset = 0;
  for (Block& b : blocks) {
    b.byte_lo = offset;
    for (int idx : b.objects) {
      std::string line = object_json(ds.objects[idx]).dump();
      line += '\n';
      out.write(line.data(), static_cast<std::streamsize>(line.size()));
      offset += line.size();
    }
    b.byte_hi = offset;
  }
}

void write_block_index(const std::vector<Block>& blocks, const Dataset& ds,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write block index: " + path);
  ordered_json arr = ordered_json::array();
  for (const Block& b : blocks) {
    ordered_json j;
    j["block_id"] = b.id;
    j["byte_lo"] = b.byte_lo;
    j["byte_hi"] = b.byte_hi;
    ordered_json ids = ordered_json::array();
    for (int idx : b.objects) ids.push_back(ds.objects[idx].id);
    j["object_ids"] = ids;
    arr.push_back(j);
  }
  out << arr.dump(2) << "\n";
}

std::vector<BlockIndexEntry> read_block_index(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open block index: " + path);
  ordered_json arr;
  try {
    in >> arr;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("block index parse: ") + e.what());
  }
  std::vector<BlockIndexEntry> out;
  for (const auto& j : arr) {
    BlockIndexEntry e;
    e.id = j["block_id"].get<int>();
    e.byte_lo = j["byte_lo"].get<std::uint64_t>();
    e.byte_hi = j["byte_hi"].get<std::uint64_t>();
    for (const auto& id : j["object_ids"])
      e.object_ids.push_back(id.get<std::string>());
    out.push_back(std::move(e));
  }
  return out;
}

void load_block_payloads(const std::string& path, const Block& b,
                         Dataset& ds) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open block file: " + path);
  in.seekg(static_cast<std::streamoff>(b.byte_lo));
  std::string slice(b.byte_hi - b.byte_lo, '\0');
  in.read(slice.data(), static_cast<std::streamsize>(slice.size()));
  if (static_cast<std::uint64_t>(in.gcount()) != slice.size())
    throw ConfigError("short read from block file: " + path);
  std::istringstream ss(slice);
  std::string line;
  std::size_t pos = 0;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    if (pos >= b.objects.size())
      throw ConfigError("block slice holds more objects than indexed");
    Object& o = ds.objects[b.objects[pos]];
    ordered_json j = ordered_json::parse(line);
    if (j["id"].get<std::string>() != o.id)
      throw ConfigError("block file out of sync at object " + o.id);
    o.precise.clear();
    o.truth.clear();
    if (j.contains("precise"))
      for (auto& [k, v] : j["precise"].items()) {
        if (v.is_boolean())
          o.precise[k] = v.get<bool>();
        else if (v.is_number())
          o.precise[k] = v.get<double>();
        else
          o.precise[k] = v.get<std::string>();
      }
    if (j.contains("truth"))
      for (auto& [k, v] : j["truth"].items()) o.truth[k] = v.get<std::string>();
    o.payload_loaded = true;
    ++pos;
  }
  if (pos != b.objects.size())
    throw ConfigError("block slice holds fewer objects than indexed");
}

void drop_block_payloads(const Block& b, Dataset& ds) {
  for (int idx : b.objects) {
    Object& o = ds.objects[idx];
    o.precise.clear();
    o.truth.clear();
    o.payload_loaded = false;
  }
}

BlockQueues build_block_queues(std::span<const Block> blocks) {
  BlockQueues q;
  for (const Block& b : blocks)
    (b.in_memory ? q.mem_asc : q.disk_desc).push_back(b.id);
  std::sort(q.mem_asc.begin(), q.mem_asc.end(), [&](int a, int b) {
    if (blocks[a].benefit != blocks[b].benefit)
      return blocks[a].benefit < blocks[b].benefit;
    return a < b;
  });
  std::sort(q.disk_desc.begin(), q.disk_desc.end(), [&](int a, int b) {
    if (blocks[a].benefit != blocks[b].benefit)
      return blocks[a].benefit > blocks[b].benefit;
    return a < b;
  });
  return q;
}

std::vector<double> block_benefits(const PlanQueue& pq,
                                   std::span<const int> object_block,
                                   std::size_t n_blocks) {
  std::vector<double> out(n_blocks, 0.0);
  for (const Triple& t : pq) {
    int b = object_block[t.object];
    if (b >= 0 && static_cast<std::size_t>(b) < n_blocks)
      out[b] += t.benefit;
  }
  return out;
}

DiskPlan enumerate_disk_plans(std::span<const Block> blocks,
                              const BlockQueues& queues, const PlanQueue& pq,
                              std::span<const int> object_block, int d0,
                              double load_cost, double budget) {
  DiskPlan best;
  bool have_best = false;
  const int max_loads =
      std::min(d0, static_cast<int>(queues.disk_desc.size()));
  const int mem_count = static_cast<int>(queues.mem_asc.size());

  std::vector<char> resident(blocks.size());
  for (int b = 0; b <= max_loads; ++b) {
    double load_time = static_cast<double>(b) * load_cost;
    double exec_budget = budget - load_time;
    if (exec_budget < 0.0 && b > 0) continue;

    for (const Block& blk : blocks) resident[blk.id] = blk.in_memory ? 1 : 0;
    DiskPlan plan;
    plan.loads = b;
    plan.load_time = load_time;
    int flush_count = std::max(0, mem_count + b - d0);
    for (int i = 0; i < flush_count; ++i) {
      plan.flush.push_back(queues.mem_asc[i]);
      resident[queues.mem_asc[i]] = 0;
    }
    for (int i = 0; i < b; ++i) {
      plan.load.push_back(queues.disk_desc[i]);
      resident[queues.disk_desc[i]] = 1;
    }

    double consumed = 0.0;
    for (const Triple& t : pq) {
      if (!resident[object_block[t.object]]) continue;
      if (consumed + t.cost > exec_budget) break;
      consumed += t.cost;
      plan.benefit += t.benefit;
      plan.triples.push_back(t);
    }

    if (!have_best || plan.benefit > best.benefit) {
      best = std::move(plan);
      have_best = true;
    }
  }
  return best;
}

}  // namespace proq
