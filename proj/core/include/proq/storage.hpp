#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "proq/model.hpp"
#include "proq/planner.hpp"

namespace proq {

// Contiguous chunk of the initial-ESP ordering whose payloads page in and
// out together.
struct Block {
  int id = -1;
  std::vector<int> objects;  // indices into the engine's object array
  std::uint64_t byte_lo = 0, byte_hi = 0;  // slice of the block file
  bool in_memory = false;
  double benefit = 0.0;  // sum of queued triple benefits over its objects
};

// Splits object indices (already sorted by initial ESP descending) into
// blocks of block_size (last one may be short).
std::vector<Block> partition_blocks(std::span<const int> order, int block_size);

// Writes objects as JSON lines grouped by block and fills byte ranges.
void write_block_file(const Dataset& ds, std::vector<Block>& blocks,
                      const std::string& path);

// Sidecar with one entry per block: id, byte range, object ids.
void write_block_index(const std::vector<Block>& blocks, const Dataset& ds,
                       const std::string& path);
struct BlockIndexEntry {
  int id;
  std::uint64_t byte_lo, byte_hi;
  std::vector<std::string> object_ids;
};
std::vector<BlockIndexEntry> read_block_index(const std::string& path);

// Restores the payloads of one block from the block file.
void load_block_payloads(const std::string& path, const Block& b, Dataset& ds);
void drop_block_payloads(const Block& b, Dataset& ds);

// Memory-resident blocks ordered by benefit ascending (flush candidates
// first) and disk-resident ones descending (load candidates first). Ties
// break on lower block id.
struct BlockQueues {
  std::vector<int> mem_asc;
  std::vector<int> disk_desc;
};
BlockQueues build_block_queues(std::span<const Block> blocks);

// Sum of queued triple benefits per block; object_block maps object index
// to block id.
std::vector<double> block_benefits(const PlanQueue& pq,
                                   std::span<const int> object_block,
                                   std::size_t n_blocks);

struct DiskPlan {
  int loads = 0;                // b: blocks pulled from disk
  std::vector<int> flush;       // block ids to drop (lowest benefit first)
  std::vector<int> load;        // block ids to pull (highest benefit first)
  std::vector<Triple> triples;  // execution schedule, queue order
  double benefit = 0.0;         // sum of scheduled triple benefits
  double load_time = 0.0;
};

// Evaluates swap plans b = 0..d0: load the b most beneficial disk blocks,
// flush the least beneficial residents that no longer fit the memory
// capacity d0, then schedule queued triples whose blocks are resident after
// the swap into the remaining budget minus b * load_cost (stopping at the
// first triple that does not fit). Returns the plan with maximal scheduled
// benefit (ties: fewer loads).
DiskPlan enumerate_disk_plans(std::span<const Block> blocks,
                              const BlockQueues& queues, const PlanQueue& pq,
                              std::span<const int> object_block, int d0,
                              double load_cost, double budget);

}  // namespace proq
