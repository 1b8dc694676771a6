#pragma once

// Predicate-argument pairs and the labeled analogy instances built from them.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "analogy/corpus.hpp"
#include "analogy/embed.hpp"

namespace analogy {

// role_name is carried for labeling and transfer only; model features are
// built from the two span keys and nothing else.
struct PredicateArgumentPair {
  std::uint32_t pair_id = 0;
  std::string frame_name;
  SpanKey predicate_key;
  SpanKey element_key;
  std::string role_name;

  bool operator==(const PredicateArgumentPair&) const = default;
};

struct AnalogyInstance {
  std::uint32_t src = 0;
  std::uint32_t tgt = 0;
  std::uint8_t label = 0;  // 1 iff both pairs carry the same role

  bool operator==(const AnalogyInstance&) const = default;
};

struct PairTable {
  std::vector<PredicateArgumentPair> pairs;  // pairs[i].pair_id == i
  std::map<std::string, std::vector<std::uint32_t>> by_frame;

  std::vector<PredicateArgumentPair> group(const std::string& frame) const;
};

// One pair per (annotation, spanned element), in corpus order. Null
// instantiations are skipped.
PairTable collect_pairs(const Corpus& corpus);

// Rebuilds by_frame from pairs (used after loading a pair table file).
void index_pairs(PairTable& table);

// Ordered Cartesian product of one frame's pairs. Throws DataError if the
// group mixes frames.
std::vector<AnalogyInstance> build_instances(std::span<const PredicateArgumentPair> group,
                                             bool include_self_pairs = true);

struct InstanceCounts {
  std::uint64_t total = 0;
  std::uint64_t positive = 0;
  std::uint64_t negative = 0;
  // Same counts with src == tgt instances removed, for comparing against
  // published totals of unknown convention.
  std::uint64_t total_without_self = 0;
  std::uint64_t positive_without_self = 0;

  bool operator==(const InstanceCounts&) const = default;
};

InstanceCounts count_instances(std::span<const AnalogyInstance> instances);

// Concatenation of build_instances over every frame group, in by_frame order.
// Frames are processed on up to `threads` threads; output is independent of
// the thread count.
std::vector<AnalogyInstance> build_all_instances(const PairTable& table,
                                                 bool include_self_pairs = true,
                                                 unsigned threads = 1);

// Uniformly downsamples the majority class (without replacement) to the
// minority count. Relative order of the kept instances is preserved.
std::vector<AnalogyInstance> balance(std::span<const AnalogyInstance> instances, std::uint64_t seed);

struct InstanceShard {
  std::uint32_t shard_index = 0;
  std::vector<AnalogyInstance> instances;
};

// Global shuffle followed by a block split; sizes differ by at most one.
std::vector<InstanceShard> shard(std::span<const AnalogyInstance> instances,
                                 std::uint32_t n_shards, std::uint64_t seed);

// Shard file: "AINS" | u16 version | u32 shard_index | u32 n_shards |
// u64 count | count x (u32 src, u32 tgt, u8 label), little-endian.
inline constexpr std::uint16_t kShardVersion = 1;
std::string serialize_shard(const InstanceShard& shard, std::uint32_t n_shards);
InstanceShard deserialize_shard(std::string_view bytes, std::uint32_t* n_shards = nullptr);
void write_shard(const InstanceShard& shard, std::uint32_t n_shards,
                 const std::filesystem::path& path);
InstanceShard read_shard(const std::filesystem::path& path, std::uint32_t* n_shards = nullptr);

// Pair table sidecar: JSONL, first line {"format":"analogy-pairs","version":1},
// then one {"pair_id","frame","predicate_key","element_key","role"} per line.
void write_pair_table(const PairTable& table, const std::filesystem::path& path);
PairTable read_pair_table(const std::filesystem::path& path);

inline void build_instance_vector(const EmbeddingStore& store, const PredicateArgumentPair& src,
                                  const PredicateArgumentPair& tgt, std::span<float> out) {
  build_instance_vector(store, src.predicate_key, src.element_key, tgt.predicate_key,
                        tgt.element_key, out);
}

inline std::vector<float> build_instance_vector(const EmbeddingStore& store,
                                                const PredicateArgumentPair& src,
                                                const PredicateArgumentPair& tgt) {
  std::vector<float> out(4 * static_cast<std::size_t>(store.dim()));
  build_instance_vector(store, src, tgt, out);
  return out;
}

}  // namespace analogy
