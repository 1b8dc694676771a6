#include "analogy/instances.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <string>

#include "analogy/binary_io.hpp"
#include "analogy/error.hpp"
#include "analogy/rng.hpp"
#include "json.hpp"

namespace analogy {

std::vector<PredicateArgumentPair> PairTable::group(const std::string& frame) const {
  std::vector<PredicateArgumentPair> out;
  auto it = by_frame.find(frame);
  if (it == by_frame.end()) return out;
  out.reserve(it->second.size());
  for (auto id : it->second) out.push_back(pairs[id]);
  return out;
}

void index_pairs(PairTable& table) {
  table.by_frame.clear();
  for (std::size_t i = 0; i < table.pairs.size(); ++i) {
    if (table.pairs[i].pair_id != i) {
      throw DataError("pair table is not densely indexed at position " + std::to_string(i));
    }
    table.by_frame[table.pairs[i].frame_name].push_back(static_cast<std::uint32_t>(i));
  }
}

PairTable collect_pairs(const Corpus& corpus) {
  PairTable table;
  for (const auto& s : corpus) {
    for (const auto& ann : s.annotations) {
      const SpanKey predicate = span_key(s, ann.trigger);
      for (const auto& fe : ann.elements) {
        if (!fe.span) continue;
        PredicateArgumentPair p;
        p.pair_id = static_cast<std::uint32_t>(table.pairs.size());
        p.frame_name = ann.frame_name;
        p.predicate_key = predicate;
        p.element_key = span_key(s, *fe.span);
        p.role_name = fe.role_name;
        table.pairs.push_back(std::move(p));
      }
    }
  }
  index_pairs(table);
  return table;
}

std::vector<AnalogyInstance> build_instances(std::span<const PredicateArgumentPair> group,
                                             bool include_self_pairs) {
  std::vector<AnalogyInstance> out;
  if (group.empty()) return out;
  const std::string& frame = group.front().frame_name;
  for (const auto& p : group) {
    if (p.frame_name != frame) {
      throw DataError("frame group mixes '" + frame + "' and '" + p.frame_name + "'");
    }
  }
  out.reserve(group.size() * group.size());
  for (std::size_t i = 0; i < group.size(); ++i) {
    for (std::size_t j = 0; j < group.size(); ++j) {
      if (!include_self_pairs && i == j) continue;
      out.push_back({group[i].pair_id, group[j].pair_id,
                     static_cast<std::uint8_t>(group[i].role_name == group[j].role_name)});
    }
  }
  return out;
}

InstanceCounts count_instances(std::span<const AnalogyInstance> instances) {
  InstanceCounts c;
  for (const auto& x : instances) {
    ++c.total;
    c.positive += x.label;
    if (x.src != x.tgt) {
      ++c.total_without_self;
      c.positive_without_self += x.label;
    }
  }
  c.negative = c.total - c.positive;
  return c;
}

std::vector<AnalogyInstance> build_all_instances(const PairTable& table, bool include_self_pairs,
                                                 unsigned threads) {
  std::vector<const std::vector<std::uint32_t>*> groups;
  for (const auto& [frame, ids] : table.by_frame) groups.push_back(&ids);

  auto build_group = [&](std::size_t g) {
    std::vector<PredicateArgumentPair> members;
    members.reserve(groups[g]->size());
    for (auto id : *groups[g]) members.push_back(table.pairs[id]);
    return build_instances(members, include_self_pairs);
  };

  std::vector<std::vector<AnalogyInstance>> parts(groups.size());
  threads = std::max(1u, threads);
  if (threads == 1) {
    for (std::size_t g = 0; g < groups.size(); ++g) parts[g] = build_group(g);
  } else {
    std::vector<std::future<void>> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.push_back(std::async(std::launch::async, [&, t] {
        for (std::size_t g = t; g < groups.size(); g += threads) parts[g] = build_group(g);
      }));
    }
    for (auto& w : workers) w.get();
  }

  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  std::vector<AnalogyInstance> out;
  out.reserve(total);
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::vector<AnalogyInstance> balance(std::span<const AnalogyInstance> instances, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    (instances[i].label ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty()) {
    throw DataError("cannot balance instances: the " + std::string(pos.empty() ? "positive" : "negative") +
                    " class is empty");
  }
  const auto& majority = pos.size() > neg.size() ? pos : neg;
  const std::size_t keep = std::min(pos.size(), neg.size());

  std::vector<char> kept(instances.size(), 1);
  if (majority.size() > keep) {
    for (auto i : majority) kept[i] = 0;
    Rng rng(seed);
    for (auto k : rng.sample_indices(majority.size(), keep)) kept[majority[k]] = 1;
  }
  std::vector<AnalogyInstance> out;
  out.reserve(2 * keep);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (kept[i]) out.push_back(instances[i]);
  }
  return out;
}

std::vector<InstanceShard> shard(std::span<const AnalogyInstance> instances, std::uint32_t n_shards,
                                 std::uint64_t seed) {
  if (n_shards == 0) throw DataError("number of shards must be positive");
  std::vector<AnalogyInstance> shuffled(instances.begin(), instances.end());
  Rng rng(seed);
  rng.shuffle(shuffled);

  std::vector<InstanceShard> out(n_shards);
  const std::size_t base = shuffled.size() / n_shards;
  const std::size_t extra = shuffled.size() % n_shards;
  std::size_t pos = 0;
  for (std::uint32_t k = 0; k < n_shards; ++k) {
    const std::size_t n = base + (k < extra ? 1 : 0);
    out[k].shard_index = k;
    out[k].instances.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(pos),
                            shuffled.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::string_view kShardMagic = "AINS";
}

std::string serialize_shard(const InstanceShard& s, std::uint32_t n_shards) {
  ByteWriter w;
  w.bytes(kShardMagic);
  w.u16(kShardVersion);
  w.u32(s.shard_index);
  w.u32(n_shards);
  w.u64(s.instances.size());
  for (const auto& x : s.instances) {
    w.u32(x.src);
    w.u32(x.tgt);
    w.u8(x.label);
  }
  return w.take();
}

InstanceShard deserialize_shard(std::string_view bytes, std::uint32_t* n_shards) {
  ByteReader r(bytes, "instance shard");
  if (r.remaining() < 4 || r.bytes(4) != kShardMagic) {
    throw FormatError("instance shard: bad magic (expected AINS)");
  }
  const auto version = r.u16();
  if (version != kShardVersion) {
    throw FormatError("instance shard: unsupported version " + std::to_string(version));
  }
  InstanceShard s;
  s.shard_index = r.u32();
  const auto total = r.u32();
  if (n_shards) *n_shards = total;
  const auto count = r.u64();
  if (count * 9 != r.remaining()) {
    throw FormatError("instance shard: header announces " + std::to_string(count) +
                      " records but " + std::to_string(r.remaining()) + " bytes follow");
  }
  s.instances.resize(count);
  for (auto& x : s.instances) {
    x.src = r.u32();
    x.tgt = r.u32();
    x.label = r.u8();
    if (x.label > 1) throw FormatError("instance shard: label out of range");
  }
  return s;
}

void write_shard(const InstanceShard& s, std::uint32_t n_shards, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_shard(s, n_shards));
}

InstanceShard read_shard(const std::filesystem::path& path, std::uint32_t* n_shards) {
  return deserialize_shard(read_file_bytes(path), n_shards);
}

void write_pair_table(const PairTable& table, const std::filesystem::path& path) {
  std::string out = R"({"format":"analogy-pairs","version":1})";
  out += '\n';
  for (const auto& p : table.pairs) {
    nlohmann::ordered_json j;
    j["pair_id"] = p.pair_id;
    j["frame"] = p.frame_name;
    j["predicate_key"] = p.predicate_key.canonical();
    j["element_key"] = p.element_key.canonical();
    j["role"] = p.role_name;
    out += j.dump();
    out += '\n';
  }
  write_file_bytes(path, out);
}

PairTable read_pair_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  PairTable table;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(n, "$", std::string("invalid JSON: ") + e.what());
    }
    if (n == 1) {
      if (!j.is_object() || j.value("format", "") != "analogy-pairs") {
        throw SchemaError(n, "$.format", "not an analogy pair table");
      }
      if (j.value("version", 0) != 1) throw SchemaError(n, "$.version", "unsupported version");
      continue;
    }
    auto field = [&](const char* key) -> const nlohmann::json& {
      if (!j.is_object() || !j.contains(key)) throw SchemaError(n, std::string("$.") + key, "missing field");
      return j.at(key);
    };
    auto str = [&](const char* key) {
      const auto& v = field(key);
      if (!v.is_string()) throw SchemaError(n, std::string("$.") + key, "expected a string");
      return v.get<std::string>();
    };
    PredicateArgumentPair p;
    const auto& id = field("pair_id");
    if (!id.is_number_unsigned()) throw SchemaError(n, "$.pair_id", "expected a non-negative integer");
    p.pair_id = id.get<std::uint32_t>();
    p.frame_name = str("frame");
    try {
      p.predicate_key = SpanKey::parse(str("predicate_key"));
      p.element_key = SpanKey::parse(str("element_key"));
    } catch (const SchemaError&) {
      throw;
    } catch (const DataError& e) {
      throw SchemaError(n, "$.predicate_key/element_key", e.what());
    }
    p.role_name = str("role");
    table.pairs.push_back(std::move(p));
  }
  if (n == 0) throw DataError("pair table '" + path.string() + "' is empty");
  index_pairs(table);
  return table;
}

}  // namespace analogy
