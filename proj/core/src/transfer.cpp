#include "analogy/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>

#include "analogy/binary_io.hpp"
#include "analogy/error.hpp"
#include "analogy/hash.hpp"
#include "analogy/rng.hpp"
#include "json.hpp"

namespace analogy {

std::size_t ReferenceBank::role_size(const std::string& frame, const std::string& role) const {
  auto f = frames.find(frame);
  if (f == frames.end()) return 0;
  auto r = f->second.find(role);
  return r == f->second.end() ? 0 : r->second.size();
}

ReferenceBank build_bank(const PairTable& source_pairs) {
  ReferenceBank bank;
  for (const auto& p : source_pairs.pairs) bank.frames[p.frame_name][p.role_name].push_back(p);
  return bank;
}

ReferenceBank build_bank(const Corpus& source) { return build_bank(collect_pairs(source)); }

void write_bank(const ReferenceBank& bank, const std::filesystem::path& path) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [frame, roles] : bank.frames) {
    nlohmann::ordered_json jr = nlohmann::ordered_json::object();
    for (const auto& [role, pairs] : roles) {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& p : pairs) {
        arr.push_back({{"pair_id", p.pair_id},
                       {"predicate_key", p.predicate_key.canonical()},
                       {"element_key", p.element_key.canonical()}});
      }
      jr[role] = std::move(arr);
    }
    j[frame] = std::move(jr);
  }
  write_file_bytes(path, j.dump() + "\n");
}

ReferenceBank read_bank(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("bank '" + path.string() + "': " + e.what(), e.byte);
  }
  if (!j.is_object()) throw SchemaError(1, "$", "bank must be a JSON object");
  ReferenceBank bank;
  for (const auto& [frame, roles] : j.items()) {
    if (!roles.is_object()) throw SchemaError(1, "$." + frame, "expected an object of roles");
    for (const auto& [role, arr] : roles.items()) {
      const std::string where = "$." + frame + "." + role;
      if (!arr.is_array()) throw SchemaError(1, where, "expected an array of pairs");
      auto& list = bank.frames[frame][role];
      for (const auto& e : arr) {
        if (!e.is_object() || !e.contains("pair_id") || !e.contains("predicate_key") ||
            !e.contains("element_key")) {
          throw SchemaError(1, where, "pair entries need pair_id, predicate_key, element_key");
        }
        PredicateArgumentPair p;
        p.pair_id = e.at("pair_id").get<std::uint32_t>();
        p.frame_name = frame;
        p.role_name = role;
        p.predicate_key = SpanKey::parse(e.at("predicate_key").get<std::string>());
        p.element_key = SpanKey::parse(e.at("element_key").get<std::string>());
        list.push_back(std::move(p));
      }
    }
  }
  return bank;
}

std::vector<PredicateArgumentPair> sample_sources(const ReferenceBank& bank, const std::string& frame,
                                                  const std::string& role, std::uint32_t n_e,
                                                  std::uint64_t seed) {
  std::vector<PredicateArgumentPair> out;
  auto f = bank.frames.find(frame);
  if (f == bank.frames.end()) return out;
  auto r = f->second.find(role);
  if (r == f->second.end()) return out;
  const auto& pool = r->second;
  Rng rng(seed);
  for (auto i : rng.sample_indices(pool.size(), n_e)) out.push_back(pool[i]);
  return out;
}

std::uint32_t recommend_n_e(const ReferenceBank& bank, double coverage) {
  std::vector<std::size_t> counts;
  for (const auto& [frame, roles] : bank.frames) {
    for (const auto& [role, pairs] : roles) counts.push_back(pairs.size());
  }
  if (counts.empty()) return 0;
  std::sort(counts.begin(), counts.end(), std::greater<>());
  // With counts sorted descending, k qualifies iff the entry at the coverage
  // boundary still has at least k pairs.
  const auto needed = static_cast<std::size_t>(std::ceil(coverage * counts.size()));
  const std::size_t boundary = std::clamp<std::size_t>(needed, 1, counts.size()) - 1;
  return static_cast<std::uint32_t>(counts[boundary]);
}

ModelScorer::ModelScorer(const NetworkCheckpoint& checkpoint, const EmbeddingStore& store)
    : checkpoint_(checkpoint), store_(store) {
  if (checkpoint.config.input_dim != 4 * store.dim() || checkpoint.config.output_dim != 2) {
    throw DataError("checkpoint input width does not match 4 x embedding dimension");
  }
}

std::vector<InstanceDecision> ModelScorer::score(std::span<const PredicateArgumentPair> sources,
                                                 const PredicateArgumentPair& target) const {
  std::vector<InstanceDecision> out;
  if (sources.empty()) return out;
  const std::size_t width = 4 * static_cast<std::size_t>(store_.dim());
  std::vector<float> batch(sources.size() * width);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    build_instance_vector(store_, sources[i], target,
                          std::span<float>(batch.data() + i * width, width));
  }
  auto pass = forward(checkpoint_, batch, sources.size());
  const auto probs = softmax<float>(pass.scores, sources.size(), 2);
  const auto pred = argmax_rows<float>(pass.scores, sources.size(), 2);
  for (std::size_t i = 0; i < sources.size(); ++i) out.push_back({pred[i] == 1, probs[2 * i + 1]});
  return out;
}

std::size_t decide_role(std::span<const RoleScore> scores, std::span<const std::size_t> bank_sizes) {
  if (scores.empty()) throw DataError("no candidate roles");
  const bool all_zero = std::all_of(scores.begin(), scores.end(),
                                    [](const RoleScore& s) { return s.positive_count == 0; });
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a].positive_count != scores[b].positive_count) {
      return scores[a].positive_count > scores[b].positive_count;
    }
    if (scores[a].positive_prob_mass != scores[b].positive_prob_mass) {
      return scores[a].positive_prob_mass > scores[b].positive_prob_mass;
    }
    if (all_zero && bank_sizes[a] != bank_sizes[b]) return bank_sizes[a] > bank_sizes[b];
    return scores[a].role_name < scores[b].role_name;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (better(i, best)) best = i;
  }
  return best;
}

std::uint64_t target_seed(std::uint64_t seed, const PredicateArgumentPair& target) {
  return derive_seed(seed, target.element_key.canonical() + "#" + target.predicate_key.canonical());
}

ElementDecision classify_element(const AnalogyScorer& scorer, const ReferenceBank& bank,
                                 const PredicateArgumentPair& target, std::uint32_t n_e,
                                 std::uint64_t seed) {
  auto f = bank.frames.find(target.frame_name);
  if (f == bank.frames.end() || f->second.empty()) throw UnclassifiableError(target.frame_name);

  const std::uint64_t tseed = target_seed(seed, target);
  ElementDecision d;
  std::vector<std::size_t> sizes;
  for (const auto& [role, pool] : f->second) {
    auto sample = sample_sources(bank, target.frame_name, role, n_e, derive_seed(tseed, role));
    RoleScore s;
    s.role_name = role;
    s.sampled = static_cast<std::uint32_t>(sample.size());
    for (const auto& dec : scorer.score(sample, target)) {
      s.positive_count += dec.positive ? 1 : 0;
      s.positive_prob_mass += dec.positive_prob;
    }
    d.scores.push_back(std::move(s));
    sizes.push_back(pool.size());
  }
  d.fallback = std::all_of(d.scores.begin(), d.scores.end(),
                           [](const RoleScore& s) { return s.positive_count == 0; });
  d.role_name = d.scores[decide_role(d.scores, sizes)].role_name;
  return d;
}

const std::string& DecodedTarget::predicted_role() const {
  static const std::string kNone;
  return decision ? decision->role_name : kNone;
}

std::vector<DecodedTarget> decode_targets(const AnalogyScorer& scorer, const ReferenceBank& bank,
                                          std::span<const PredicateArgumentPair> targets,
                                          std::uint32_t n_e, std::uint64_t seed, unsigned threads) {
  std::vector<DecodedTarget> out(targets.size());
  auto run = [&](std::size_t i) {
    out[i].target = targets[i];
    try {
      out[i].decision = classify_element(scorer, bank, targets[i], n_e, seed);
    } catch (const UnclassifiableError&) {
      out[i].decision.reset();
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < targets.size(); ++i) run(i);
  } else {
    std::vector<std::future<void>> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.push_back(std::async(std::launch::async, [&, t] {
        for (std::size_t i = t; i < targets.size(); i += threads) run(i);
      }));
    }
    for (auto& w : workers) w.get();
  }
  return out;
}

std::string decoded_to_jsonl(std::span<const DecodedTarget> decoded) {
  std::string out;
  for (const auto& d : decoded) {
    nlohmann::ordered_json j;
    j["doc"] = d.target.element_key.doc_id;
    j["sentence"] = d.target.element_key.sentence_id;
    j["frame"] = d.target.frame_name;
    j["element"] = {{"start", d.target.element_key.start}, {"end", d.target.element_key.end}};
    j["gold"] = d.target.role_name;
    j["predicted"] = d.decision ? nlohmann::ordered_json(d.decision->role_name) : nullptr;
    j["classified"] = d.decision.has_value();
    j["fallback"] = d.decision ? d.decision->fallback : false;
    nlohmann::ordered_json scores = nlohmann::ordered_json::array();
    if (d.decision) {
      for (const auto& s : d.decision->scores) {
        // Fixed-precision mass keeps the file byte-stable across platforms.
        char mass[32];
        std::snprintf(mass, sizeof mass, "%.6f", s.positive_prob_mass);
        scores.push_back({{"role", s.role_name},
                          {"count", s.positive_count},
                          {"sampled", s.sampled},
                          {"mass", nlohmann::ordered_json::parse(mass)}});
      }
    }
    j["scores"] = std::move(scores);
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_decoded_jsonl(std::span<const DecodedTarget> decoded, const std::filesystem::path& path) {
  write_file_bytes(path, decoded_to_jsonl(decoded));
}

std::vector<DecodedRecord> read_decoded_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  std::vector<DecodedRecord> out;
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
    for (const char* key : {"doc", "sentence", "frame", "gold", "classified"}) {
      if (!j.contains(key)) throw SchemaError(n, std::string("$.") + key, "missing field");
    }
    DecodedRecord r;
    r.doc_id = j.at("doc").get<std::string>();
    r.sentence_id = j.at("sentence").get<std::string>();
    r.frame = j.at("frame").get<std::string>();
    r.gold_role = j.at("gold").get<std::string>();
    r.classified = j.at("classified").get<bool>();
    if (r.classified) r.predicted_role = j.at("predicted").get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace analogy
