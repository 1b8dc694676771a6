#pragma once

// Analogical transfer: assign a role to a target (predicate, element) pair by
// pairing it with sampled reference pairs of every candidate role and
// counting how many of those instances the binary model accepts.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "analogy/corpus.hpp"
#include "analogy/error.hpp"
#include "analogy/embed.hpp"
#include "analogy/instances.hpp"
#include "analogy/model.hpp"

namespace analogy {

struct ReferenceBank {
  // frame -> role -> source pairs
  std::map<std::string, std::map<std::string, std::vector<PredicateArgumentPair>>> frames;

  bool has_frame(const std::string& frame) const { return frames.contains(frame); }
  std::size_t role_size(const std::string& frame, const std::string& role) const;
};

ReferenceBank build_bank(const Corpus& source);
ReferenceBank build_bank(const PairTable& source_pairs);

// Bank file: JSON object frame -> role -> array of pair objects.
void write_bank(const ReferenceBank& bank, const std::filesystem::path& path);
ReferenceBank read_bank(const std::filesystem::path& path);

// Uniform sample without replacement of min(n_e, available) pairs. An absent
// frame or role yields an empty sample.
std::vector<PredicateArgumentPair> sample_sources(const ReferenceBank& bank, const std::string& frame,
                                                  const std::string& role, std::uint32_t n_e,
                                                  std::uint64_t seed);

// Largest k such that at least `coverage` of the bank's (frame, role)
// entries hold k or more source pairs.
std::uint32_t recommend_n_e(const ReferenceBank& bank, double coverage = 0.9);

struct InstanceDecision {
  bool positive = false;
  double positive_prob = 0.0;
};

// Binary judgement over instances (source_i, target). Implementations must
// be safe to call concurrently.
class AnalogyScorer {
 public:
  virtual ~AnalogyScorer() = default;
  virtual std::vector<InstanceDecision> score(std::span<const PredicateArgumentPair> sources,
                                              const PredicateArgumentPair& target) const = 0;
};

// Scores with a trained checkpoint. Features are the four span embeddings
// [src predicate; src element; target predicate; target element] only.
class ModelScorer final : public AnalogyScorer {
 public:
  ModelScorer(const NetworkCheckpoint& checkpoint, const EmbeddingStore& store);
  std::vector<InstanceDecision> score(std::span<const PredicateArgumentPair> sources,
                                      const PredicateArgumentPair& target) const override;

 private:
  const NetworkCheckpoint& checkpoint_;
  const EmbeddingStore& store_;
};

struct RoleScore {
  std::string role_name;
  std::uint32_t positive_count = 0;
  std::uint32_t sampled = 0;
  double positive_prob_mass = 0.0;

  bool operator==(const RoleScore&) const = default;
};

// Index of the winning role. Order: highest positive_count, then highest
// positive_prob_mass; when every count is zero, exact mass ties go to the
// role with the most bank entries; remaining ties to the smallest name.
std::size_t decide_role(std::span<const RoleScore> scores, std::span<const std::size_t> bank_sizes);

struct ElementDecision {
  std::string role_name;
  std::vector<RoleScore> scores;  // one per role of the frame, by role name
  bool fallback = false;          // every positive_count was zero
};

class UnclassifiableError : public DataError {
 public:
  explicit UnclassifiableError(const std::string& frame)
      : DataError("frame '" + frame + "' has no reference pairs"), frame_(frame) {}
  const std::string& frame() const { return frame_; }

 private:
  std::string frame_;
};

// Seed used for the per-role samples of one target.
std::uint64_t target_seed(std::uint64_t seed, const PredicateArgumentPair& target);

// Throws UnclassifiableError when the target's frame is not in the bank.
ElementDecision classify_element(const AnalogyScorer& scorer, const ReferenceBank& bank,
                                 const PredicateArgumentPair& target, std::uint32_t n_e,
                                 std::uint64_t seed);

struct DecodedTarget {
  PredicateArgumentPair target;
  std::optional<ElementDecision> decision;  // empty when unclassifiable

  const std::string& predicted_role() const;
};

// classify_element over every target, on up to `threads` threads. Output
// order follows `targets` and does not depend on the thread count.
std::vector<DecodedTarget> decode_targets(const AnalogyScorer& scorer, const ReferenceBank& bank,
                                          std::span<const PredicateArgumentPair> targets,
                                          std::uint32_t n_e, std::uint64_t seed,
                                          unsigned threads = 1);

// One JSON object per target:
// {"doc","sentence","frame","element":{"start","end"},"gold","predicted",
//  "classified","fallback","scores":[{"role","count","sampled","mass"}]}
std::string decoded_to_jsonl(std::span<const DecodedTarget> decoded);
void write_decoded_jsonl(std::span<const DecodedTarget> decoded, const std::filesystem::path& path);

struct DecodedRecord {
  std::string doc_id;
  std::string sentence_id;
  std::string frame;
  std::string gold_role;
  std::string predicted_role;  // empty when unclassifiable
  bool classified = false;
};

std::vector<DecodedRecord> read_decoded_jsonl(const std::filesystem::path& path);

}  // namespace analogy
