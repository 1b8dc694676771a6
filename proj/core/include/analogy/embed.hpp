#pragma once

// Span embeddings: a persisted store keyed by span position, and a
// deterministic context-free embedder for hermetic runs.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "analogy/corpus.hpp"

namespace analogy {

// Address of a span inside a sentence. Ids may not contain '|', which keeps
// the canonical "doc|sent|start|end" form injective.
struct SpanKey {
  std::string doc_id;
  std::string sentence_id;
  std::size_t start = 0;
  std::size_t end = 0;

  std::string canonical() const;
  static SpanKey parse(std::string_view canonical);

  bool operator==(const SpanKey&) const = default;
};

SpanKey span_key(const Sentence& sentence, const Span& span);

class EmbeddingStore {
 public:
  static constexpr std::uint16_t kVersion = 1;

  explicit EmbeddingStore(std::uint32_t dim);

  std::uint32_t dim() const { return dim_; }
  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }

  // Vectors must have exactly dim() finite components; keys are unique and
  // canonical.
  void insert(const SpanKey& key, std::span<const float> vec);
  void insert(std::string canonical_key, std::span<const float> vec);

  bool contains(const SpanKey& key) const { return index_.contains(key.canonical()); }
  std::optional<std::size_t> find(std::string_view canonical_key) const;

  // View into the stored vector. Throws MissingKeyError.
  std::span<const float> lookup(const SpanKey& key) const;
  std::span<const float> lookup(std::string_view canonical_key) const;

  // Entries in insertion order.
  const std::string& key_at(std::size_t i) const { return keys_[i]; }
  std::span<const float> vector_at(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

 private:
  std::uint32_t dim_;
  std::vector<std::string> keys_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// On-disk layout: "AEMB" | u16 version | u32 dim | u64 count, then per record
// u32 key_len | key bytes | dim x f32, all little-endian.
std::string serialize_store(const EmbeddingStore& store);
EmbeddingStore deserialize_store(std::string_view bytes);
void store_write(const EmbeddingStore& store, const std::filesystem::path& path);
EmbeddingStore store_read(const std::filesystem::path& path);

// Unit-norm pseudo-random vector that depends only on (text, dim, seed).
std::vector<float> deterministic_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

// One entry per distinct trigger and spanned element key of `corpus`, using
// deterministic_embed on the span's surface text.
EmbeddingStore build_deterministic_store(const Corpus& corpus, std::uint32_t dim,
                                         std::uint64_t seed);

// Writes [emb(src_pred) ; emb(src_elem) ; emb(tgt_pred) ; emb(tgt_elem)]
// into `out`, which must hold 4 * dim floats.
void build_instance_vector(const EmbeddingStore& store, const SpanKey& src_predicate,
                           const SpanKey& src_element, const SpanKey& tgt_predicate,
                           const SpanKey& tgt_element, std::span<float> out);

}  // namespace analogy
