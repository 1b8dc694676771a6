#include "analogy/embed.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>

#include "analogy/binary_io.hpp"
#include "analogy/error.hpp"
#include "analogy/hash.hpp"
#include "analogy/rng.hpp"

namespace analogy {

namespace {

constexpr std::string_view kMagic = "AEMB";

void check_id(const std::string& id, const char* what) {
  if (id.empty() || id.find('|') != std::string::npos) {
    throw DataError(std::string("invalid ") + what + " '" + id + "' for a span key");
  }
}

std::size_t to_size(std::string_view s, std::string_view whole) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw DataError("malformed span key '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

std::string SpanKey::canonical() const {
  check_id(doc_id, "document id");
  check_id(sentence_id, "sentence id");
  return doc_id + "|" + sentence_id + "|" + std::to_string(start) + "|" + std::to_string(end);
}

SpanKey SpanKey::parse(std::string_view c) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    auto bar = c.find('|', pos);
    parts.push_back(c.substr(pos, bar == std::string_view::npos ? bar : bar - pos));
    if (bar == std::string_view::npos) break;
    pos = bar + 1;
  }
  if (parts.size() != 4 || parts[0].empty() || parts[1].empty()) {
    throw DataError("malformed span key '" + std::string(c) + "'");
  }
  return SpanKey{std::string(parts[0]), std::string(parts[1]), to_size(parts[2], c),
                 to_size(parts[3], c)};
}

SpanKey span_key(const Sentence& sentence, const Span& span) {
  return SpanKey{sentence.doc_id, sentence.sentence_id, span.start, span.end};
}

EmbeddingStore::EmbeddingStore(std::uint32_t dim) : dim_(dim) {
  if (dim == 0) throw DataError("embedding dimension must be positive");
}

void EmbeddingStore::insert(const SpanKey& key, std::span<const float> vec) {
  insert(key.canonical(), vec);
}

void EmbeddingStore::insert(std::string canonical_key, std::span<const float> vec) {
  if (SpanKey::parse(canonical_key).canonical() != canonical_key) {
    throw DataError("span key '" + canonical_key + "' is not in canonical form");
  }
  if (vec.size() != dim_) {
    throw DataError("vector for '" + canonical_key + "' has " + std::to_string(vec.size()) +
                    " components, store dimension is " + std::to_string(dim_));
  }
  if (!std::all_of(vec.begin(), vec.end(), [](float x) { return std::isfinite(x); })) {
    throw DataError("vector for '" + canonical_key + "' has non-finite components");
  }
  if (index_.contains(canonical_key)) {
    throw DataError("duplicate embedding key '" + canonical_key + "'");
  }
  index_.emplace(canonical_key, keys_.size());
  keys_.push_back(std::move(canonical_key));
  data_.insert(data_.end(), vec.begin(), vec.end());
}

std::optional<std::size_t> EmbeddingStore::find(std::string_view canonical_key) const {
  auto it = index_.find(std::string(canonical_key));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> EmbeddingStore::lookup(const SpanKey& key) const {
  return lookup(key.canonical());
}

std::span<const float> EmbeddingStore::lookup(std::string_view canonical_key) const {
  auto i = find(canonical_key);
  if (!i) throw MissingKeyError(std::string(canonical_key));
  return vector_at(*i);
}

std::string serialize_store(const EmbeddingStore& store) {
  ByteWriter w;
  w.bytes(kMagic);
  w.u16(EmbeddingStore::kVersion);
  w.u32(store.dim());
  w.u64(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    const std::string& key = store.key_at(i);
    w.u32(static_cast<std::uint32_t>(key.size()));
    w.bytes(key);
    w.f32s(store.vector_at(i));
  }
  return w.take();
}

EmbeddingStore deserialize_store(std::string_view bytes) {
  ByteReader r(bytes, "embedding store");
  if (r.remaining() < kMagic.size() || r.bytes(kMagic.size()) != kMagic) {
    throw FormatError("embedding store: bad magic (expected AEMB)");
  }
  const auto version = r.u16();
  if (version != EmbeddingStore::kVersion) {
    throw FormatError("embedding store: unsupported version " + std::to_string(version));
  }
  const auto dim = r.u32();
  if (dim == 0) throw FormatError("embedding store: zero dimension in header");
  const auto count = r.u64();
  EmbeddingStore store(dim);
  std::vector<float> vec(dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto key_len = r.u32();
    std::string key(r.bytes(key_len));
    // A record shorter than the header dimension shows up as truncation, or
    // as garbage in the next key; both are reported as format errors.
    r.f32s(vec);
    try {
      store.insert(std::move(key), vec);
    } catch (const DataError& e) {
      throw FormatError(std::string("embedding store record ") + std::to_string(i) + ": " + e.what());
    }
  }
  if (r.remaining() != 0) {
    throw FormatError("embedding store: " + std::to_string(r.remaining()) +
                      " trailing bytes after " + std::to_string(count) +
                      " records (dimension mismatch between header and records?)");
  }
  return store;
}

void store_write(const EmbeddingStore& store, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_store(store));
}

EmbeddingStore store_read(const std::filesystem::path& path) {
  return deserialize_store(read_file_bytes(path));
}

std::vector<float> deterministic_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  std::vector<double> v(dim);
  std::uint64_t state = derive_seed(seed, fnv1a64(text));
  double norm2 = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    state = splitmix64(state);
    // Sum of two uniforms: cheap, symmetric, exactly reproducible.
    const double a = unit_interval(state);
    state = splitmix64(state);
    const double b = unit_interval(state);
    v[i] = a + b - 1.0;
    norm2 += v[i] * v[i];
  }
  if (norm2 == 0.0) {
    v[0] = 1.0;
    norm2 = 1.0;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] * inv);
  return out;
}

EmbeddingStore build_deterministic_store(const Corpus& corpus, std::uint32_t dim,
                                         std::uint64_t seed) {
  EmbeddingStore store(dim);
  auto add = [&](const Sentence& s, const Span& span) {
    std::string key = span_key(s, span).canonical();
    if (store.find(key)) return;
    store.insert(std::move(key), deterministic_embed(span.text, dim, seed));
  };
  for (const auto& s : corpus) {
    for (const auto& ann : s.annotations) {
      add(s, ann.trigger);
      for (const auto& fe : ann.elements) {
        if (fe.span) add(s, *fe.span);
      }
    }
  }
  return store;
}

void build_instance_vector(const EmbeddingStore& store, const SpanKey& src_predicate,
                           const SpanKey& src_element, const SpanKey& tgt_predicate,
                           const SpanKey& tgt_element, std::span<float> out) {
  const std::size_t d = store.dim();
  if (out.size() != 4 * d) {
    throw DataError("instance vector buffer has " + std::to_string(out.size()) +
                    " slots, expected " + std::to_string(4 * d));
  }
  const SpanKey* parts[4] = {&src_predicate, &src_element, &tgt_predicate, &tgt_element};
  for (std::size_t k = 0; k < 4; ++k) {
    auto v = store.lookup(*parts[k]);
    std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(k * d));
  }
}

}  // namespace analogy
