#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "analogy/embed.hpp"
#include "analogy/error.hpp"
#include "analogy/hash.hpp"
#include "analogy/synthetic.hpp"
#include "test_support.hpp"

namespace analogy {
namespace {

// Builds the file layout by hand, independent of the library writer.
std::string handmade_store(std::uint32_t dim, const std::vector<std::pair<std::string, std::vector<float>>>& recs) {
  std::string b = "AEMB";
  auto put = [&](const void* p, std::size_t n) { b.append(static_cast<const char*>(p), n); };
  const std::uint16_t version = 1;
  const std::uint64_t count = recs.size();
  put(&version, 2);
  put(&dim, 4);
  put(&count, 8);
  for (const auto& [key, vec] : recs) {
    const auto len = static_cast<std::uint32_t>(key.size());
    put(&len, 4);
    b += key;
    put(vec.data(), vec.size() * sizeof(float));
  }
  return b;
}

TEST(SpanKey, CanonicalFormRoundTrips) {
  const SpanKey k{"ANC__doc", "s12", 3, 9};
  EXPECT_EQ(k.canonical(), "ANC__doc|s12|3|9");
  EXPECT_EQ(SpanKey::parse(k.canonical()), k);
  EXPECT_THROW(SpanKey::parse("a|b|3"), DataError);
  EXPECT_THROW(SpanKey::parse("a|b|x|9"), DataError);
  EXPECT_THROW((SpanKey{"a|b", "s", 0, 1}.canonical()), DataError);
}

TEST(Store, InsertLookupAndErrors) {
  EmbeddingStore s(3);
  const SpanKey k{"d", "s", 0, 1};
  const float v[] = {1.f, 2.f, 3.f};
  s.insert(k, v);
  EXPECT_TRUE(s.contains(k));
  auto got = s.lookup(k);
  EXPECT_EQ(std::vector<float>(got.begin(), got.end()), std::vector<float>(v, v + 3));
  EXPECT_THROW(s.lookup(SpanKey{"d", "s", 0, 2}), MissingKeyError);
  EXPECT_THROW(s.insert(k, v), DataError);
  const float short_vec[] = {1.f, 2.f};
  EXPECT_THROW(s.insert(SpanKey{"d", "s", 1, 2}, short_vec), DataError);
  const float bad[] = {1.f, NAN, 0.f};
  EXPECT_THROW(s.insert(SpanKey{"d", "s", 1, 2}, bad), DataError);
  EXPECT_THROW(EmbeddingStore(0), DataError);
}

TEST(StoreFormat, EmptyStoreIsHeaderOnly) {
  const EmbeddingStore s(64);
  const auto bytes = serialize_store(s);
  EXPECT_EQ(bytes, handmade_store(64, {}));
  EXPECT_EQ(bytes.size(), 18u);
  const auto back = deserialize_store(bytes);
  EXPECT_EQ(back.dim(), 64u);
  EXPECT_TRUE(back.empty());
}

TEST(StoreFormat, MatchesHandBuiltLayoutAndReserializesIdentically) {
  const std::string bytes = handmade_store(2, {{"d|s|0|3", {0.5f, -1.f}}, {"d|s|4|9", {2.f, 0.25f}}});
  const auto s = deserialize_store(bytes);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.key_at(1), "d|s|4|9");
  EXPECT_EQ(s.lookup("d|s|4|9")[1], 0.25f);
  EXPECT_EQ(serialize_store(s), bytes);

  testing::TempDir dir("store");
  store_write(s, dir / "x.aemb");
  EXPECT_EQ(testing::slurp(dir / "x.aemb"), bytes);
  EXPECT_EQ(serialize_store(store_read(dir / "x.aemb")), bytes);
}

TEST(StoreFormat, RejectsCorruptFiles) {
  const std::string good = handmade_store(2, {{"d|s|0|3", {0.5f, -1.f}}});
  std::string magic = good;
  magic[0] = 'X';
  EXPECT_THROW(deserialize_store(magic), FormatError);
  std::string version = good;
  version[4] = 2;
  EXPECT_THROW(deserialize_store(version), FormatError);
  EXPECT_THROW(deserialize_store(good.substr(0, good.size() - 1)), FormatError);
  EXPECT_THROW(deserialize_store(good + "z"), FormatError);
  // Header claims dim 3 but the record holds two floats.
  std::string dim = good;
  dim[6] = 3;
  EXPECT_THROW(deserialize_store(dim), FormatError);
  EXPECT_THROW(deserialize_store(handmade_store(2, {{"not-a-key", {0.f, 0.f}}})), FormatError);
}

double norm(const std::vector<float>& v) {
  double s = 0.0;
  for (float x : v) s += double{x} * x;
  return std::sqrt(s);
}

TEST(DeterministicEmbed, StableUnitNormAndDistinct) {
  const auto a = deterministic_embed("tree", 64, 0);
  EXPECT_EQ(a, deterministic_embed("tree", 64, 0));
  EXPECT_NEAR(norm(a), 1.0, 1e-6);
  const auto b = deterministic_embed("leaf", 64, 0);
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += double{a[i]} * b[i];
  EXPECT_LT(dot, 1.0);
  EXPECT_NE(a, deterministic_embed("tree", 64, 1));
  for (std::size_t dim : {1u, 2u, 7u, 768u}) {
    EXPECT_NEAR(norm(deterministic_embed("x", dim, 3)), 1.0, 1e-6);
  }
}

TEST(DeterministicEmbed, PinnedOutputBits) {
  // Cross-platform contract: these bytes must not change between builds.
  const auto v = deterministic_embed("tree", 8, 0);
  const std::string_view bytes(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(float));
  EXPECT_EQ(hex64(fnv1a64(bytes)), "6a455a342d61f437");
}

TEST(DeterministicStore, CoversEverySpan) {
  const auto syn = generate_synthetic_corpus();
  const auto store = build_deterministic_store(syn.corpus, 16, 5);
  for (const auto& s : syn.corpus) {
    for (const auto& a : s.annotations) {
      EXPECT_EQ(store.lookup(span_key(s, a.trigger)).size(), 16u);
      for (const auto& fe : a.elements) {
        if (fe.span) {
          EXPECT_TRUE(store.contains(span_key(s, *fe.span)));
        }
      }
    }
  }
  EXPECT_EQ(serialize_store(store), serialize_store(build_deterministic_store(syn.corpus, 16, 5)));
}

TEST(InstanceVector, ConcatenatesInOrder) {
  EmbeddingStore s(2);
  const SpanKey a{"d", "s", 0, 1}, b{"d", "s", 1, 2}, c{"d", "s", 2, 3}, d{"d", "s", 3, 4};
  const float va[] = {1, 2}, vb[] = {3, 4}, vc[] = {5, 6}, vd[] = {7, 8};
  s.insert(a, va);
  s.insert(b, vb);
  s.insert(c, vc);
  s.insert(d, vd);
  std::vector<float> out(8);
  build_instance_vector(s, a, b, c, d, out);
  EXPECT_EQ(out, (std::vector<float>{1, 2, 3, 4, 5, 6, 7, 8}));
  std::vector<float> swapped(8);
  build_instance_vector(s, c, d, a, b, swapped);
  EXPECT_NE(out, swapped);
  std::vector<float> other(8);
  build_instance_vector(s, a, b, d, c, other);
  EXPECT_TRUE(std::equal(out.begin(), out.begin() + 4, other.begin()));
  std::vector<float> small(7);
  EXPECT_THROW(build_instance_vector(s, a, b, c, d, small), DataError);
  EXPECT_THROW(build_instance_vector(s, a, b, c, SpanKey{"d", "s", 9, 10}, out), MissingKeyError);
}

TEST(InstanceVector, EncoderSizedStoreGivesNetworkInputWidth) {
  EmbeddingStore s(768);
  const SpanKey p{"d", "s", 0, 1}, e{"d", "s", 2, 3};
  s.insert(p, deterministic_embed("p", 768, 0));
  s.insert(e, deterministic_embed("e", 768, 0));
  PredicateArgumentPair x{0, "F", p, e, "R"};
  EXPECT_EQ(build_instance_vector(s, x, x).size(), 3072u);
}

}  // namespace
}  // namespace analogy
