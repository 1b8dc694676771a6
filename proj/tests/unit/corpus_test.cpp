#include <gtest/gtest.h>

#include <set>

#include "analogy/corpus.hpp"
#include "analogy/error.hpp"
#include "analogy/synthetic.hpp"
#include "test_support.hpp"

namespace analogy {
namespace {

using testing::TempDir;

Sentence sample_sentence() {
  Sentence s;
  s.doc_id = "ANC__x";
  s.sentence_id = "101";
  s.text = "Kim sold the caf\xC3\xA9 to Lee yesterday";
  FrameAnnotation a;
  a.frame_name = "Commerce_sell";
  a.lexical_unit = "sell.v";
  a.trigger = make_span(s.text, 4, 8);
  a.elements.push_back({"Seller", make_span(s.text, 0, 3), std::nullopt, false});
  a.elements.push_back({"Goods", make_span(s.text, 9, 17), std::nullopt, false});
  a.elements.push_back({"Buyer", make_span(s.text, 18, 24), std::nullopt, true});
  a.elements.push_back({"Money", std::nullopt, NullInstantiation::kINI, false});
  s.annotations.push_back(a);
  FrameAnnotation b;
  b.frame_name = "Temporal_collocation";
  b.lexical_unit = "yesterday.adv";
  b.trigger = make_span(s.text, 25, 34);
  s.annotations.push_back(b);
  return s;
}

TEST(Span, MakeSpanSlicesCodePoints) {
  const auto s = make_span("the caf\xC3\xA9 opens", 4, 8);
  EXPECT_EQ(s.text, "caf\xC3\xA9");
  EXPECT_THROW(make_span("abc", 2, 4), DataError);
  EXPECT_THROW(make_span("abc", 2, 2), DataError);
}

TEST(Sentence, ValidationCatchesStaleSpanText) {
  auto s = sample_sentence();
  EXPECT_NO_THROW(validate_sentence(s));
  s.annotations[0].elements[0].span->text = "Kin";
  EXPECT_THROW(validate_sentence(s), DataError);
}

TEST(Sentence, ValidationRequiresExactlyOneOfSpanOrNi) {
  auto s = sample_sentence();
  s.annotations[0].elements[3].span = make_span(s.text, 0, 3);
  EXPECT_THROW(validate_sentence(s), DataError);
  s.annotations[0].elements[3].span.reset();
  s.annotations[0].elements[3].null_instantiation.reset();
  EXPECT_THROW(validate_sentence(s), DataError);
}

TEST(NullInstantiation, StringsRoundTrip) {
  for (auto ni : {NullInstantiation::kDNI, NullInstantiation::kINI, NullInstantiation::kCNI}) {
    EXPECT_EQ(parse_null_instantiation(to_string(ni)), ni);
  }
  EXPECT_FALSE(parse_null_instantiation("INC"));
}

TEST(Jsonl, LineRoundTripPreservesEverything) {
  const auto s = sample_sentence();
  const auto line = to_jsonl_line(s);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(parse_jsonl_line(line, 1), s);
}

TEST(Jsonl, FileRoundTripKeepsOrder) {
  TempDir dir("jsonl");
  Corpus c;
  for (int i = 0; i < 3; ++i) {
    auto s = sample_sentence();
    s.sentence_id = std::to_string(i);
    c.push_back(s);
  }
  write_jsonl(c, dir / "c.jsonl");
  EXPECT_EQ(load_jsonl(dir / "c.jsonl"), c);
  EXPECT_EQ(load_jsonl(dir / "c.jsonl")[0].annotations[1].frame_name, "Temporal_collocation");
}

TEST(Jsonl, EmptyCorpusIsEmptyFile) {
  TempDir dir("jsonl");
  write_jsonl({}, dir / "e.jsonl");
  EXPECT_EQ(testing::slurp(dir / "e.jsonl"), "");
  EXPECT_TRUE(load_jsonl(dir / "e.jsonl").empty());
}

TEST(Jsonl, SchemaErrorsCarryLineAndFieldPath) {
  const std::string ok = to_jsonl_line(sample_sentence());
  auto expect_path = [](const std::string& line, std::size_t lineno, const std::string& path) {
    try {
      parse_jsonl_line(line, lineno);
      FAIL() << "accepted: " << line;
    } catch (const SchemaError& e) {
      EXPECT_EQ(e.line(), lineno);
      EXPECT_EQ(e.field_path(), path) << e.what();
    }
  };
  std::string missing_role = ok;
  missing_role.replace(missing_role.find("\"role\":\"Goods\""), 14, "\"rol\":\"Goods\"");
  expect_path(missing_role, 4, "$.annotations[0].elements[1].role");

  expect_path(R"({"doc_id":"d","sentence_id":"s","text":"ab","annotations":[{"frame":"F","lexical_unit":"a.v","trigger":{"start":0,"end":1},"elements":[{"role":"R","start":0,"end":1,"ni":"DNI"}]}]})",
              2, "$.annotations[0].elements[0]");
  expect_path(R"({"doc_id":"d","sentence_id":"s","text":"ab","annotations":[{"frame":"F","lexical_unit":"a.v","trigger":{"start":0,"end":1},"elements":[{"role":"R","ni":"XNI"}]}]})",
              2, "$.annotations[0].elements[0].ni");
  expect_path(R"({"doc_id":"d","sentence_id":"s","text":"ab","annotations":[]})" "x", 9, "$");
  // Offsets past the text are a schema violation, not a crash.
  EXPECT_THROW(parse_jsonl_line(R"({"doc_id":"d","sentence_id":"s","text":"ab","annotations":[{"frame":"F","lexical_unit":"a.v","trigger":{"start":0,"end":3},"elements":[]}]})", 1),
               SchemaError);
}

TEST(Manifest, RoundTripAndDefaultSplit) {
  TempDir dir("manifest");
  SplitManifest m{{"a", "b"}, {"c"}, {}, std::string("train")};
  write_manifest(m, dir / "m.json");
  const auto back = load_manifest(dir / "m.json");
  EXPECT_EQ(back.train_docs, m.train_docs);
  EXPECT_EQ(back.dev_docs, m.dev_docs);
  EXPECT_TRUE(back.test_docs.empty());
  EXPECT_EQ(back.default_split, "train");
}

Corpus two_docs() {
  auto c = testing::corpus_from_counts({{"F", {{"A", 3}}}}, "doc1");
  auto d = testing::corpus_from_counts({{"F", {{"B", 2}}}}, "doc2");
  c.insert(c.end(), d.begin(), d.end());
  return c;
}

TEST(Split, TwoDocumentsOneEach) {
  const auto split = split_corpus(two_docs(), {{"doc1"}, {"doc2"}, {}, std::nullopt});
  EXPECT_EQ(split.train.size(), 3u);
  EXPECT_EQ(split.dev.size(), 2u);
  EXPECT_TRUE(split.test.empty());
}

TEST(Split, EverythingInTrain) {
  const auto split = split_corpus(two_docs(), {{"doc1", "doc2"}, {}, {}, std::nullopt});
  EXPECT_EQ(split.train.size(), 5u);
  EXPECT_TRUE(split.dev.empty() && split.test.empty());
}

TEST(Split, UnlistedDocumentIsAnErrorUnlessDefaulted) {
  EXPECT_THROW(split_corpus(two_docs(), {{"doc1"}, {}, {}, std::nullopt}), DataError);
  const auto split = split_corpus(two_docs(), {{}, {}, {"doc1"}, std::string("train")});
  EXPECT_EQ(split.train.size(), 2u);
  EXPECT_EQ(split.test.size(), 3u);
}

TEST(Split, DocumentInTwoListsIsRejected) {
  EXPECT_THROW(split_corpus(two_docs(), {{"doc1", "doc2"}, {"doc1"}, {}, std::nullopt}), DataError);
}

TEST(Split, IsAPartitionOfTheSyntheticCorpus) {
  const auto syn = generate_synthetic_corpus();
  const auto split = split_corpus(syn.corpus, syn.manifest);
  EXPECT_EQ(split.train.size() + split.dev.size() + split.test.size(), syn.corpus.size());
  std::multiset<std::string> ids;
  for (const auto* part : {&split.train, &split.dev, &split.test}) {
    for (const auto& s : *part) ids.insert(s.sentence_id);
  }
  for (const auto& s : syn.corpus) EXPECT_EQ(ids.count(s.sentence_id), 1u);
}

TEST(Stats, EmptyCorpusIsAllZero) { EXPECT_EQ(corpus_stats({}), CorpusStats{}); }

TEST(Stats, CountsSampleSentence) {
  const auto st = corpus_stats({sample_sentence()});
  EXPECT_EQ(st.n_sentences, 1u);
  EXPECT_EQ(st.n_annotated_sentences, 1u);
  EXPECT_EQ(st.n_distinct_frames, 2u);
  EXPECT_EQ(st.n_docs, 1u);
  EXPECT_EQ(st.n_annotations, 2u);
  EXPECT_EQ(st.n_spanned_elements, 3u);
  EXPECT_EQ(st.n_null_elements, 1u);
}

TEST(Stats, SyntheticCorpusHasFiveFrames) {
  const auto syn = generate_synthetic_corpus();
  const auto st = corpus_stats(syn.corpus);
  EXPECT_EQ(st.n_distinct_frames, 5u);
  EXPECT_EQ(st.n_docs, 10u);
  EXPECT_EQ(st.n_sentences, 200u);
}

}  // namespace
}  // namespace analogy
