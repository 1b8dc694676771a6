#include <gtest/gtest.h>

#include <set>

#include "analogy/error.hpp"
#include "analogy/synthetic.hpp"
#include "analogy/transfer.hpp"
#include "test_support.hpp"

namespace analogy {
namespace {

using testing::corpus_from_counts;

TEST(Bank, EmptyCorpusGivesEmptyBank) { EXPECT_TRUE(build_bank(Corpus{}).frames.empty()); }

TEST(Bank, GroupsByFrameAndRole) {
  const auto bank = build_bank(corpus_from_counts({{"F", {{"A", 3}, {"B", 2}}}, {"G", {{"A", 1}}}}));
  EXPECT_EQ(bank.role_size("F", "A"), 3u);
  EXPECT_EQ(bank.role_size("F", "B"), 2u);
  EXPECT_EQ(bank.role_size("G", "A"), 1u);
  EXPECT_EQ(bank.role_size("G", "B"), 0u);
  EXPECT_EQ(bank.role_size("H", "A"), 0u);
  EXPECT_TRUE(bank.has_frame("G"));
}

TEST(Bank, FileRoundTrip) {
  testing::TempDir dir("bank");
  const auto bank = build_bank(generate_synthetic_corpus().corpus);
  write_bank(bank, dir / "bank.json");
  const auto back = read_bank(dir / "bank.json");
  EXPECT_EQ(back.frames, bank.frames);
}

TEST(SampleSources, SizesAndDeterminism) {
  const auto bank = build_bank(corpus_from_counts({{"F", {{"A", 10}, {"B", 3}}}}));
  const auto a = sample_sources(bank, "F", "A", 7, 1);
  EXPECT_EQ(a.size(), 7u);
  std::set<std::uint32_t> ids;
  for (const auto& p : a) {
    EXPECT_EQ(p.role_name, "A");
    ids.insert(p.pair_id);
  }
  EXPECT_EQ(ids.size(), 7u);
  EXPECT_EQ(a, sample_sources(bank, "F", "A", 7, 1));
  EXPECT_EQ(sample_sources(bank, "F", "B", 7, 1).size(), 3u);
  EXPECT_TRUE(sample_sources(bank, "F", "C", 7, 1).empty());
  EXPECT_TRUE(sample_sources(bank, "Z", "A", 7, 1).empty());
}

TEST(RecommendNe, CoverageRule) {
  // Ten roles with 1..10 sources: 90% of roles have at least 2.
  std::vector<std::pair<std::string, int>> roles;
  for (int i = 1; i <= 10; ++i) roles.push_back({"R" + std::to_string(i), i});
  const auto bank = build_bank(corpus_from_counts({{"F", roles}}));
  EXPECT_EQ(recommend_n_e(bank, 0.9), 2u);
  EXPECT_EQ(recommend_n_e(bank, 0.5), 6u);
  EXPECT_EQ(recommend_n_e(bank, 1.0), 1u);
  EXPECT_EQ(recommend_n_e(ReferenceBank{}), 0u);
}

RoleScore rs(const std::string& name, std::uint32_t count, double mass) { return {name, count, 7, mass}; }

TEST(DecideRole, HighestCountWins) {
  const std::vector<RoleScore> s = {rs("A", 5, 4.0), rs("B", 2, 6.0)};
  const std::vector<std::size_t> sizes = {7, 7};
  EXPECT_EQ(decide_role(s, sizes), 0u);
}

TEST(DecideRole, TieBreakOrder) {
  const std::vector<std::size_t> sizes = {2, 9, 4};
  EXPECT_EQ(decide_role(std::vector{rs("A", 3, 1.0), rs("B", 3, 2.0), rs("C", 1, 5.0)}, sizes), 1u);
  EXPECT_EQ(decide_role(std::vector{rs("C", 3, 1.0), rs("B", 3, 1.0), rs("A", 0, 1.0)}, sizes), 1u);
  // All counts zero: mass first, then bank size, then name.
  EXPECT_EQ(decide_role(std::vector{rs("A", 0, 0.3), rs("B", 0, 0.1), rs("C", 0, 0.2)}, sizes), 0u);
  EXPECT_EQ(decide_role(std::vector{rs("A", 0, 0.0), rs("B", 0, 0.0), rs("C", 0, 0.0)}, sizes), 1u);
  EXPECT_EQ(decide_role(std::vector{rs("C", 0, 0.0), rs("B", 0, 0.0)}, std::vector<std::size_t>{3, 3}), 1u);
}

TEST(DecideRole, InvariantToMassScaling) {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.below(5);
    std::vector<RoleScore> s;
    std::vector<std::size_t> sizes;
    for (std::size_t i = 0; i < n; ++i) {
      s.push_back(rs("R" + std::to_string(i), static_cast<std::uint32_t>(rng.below(3)),
                     static_cast<double>(rng.below(4)) / 4.0));
      sizes.push_back(1 + rng.below(3));
    }
    const auto base = decide_role(s, sizes);
    for (double c : {0.5, 2.0, 8.0}) {
      auto scaled = s;
      for (auto& x : scaled) x.positive_prob_mass *= c;
      ASSERT_EQ(decide_role(scaled, sizes), base);
    }
  }
}

TEST(Classify, OracleScorerRecoversGoldRole) {
  const auto syn = generate_synthetic_corpus();
  const auto split = split_corpus(syn.corpus, syn.manifest);
  const auto bank = build_bank(split.train);
  const auto targets = collect_pairs(split.test);
  testing::LabelOracleScorer oracle;
  for (const auto& t : targets.pairs) {
    const auto d = classify_element(oracle, bank, t, 7, 1);
    EXPECT_EQ(d.role_name, t.role_name);
    EXPECT_FALSE(d.fallback);
  }
}

TEST(Classify, ScoresCoverTheBankInventory) {
  const auto bank = build_bank(corpus_from_counts({{"F", {{"A", 10}, {"B", 3}, {"C", 1}}}}));
  const PredicateArgumentPair target{0, "F", {"x", "y", 0, 1}, {"x", "y", 2, 3}, "B"};
  const auto d = classify_element(testing::LabelOracleScorer{}, bank, target, 7, 9);
  ASSERT_EQ(d.scores.size(), 3u);
  EXPECT_EQ(d.scores[0].role_name, "A");
  EXPECT_EQ(d.scores[0].sampled, 7u);
  EXPECT_EQ(d.scores[1].sampled, 3u);
  EXPECT_EQ(d.scores[1].positive_count, 3u);
  EXPECT_EQ(d.scores[2].sampled, 1u);
  for (const auto& s : d.scores) EXPECT_LE(s.positive_count, s.sampled);
  EXPECT_EQ(d.role_name, "B");
}

TEST(Classify, AllNegativeModelFallsBackDeterministically) {
  const auto bank = build_bank(corpus_from_counts({{"F", {{"A", 2}, {"B", 5}, {"C", 5}}}}));
  const PredicateArgumentPair target{0, "F", {"x", "y", 0, 1}, {"x", "y", 2, 3}, "A"};
  const testing::ConstantScorer never(0.0);
  const auto a = classify_element(never, bank, target, 7, 1);
  EXPECT_TRUE(a.fallback);
  EXPECT_EQ(a.role_name, "B");  // most bank entries, then name
  EXPECT_EQ(a.role_name, classify_element(never, bank, target, 7, 2).role_name);
  // Constant per-instance mass favors the role with more samples.
  const auto b = classify_element(testing::ConstantScorer(0.1), bank, target, 7, 1);
  EXPECT_EQ(b.role_name, "B");
}

TEST(Classify, UnknownFrameIsUnclassifiable) {
  const auto bank = build_bank(corpus_from_counts({{"F", {{"A", 2}}}}));
  const PredicateArgumentPair target{0, "G", {"x", "y", 0, 1}, {"x", "y", 2, 3}, "A"};
  EXPECT_THROW(classify_element(testing::LabelOracleScorer{}, bank, target, 7, 1), UnclassifiableError);
}

TEST(Decode, ThreadCountDoesNotChangeOutput) {
  const auto syn = generate_synthetic_corpus();
  const auto split = split_corpus(syn.corpus, syn.manifest);
  const auto bank = build_bank(split.train);
  auto targets = collect_pairs(split.test).pairs;
  targets.push_back({9999, "Unseen_frame", {"x", "y", 0, 1}, {"x", "y", 2, 3}, "A"});
  const testing::ConstantScorer half(0.5);
  const auto one = decode_targets(half, bank, targets, 7, 3, 1);
  const auto four = decode_targets(half, bank, targets, 7, 3, 4);
  EXPECT_EQ(decoded_to_jsonl(one), decoded_to_jsonl(four));
  EXPECT_FALSE(one.back().decision.has_value());
  EXPECT_EQ(one.back().predicted_role(), "");
}

TEST(Decode, JsonlRoundTrip) {
  testing::TempDir dir("decoded");
  const auto bank = build_bank(corpus_from_counts({{"F", {{"A", 2}, {"B", 2}}}}));
  std::vector<PredicateArgumentPair> targets = {
      {0, "F", {"d", "s1", 0, 1}, {"d", "s1", 2, 3}, "A"},
      {1, "G", {"d", "s2", 0, 1}, {"d", "s2", 2, 3}, "B"}};
  const auto decoded = decode_targets(testing::LabelOracleScorer{}, bank, targets, 7, 1);
  write_decoded_jsonl(decoded, dir / "d.jsonl");
  const auto back = read_decoded_jsonl(dir / "d.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].doc_id, "d");
  EXPECT_EQ(back[0].sentence_id, "s1");
  EXPECT_EQ(back[0].gold_role, "A");
  EXPECT_EQ(back[0].predicted_role, "A");
  EXPECT_TRUE(back[0].classified);
  EXPECT_FALSE(back[1].classified);
  EXPECT_EQ(back[1].predicted_role, "");
  const auto text = testing::slurp(dir / "d.jsonl");
  EXPECT_NE(text.find("\"predicted\":null"), std::string::npos);
}

}  // namespace
}  // namespace analogy
