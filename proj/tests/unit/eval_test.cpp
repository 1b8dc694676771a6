#include <gtest/gtest.h>

#include <algorithm>

#include <json.hpp>

#include "analogy/error.hpp"
#include "analogy/eval.hpp"
#include "analogy/synthetic.hpp"
#include "test_support.hpp"

namespace analogy {
namespace {

TEST(BinaryMetrics, AllCorrect) {
  const std::vector<std::uint8_t> y = {0, 1, 1, 0};
  const auto m = binary_metrics(y, y);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.positive.precision, 1.0);
  EXPECT_EQ(m.negative.f1, 1.0);
}

TEST(BinaryMetrics, HandComputedConfusion) {
  // TP 2, FP 1, FN 1, TN 6.
  const std::vector<std::uint8_t> pred = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<std::uint8_t> gold = {1, 1, 0, 1, 0, 0, 0, 0, 0, 0};
  const auto m = binary_metrics(pred, gold);
  EXPECT_NEAR(m.positive.precision, 2.0 / 3, 1e-12);
  EXPECT_NEAR(m.positive.recall, 2.0 / 3, 1e-12);
  EXPECT_NEAR(m.negative.precision, 6.0 / 7, 1e-12);
  EXPECT_NEAR(m.negative.recall, 6.0 / 7, 1e-12);
  EXPECT_NEAR(m.accuracy, 0.8, 1e-12);
  EXPECT_EQ(m.positive.support, 3u);
  EXPECT_EQ(m.negative.support, 7u);
  EXPECT_THROW(binary_metrics({}, {}), DataError);
  EXPECT_THROW(binary_metrics(pred, std::span<const std::uint8_t>(gold).first(3)), DataError);
}

TEST(SrcMetrics, IdenticalSequences) {
  const std::vector<std::string> y = {"A", "B", "A", "C"};
  const auto m = src_metrics(y, y);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_NEAR(m.precision, 1.0, 1e-12);
  EXPECT_NEAR(m.recall, 1.0, 1e-12);
  EXPECT_NEAR(m.f1, 1.0, 1e-12);
}

TEST(SrcMetrics, WeightedBySupport) {
  // Supports {A:3, B:1}; A is always right, B is never predicted correctly.
  const std::vector<std::string> gold = {"A", "A", "A", "B"};
  const std::vector<std::string> pred = {"A", "A", "A", "C"};
  const auto m = src_metrics(pred, gold);
  EXPECT_NEAR(m.precision, 0.75, 1e-12);
  EXPECT_NEAR(m.recall, 0.75, 1e-12);
  EXPECT_NEAR(m.accuracy, 0.75, 1e-12);
}

TEST(SrcMetrics, UnclassifiedCountsAsWrongAndAccuracyEqualsWeightedRecall) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> gold, pred;
    const std::size_t n = 1 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) {
      gold.push_back("R" + std::to_string(rng.below(4)));
      const auto r = rng.below(6);
      pred.push_back(r == 5 ? "" : "R" + std::to_string(r));
    }
    const auto m = src_metrics(pred, gold);
    ASSERT_NEAR(m.accuracy, m.recall, 1e-12);
    // Unweighted aggregates are order-insensitive.
    auto g2 = gold, p2 = pred;
    std::reverse(g2.begin(), g2.end());
    std::reverse(p2.begin(), p2.end());
    ASSERT_NEAR(src_metrics(p2, g2).accuracy, m.accuracy, 1e-12);
  }
  const std::vector<std::string> gold = {"A"}, pred = {""};
  EXPECT_EQ(src_metrics(pred, gold).accuracy, 0.0);
}

TEST(Notr, DevCoveringEveryFrameLeavesSubgroupEmpty) {
  const auto dev = testing::corpus_from_counts({{"F", {{"A", 1}, {"B", 1}}}});
  const std::vector<TargetResult> r = {{"F", "A", "A"}, {"F", "B", "A"}};
  const auto n = notr_report(r, dev);
  EXPECT_EQ(n.total, 2u);
  EXPECT_EQ(n.unseen_frame.count, 0u);
  EXPECT_EQ(n.unseen_role.count, 0u);
  EXPECT_NEAR(n.overall_accuracy, 0.5, 1e-12);
}

TEST(Notr, PlantedUnseenFrameAndRole) {
  const auto dev = testing::corpus_from_counts({{"F", {{"A", 1}}}, {"G", {{"A", 1}}}});
  const std::vector<TargetResult> r = {
      {"F", "A", "A"}, {"F", "A", "A"}, {"F", "B", "A"},  // F.B unseen role
      {"G", "A", "A"},
      {"H", "A", "A"}, {"H", "B", ""},                    // H unseen frame
  };
  const auto n = notr_report(r, dev);
  EXPECT_EQ(n.unseen_frame.count, 2u);
  EXPECT_EQ(n.unseen_frame.distinct_frames, 1u);
  EXPECT_NEAR(n.unseen_frame.accuracy, 0.5, 1e-12);
  EXPECT_EQ(n.unseen_role.count, 3u);  // F.B, H.A, H.B
  EXPECT_EQ(n.unseen_role.distinct_frames, 2u);
  EXPECT_NEAR(n.unseen_role.accuracy, 1.0 / 3, 1e-12);
  EXPECT_NEAR(n.overall_accuracy, 4.0 / 6, 1e-12);
  EXPECT_NEAR(n.unseen_frame.delta, 0.5 - 4.0 / 6, 1e-12);
  EXPECT_EQ(n.unclassifiable, 1u);
  EXPECT_EQ(n.distinct_frames, 3u);
}

TEST(Baseline, EmptyTrainIsAnError) {
  EmbeddingStore s(4);
  EXPECT_THROW(baseline_direct({}, {}, s, {}), DataError);
}

TEST(Baseline, RoleSignalInSpanTextIsLearned) {
  const auto syn = generate_synthetic_corpus();
  const auto split = split_corpus(syn.corpus, syn.manifest);
  const auto store = build_deterministic_store(syn.corpus, 64, 0);
  const auto train = collect_pairs(split.train), test = collect_pairs(split.test);
  BaselineOptions opt;
  opt.features = BaselineFeatures::kPredicateElement;
  opt.train.batch_size = 32;
  opt.train.seed = 1;
  opt.epochs = 60;
  const auto r = baseline_direct(train.pairs, test.pairs, store, opt);
  EXPECT_GE(r.accuracy, 0.95);
  EXPECT_EQ(r.predicted.size(), test.pairs.size());
  EXPECT_GE(r.n_classes, 15u);
}

TEST(Reports, JsonCarriesTheNumbers) {
  const std::vector<std::uint8_t> pred = {1, 0, 1, 1}, gold = {1, 0, 0, 1};
  const auto bm = binary_metrics(pred, gold);
  const auto bj = nlohmann::json::parse(binary_report_json(bm));
  EXPECT_DOUBLE_EQ(bj["accuracy"].get<double>(), 0.75);
  EXPECT_EQ(bj["positive"]["support"].get<int>(), 2);
  EXPECT_NE(format_binary_report(bm).find("75.00"), std::string::npos);

  const std::vector<std::string> g = {"A", "B"}, p = {"A", "A"};
  const auto sm = src_metrics(p, g);
  const std::vector<TargetResult> tr = {{"F", "A", "A"}, {"F", "B", "A"}};
  const auto nr = notr_report(tr, testing::corpus_from_counts({{"F", {{"A", 1}}}}));
  const auto sj = nlohmann::json::parse(src_report_json(sm, nr));
  EXPECT_DOUBLE_EQ(sj["accuracy"].get<double>(), 0.5);
  EXPECT_EQ(sj["notr"]["unseen_role"]["count"].get<int>(), 1);
  EXPECT_TRUE(sj["notr"]["unseen_frame"]["accuracy"].is_null());
  EXPECT_NE(format_src_report(sm, nr).find("50.00"), std::string::npos);
}

TEST(Reports, MetricsChartIsSvg) {
  const std::vector<MetricsRow> rows = {{1, 0.7, 0.5}, {2, 0.4, 0.8}, {3, 0.2, 0.9}};
  const auto svg = render_metrics_svg(rows);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("polyline"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

}  // namespace
}  // namespace analogy
