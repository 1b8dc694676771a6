#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "analogy/error.hpp"
#include "analogy/pipeline.hpp"
#include "analogy/synthetic.hpp"
#include "test_support.hpp"

namespace analogy {
namespace {

namespace fs = std::filesystem;
using testing::slurp;
using testing::TempDir;

TEST(Config, DefaultsAndRelativePaths) {
  const auto cfg = parse_pipeline_config(
      R"({"seed":5,"corpus":{"path":"c.jsonl","manifest":"/abs/m.json"},"train":{"selection":"last"}})",
      "/base");
  EXPECT_EQ(cfg.seed, 5u);
  EXPECT_EQ(cfg.corpus, fs::path("/base/c.jsonl"));
  EXPECT_EQ(cfg.manifest, fs::path("/abs/m.json"));
  EXPECT_EQ(cfg.selection, SelectionMode::kLast);
  EXPECT_EQ(cfg.shards, 20u);
  EXPECT_EQ(cfg.n_e, 7u);
}

TEST(Config, ErrorsNameTheField) {
  auto message = [](const char* text) {
    try {
      parse_pipeline_config(text);
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message(R"({"sed":1})").find("$.sed"), std::string::npos);
  EXPECT_NE(message(R"({"train":{"batch_size":"big"}})").find("batch_size"), std::string::npos);
  EXPECT_NE(message(R"({"train":{"selection":"best"}})").find("selection"), std::string::npos);
  EXPECT_NE(message(R"({"model":{"dropuot":0.1}})").find("dropuot"), std::string::npos);
  EXPECT_NE(message("not json"), "no error");
  EXPECT_NE(message("[1]"), "no error");
}

TEST(Config, CanonicalFormIsStable) {
  const auto a = parse_pipeline_config(R"({"seed":3,"model":{"blocks":2,"dropout":0.3}})");
  const auto b = parse_pipeline_config(R"({"model":{"dropout":0.3,"blocks":2},"seed":3})");
  EXPECT_EQ(canonical_config_json(a), canonical_config_json(b));
  const auto c = parse_pipeline_config(R"({"seed":4})");
  EXPECT_NE(canonical_config_json(a), canonical_config_json(c));
}

TEST(Seeds, StepsGetDistinctSeeds) {
  const auto s = derive_step_seeds(7);
  const std::vector<std::uint64_t> all = {s.embed, s.balance, s.shard, s.init,
                                          s.train, s.transfer, s.baseline};
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) EXPECT_NE(all[i], all[j]);
  EXPECT_EQ(derive_step_seeds(7).train, s.train);
  EXPECT_NE(derive_step_seeds(8).train, s.train);
}

TEST(Synthetic, ShippedFilesMatchTheGenerator) {
  TempDir dir("synth");
  const auto syn = generate_synthetic_corpus();
  write_jsonl(syn.corpus, dir / "corpus.jsonl");
  write_manifest(syn.manifest, dir / "manifest.json");
  EXPECT_EQ(slurp(dir / "corpus.jsonl"), slurp(testing::synthetic_corpus_path()));
  EXPECT_EQ(slurp(dir / "manifest.json"), slurp(testing::synthetic_manifest_path()));
}

TEST(Synthetic, CorpusIsValidAndCoversEveryFrameInEverySplit) {
  const auto syn = generate_synthetic_corpus();
  for (const auto& s : syn.corpus) EXPECT_NO_THROW(validate_sentence(s));
  const auto split = split_corpus(syn.corpus, syn.manifest);
  for (const Corpus* part : {&split.train, &split.dev, &split.test}) {
    EXPECT_EQ(corpus_stats(*part).n_distinct_frames, 5u);
  }
}

TEST(Manifest, RecordsRelativePathsAndHashes) {
  TempDir a("mfa"), b("mfb");
  for (const TempDir* d : {&a, &b}) {
    fs::copy_file(testing::synthetic_manifest_path(), *d / "in.json");
    { std::ofstream(*d / "out.txt") << "x"; }
    const std::vector<fs::path> in = {*d / "in.json"}, out = {*d / "out.txt"};
    write_run_manifest(d->path(), "demo", PipelineConfig{}, in, out);
  }
  const auto text = slurp(a / "manifest.demo.json");
  EXPECT_EQ(text, slurp(b / "manifest.demo.json"));
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j["command"], "demo");
  EXPECT_EQ(j["outputs"][0]["path"], "out.txt");
  // FNV-1a 64 of "x".
  EXPECT_EQ(j["outputs"][0]["fnv1a64"], "af63f54c86021707");
}

TEST(Inputs, MissingInputIsADataError) {
  EXPECT_THROW(require_input("/definitely/not/here", "corpus"), DataError);
  EXPECT_THROW(load_corpus_any("/definitely/not/here.jsonl"), DataError);
}

TEST(Pipeline, TinyConfigEndToEnd) {
  TempDir dir("pipe");
  auto cfg = load_pipeline_config(testing::tiny_config_path());
  cfg.baselines = false;
  const auto corpus_before = slurp(cfg.corpus);
  const auto summary = run_pipeline(cfg, dir.path());
  EXPECT_EQ(summary.train.n_checkpoints, 20u);
  EXPECT_GE(summary.src.metrics.accuracy, 0.9);
  EXPECT_GE(summary.binary.accuracy, 0.8);
  EXPECT_GT(summary.train_counts.total, summary.train_balanced.total);
  EXPECT_EQ(summary.train_balanced.positive, summary.train_balanced.negative);
  for (const char* f : {"decoded.jsonl", "bank.json", "metrics.svg", "reports/src_report.json",
                        "reports/binary_report.txt", "model/best.anck", "model/metrics.csv",
                        "manifest.train.json", "manifest.transfer.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(slurp(cfg.corpus), corpus_before);
  const auto decoded = read_decoded_jsonl(dir / "decoded.jsonl");
  EXPECT_EQ(decoded.size(), summary.src.metrics.total);
}

}  // namespace
}  // namespace analogy
