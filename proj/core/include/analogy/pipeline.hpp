#pragma once

// File-level steps shared by the command line tool and the tests. Each step
// reads its inputs, writes versioned artifacts and never touches its inputs.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "analogy/corpus.hpp"
#include "analogy/eval.hpp"
#include "analogy/instances.hpp"
#include "analogy/trainer.hpp"
#include "analogy/transfer.hpp"

namespace analogy {

struct PipelineConfig {
  // corpus: JSONL file, or a fulltext XML file or directory.
  std::filesystem::path corpus;
  std::filesystem::path manifest;
  // embed: precomputed store; empty selects the deterministic embedder.
  std::filesystem::path store;
  std::uint32_t embed_dim = 64;
  // instances
  std::uint32_t shards = 20;
  bool include_self_pairs = true;
  bool balance = true;
  // model
  std::uint32_t n_blocks = 2;
  double dropout_rate = 0.3;
  // train
  std::uint32_t batch_size = 1024;
  std::uint32_t epochs_per_segment = 1;
  double learning_rate = 1e-3;
  std::uint32_t metrics_window = 16;
  SelectionMode selection = SelectionMode::kDevAccuracy;
  // transfer
  std::uint32_t n_e = 7;
  // eval
  bool baselines = true;
  std::uint32_t baseline_epochs = 10;

  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::filesystem::path output_dir;
};

// Parses the JSON config. Relative paths are resolved against `base_dir`.
// Unknown keys and wrongly typed values raise DataError naming the field.
PipelineConfig parse_pipeline_config(std::string_view json_text,
                                     const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
// Canonical JSON form (sorted keys, fixed number formatting); hashed into
// every run manifest.
std::string canonical_config_json(const PipelineConfig& config);

// Independent seeds for every randomized step, all derived from one seed.
struct StepSeeds {
  std::uint64_t embed = 0;
  std::uint64_t balance = 0;
  std::uint64_t shard = 0;
  std::uint64_t init = 0;
  std::uint64_t train = 0;
  std::uint64_t transfer = 0;
  std::uint64_t baseline = 0;
};

StepSeeds derive_step_seeds(std::uint64_t seed);

// Relative paths are placed under $ANALOGY_OUTPUT_ROOT when it is set.
std::filesystem::path resolve_output_path(const std::filesystem::path& path);

// Throws DataError when `path` does not exist.
void require_input(const std::filesystem::path& path, std::string_view what);

// Writes `<dir>/manifest.<command>.json` recording seeds, the config hash and
// FNV-1a hashes of every input and output file.
void write_run_manifest(const std::filesystem::path& dir, std::string_view command,
                        const PipelineConfig& config,
                        std::span<const std::filesystem::path> inputs,
                        std::span<const std::filesystem::path> outputs);

// Loads a JSONL corpus, or parses fulltext XML when `path` is a directory or
// ends in ".xml".
Corpus load_corpus_any(const std::filesystem::path& path, unsigned threads = 1);

struct ParseSummary {
  CorpusStats stats;
  std::size_t rejected = 0;
  std::size_t skipped_annotation_sets = 0;
  std::size_t skipped_incorporated = 0;
};

ParseSummary step_parse(const std::filesystem::path& input, const std::filesystem::path& out_jsonl,
                        unsigned threads);

// Writes train.jsonl, dev.jsonl and test.jsonl into `out_dir`.
SplitCorpora step_split(const std::filesystem::path& corpus_jsonl,
                        const std::filesystem::path& manifest, const std::filesystem::path& out_dir);

// Deterministic store over every span of the given corpora.
EmbeddingStore step_embed_build(std::span<const std::filesystem::path> corpora, std::uint32_t dim,
                                std::uint64_t seed, const std::filesystem::path& out_store);

// Writes pairs.jsonl, counts.json and shard_NNN.ains files into `out_dir`.
// With `for_training`, instances are balanced (if configured) and split into
// config.shards shards; otherwise one unbalanced shard is written.
InstanceCounts step_instances(const std::filesystem::path& corpus_jsonl,
                              const std::filesystem::path& out_dir, const PipelineConfig& config,
                              bool for_training);

struct InstanceSet {
  PairTable pairs;
  std::vector<InstanceShard> shards;

  std::vector<AnalogyInstance> all_instances() const;
};

// Reads the artifacts produced by step_instances.
InstanceSet load_instance_set(const std::filesystem::path& dir);

EmbeddingStore load_store(const std::filesystem::path& path);

struct TrainSummary {
  std::size_t n_checkpoints = 0;
  CheckpointSelection selection;
  std::filesystem::path best;
};

// Trains over the shards in `train_dir` (the first `max_shards` when
// nonzero), writing checkpoint_NNN.anck, metrics.csv, selection.json and
// best.anck. `dev_dir` gates checkpoint selection in dev-accuracy mode.
TrainSummary step_train(const std::filesystem::path& train_dir, const std::filesystem::path& store,
                        const std::filesystem::path& out_dir, const PipelineConfig& config,
                        const std::filesystem::path& dev_dir = {},
                        const std::filesystem::path& resume = {}, std::uint32_t max_shards = 0);

BinaryMetrics step_eval_binary(const std::filesystem::path& checkpoint,
                               const std::filesystem::path& instances_dir,
                               const std::filesystem::path& store,
                               const std::filesystem::path& out_dir);

ReferenceBank step_bank(const std::filesystem::path& source_jsonl,
                        const std::filesystem::path& out_bank);

std::vector<DecodedTarget> step_transfer(const std::filesystem::path& bank,
                                         const std::filesystem::path& checkpoint,
                                         const std::filesystem::path& store,
                                         const std::filesystem::path& targets_jsonl,
                                         const PipelineConfig& config,
                                         const std::filesystem::path& out_decoded);

struct SrcSummary {
  SrcMetrics metrics;
  NotrReport notr;
};

// `reference_jsonl` is the corpus whose frames and roles count as seen.
SrcSummary step_eval_src(const std::filesystem::path& decoded,
                         const std::filesystem::path& reference_jsonl,
                         const std::filesystem::path& out_dir);

struct BaselineSummary {
  BaselineResult element;
  BaselineResult predicate_element;
};

BaselineSummary step_baselines(const std::filesystem::path& train_jsonl,
                               const std::filesystem::path& test_jsonl,
                               const std::filesystem::path& store, const PipelineConfig& config,
                               const std::filesystem::path& out_json);

void step_report_plot(const std::filesystem::path& metrics_csv, const std::filesystem::path& out_svg);

struct PipelineSummary {
  ParseSummary corpus;
  InstanceCounts train_counts;
  InstanceCounts train_balanced;
  TrainSummary train;
  BinaryMetrics binary;
  SrcSummary src;
  std::optional<BaselineSummary> baselines;
};

// Chains every step. Artifacts land in `out_dir`:
//   corpus.jsonl, train/dev/test.jsonl, store.aemb,
//   instances/{train,dev,test}/, model/, bank.json, decoded.jsonl,
//   reports/, metrics.svg and one manifest per step.
PipelineSummary run_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir);

}  // namespace analogy
