#pragma once

// Incremental, segment-by-segment training of the binary analogy model.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "analogy/embed.hpp"
#include "analogy/instances.hpp"
#include "analogy/model.hpp"

namespace analogy {

struct TrainHyperparams {
  AdamHyperparams adam;
  std::uint32_t batch_size = 1024;
  std::uint32_t epochs_per_segment = 1;
  std::uint64_t seed = 0;
  // Number of most recent training batches averaged into each metrics row.
  std::uint32_t metrics_window = 16;
};

// Turns instance indices into concatenated span-embedding rows. Store rows
// are resolved once per referenced pair.
class InstanceMaterializer {
 public:
  InstanceMaterializer(std::span<const PredicateArgumentPair> pairs, const EmbeddingStore& store);

  // Resolves every pair referenced by `instances`. A pair id outside the
  // table or a key missing from the store raises DataError naming the pair.
  void prepare(std::span<const AnalogyInstance> instances);

  std::size_t width() const { return 4 * static_cast<std::size_t>(store_.dim()); }

  // `out` is resized to instances.size() x width().
  void fill(std::span<const AnalogyInstance> instances, std::vector<float>& out) const;

 private:
  struct Rows {
    std::int64_t predicate = -1;
    std::int64_t element = -1;
  };

  std::span<const PredicateArgumentPair> pairs_;
  const EmbeddingStore& store_;
  std::vector<Rows> rows_;
};

struct TrainResult {
  std::vector<NetworkCheckpoint> checkpoints;
  std::vector<MetricsRow> metrics;
};

using CheckpointSink = std::function<void(const NetworkCheckpoint&)>;

// Trains on shards[segments_completed..] in order, one checkpoint per
// segment. Pass `resume` to continue from an earlier checkpoint; the
// continued trajectory is identical to an uninterrupted run.
TrainResult train_segments(std::span<const InstanceShard> shards,
                           std::span<const PredicateArgumentPair> pairs,
                           const EmbeddingStore& store, const NetworkConfig& config,
                           const TrainHyperparams& hyper, const NetworkCheckpoint* resume = nullptr,
                           const CheckpointSink& sink = {});

struct BinaryPredictions {
  std::vector<std::uint8_t> predicted;
  std::vector<double> positive_prob;
};

BinaryPredictions predict_instances(const NetworkCheckpoint& checkpoint,
                                    std::span<const AnalogyInstance> instances,
                                    std::span<const PredicateArgumentPair> pairs,
                                    const EmbeddingStore& store, std::uint32_t batch_size = 1024);

double binary_accuracy(const BinaryPredictions& predictions,
                       std::span<const AnalogyInstance> instances);

enum class SelectionMode { kDevAccuracy, kLast };

struct CheckpointSelection {
  std::size_t index = 0;
  std::vector<double> dev_accuracy;  // empty in kLast mode
};

// Highest value wins; ties go to the latest index.
std::size_t select_by_accuracy(std::span<const double> accuracies);

CheckpointSelection select_checkpoint(std::span<const NetworkCheckpoint> checkpoints,
                                      std::span<const AnalogyInstance> dev_instances,
                                      std::span<const PredicateArgumentPair> dev_pairs,
                                      const EmbeddingStore& store,
                                      SelectionMode mode = SelectionMode::kDevAccuracy,
                                      std::uint32_t batch_size = 1024);

// CSV with header "checkpoint,loss,accuracy".
void write_metrics_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

}  // namespace analogy
