#pragma once

// Metrics and reports: binary analogy classification, semantic role
// classification on gold spans, no-training-data breakdowns and the two
// direct multi-class baselines.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "analogy/corpus.hpp"
#include "analogy/embed.hpp"
#include "analogy/instances.hpp"
#include "analogy/model.hpp"
#include "analogy/trainer.hpp"

namespace analogy {

// All rates are fractions in [0, 1]; reports print percentages.
struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // gold count
};

struct BinaryMetrics {
  ClassMetrics negative;
  ClassMetrics positive;
  double accuracy = 0.0;
  std::size_t total = 0;
};

// Throws DataError on empty or mismatched input.
BinaryMetrics binary_metrics(std::span<const std::uint8_t> predictions,
                             std::span<const std::uint8_t> labels);

struct SrcMetrics {
  double accuracy = 0.0;
  // Averages over gold classes weighted by gold support.
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t total = 0;
  std::map<std::string, ClassMetrics> per_class;
};

// An empty predicted string (unclassifiable target) never matches.
SrcMetrics src_metrics(std::span<const std::string> predicted, std::span<const std::string> gold);

struct TargetResult {
  std::string frame;
  std::string gold_role;
  std::string predicted_role;
};

struct SubgroupReport {
  std::size_t count = 0;
  std::size_t distinct_frames = 0;
  double accuracy = 0.0;
  double delta = 0.0;  // accuracy - overall accuracy
};

struct NotrReport {
  std::size_t total = 0;
  double overall_accuracy = 0.0;
  std::size_t unclassifiable = 0;
  std::size_t distinct_frames = 0;
  // (a) frame never annotated in the reference corpus
  SubgroupReport unseen_frame;
  // (b) (frame, role) never annotated in the reference corpus
  SubgroupReport unseen_role;
};

NotrReport notr_report(std::span<const TargetResult> results, const Corpus& reference);

enum class BaselineFeatures { kElement, kPredicateElement };

struct BaselineOptions {
  BaselineFeatures features = BaselineFeatures::kElement;
  std::uint32_t n_blocks = 2;
  double dropout_rate = 0.3;
  TrainHyperparams train;
  std::uint32_t epochs = 10;
};

struct BaselineResult {
  double accuracy = 0.0;
  std::size_t n_classes = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::vector<std::string> predicted;
};

// Trains a direct multi-class classifier over the global role inventory of
// `train` and scores it on `test`. Test roles unseen in training count as
// errors. Throws DataError when `train` is empty.
BaselineResult baseline_direct(std::span<const PredicateArgumentPair> train,
                               std::span<const PredicateArgumentPair> test,
                               const EmbeddingStore& store, const BaselineOptions& options);

std::string format_binary_report(const BinaryMetrics& m);
std::string binary_report_json(const BinaryMetrics& m);
std::string format_src_report(const SrcMetrics& m, const NotrReport& notr);
std::string src_report_json(const SrcMetrics& m, const NotrReport& notr);

// Static SVG chart of loss and accuracy per checkpoint.
std::string render_metrics_svg(std::span<const MetricsRow> rows);

}  // namespace analogy
