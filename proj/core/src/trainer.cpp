#include "analogy/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>

#include "analogy/binary_io.hpp"
#include "analogy/error.hpp"
#include "analogy/rng.hpp"

namespace analogy {

InstanceMaterializer::InstanceMaterializer(std::span<const PredicateArgumentPair> pairs,
                                           const EmbeddingStore& store)
    : pairs_(pairs), store_(store), rows_(pairs.size()) {}

void InstanceMaterializer::prepare(std::span<const AnalogyInstance> instances) {
  auto resolve = [&](std::uint32_t id) {
    if (id >= rows_.size()) {
      throw DataError("instance references pair " + std::to_string(id) + " outside the pair table");
    }
    Rows& r = rows_[id];
    if (r.predicate >= 0) return;
    const auto& p = pairs_[id];
    auto pred = store_.find(p.predicate_key.canonical());
    auto elem = store_.find(p.element_key.canonical());
    if (!pred || !elem) {
      throw DataError("pair " + std::to_string(id) + ": no embedding for '" +
                      (pred ? p.element_key : p.predicate_key).canonical() + "'");
    }
    r.predicate = static_cast<std::int64_t>(*pred);
    r.element = static_cast<std::int64_t>(*elem);
  };
  for (const auto& x : instances) {
    resolve(x.src);
    resolve(x.tgt);
  }
}

void InstanceMaterializer::fill(std::span<const AnalogyInstance> instances,
                                std::vector<float>& out) const {
  const std::size_t d = store_.dim();
  out.resize(instances.size() * 4 * d);
  float* dst = out.data();
  for (const auto& x : instances) {
    const Rows& s = rows_[x.src];
    const Rows& t = rows_[x.tgt];
    if (s.predicate < 0 || t.predicate < 0) throw Error("materializer used before prepare()");
    for (std::int64_t row : {s.predicate, s.element, t.predicate, t.element}) {
      auto v = store_.vector_at(static_cast<std::size_t>(row));
      dst = std::copy(v.begin(), v.end(), dst);
    }
  }
}

TrainResult train_segments(std::span<const InstanceShard> shards,
                           std::span<const PredicateArgumentPair> pairs,
                           const EmbeddingStore& store, const NetworkConfig& config,
                           const TrainHyperparams& hyper, const NetworkCheckpoint* resume,
                           const CheckpointSink& sink) {
  if (shards.empty()) throw DataError("no training segments");
  for (const auto& s : shards) {
    if (s.instances.empty()) {
      throw DataError("training segment " + std::to_string(s.shard_index) + " is empty");
    }
  }
  if (hyper.batch_size == 0) throw DataError("batch size must be positive");
  if (config.input_dim != 4 * store.dim()) {
    throw DataError("network input_dim " + std::to_string(config.input_dim) +
                    " does not match 4 x embedding dim " + std::to_string(store.dim()));
  }

  NetworkCheckpoint ck = resume ? *resume : fresh_checkpoint(config, hyper.adam);
  if (ck.config != config) throw DataError("resume checkpoint was trained with a different network config");
  if (ck.segments_completed > shards.size()) {
    throw DataError("resume checkpoint has completed more segments than available");
  }

  InstanceMaterializer mat(pairs, store);
  for (const auto& s : shards) mat.prepare(s.instances);

  TrainResult result;
  result.metrics = ck.history;
  std::vector<float> batch;
  std::vector<std::uint32_t> labels;
  std::vector<AnalogyInstance> ordered;

  for (std::size_t seg = ck.segments_completed; seg < shards.size(); ++seg) {
    const auto& instances = shards[seg].instances;
    struct BatchStat {
      double loss;
      std::size_t correct;
      std::size_t rows;
    };
    std::deque<BatchStat> window;
    for (std::uint32_t epoch = 0; epoch < hyper.epochs_per_segment; ++epoch) {
      const std::uint64_t epoch_seed = derive_seed(derive_seed(hyper.seed, seg), epoch);
      ordered.assign(instances.begin(), instances.end());
      Rng(derive_seed(epoch_seed, "order")).shuffle(ordered);
      for (std::size_t b = 0, start = 0; start < ordered.size(); ++b, start += hyper.batch_size) {
        const std::size_t rows = std::min<std::size_t>(hyper.batch_size, ordered.size() - start);
        std::span<const AnalogyInstance> slice(ordered.data() + start, rows);
        mat.fill(slice, batch);
        labels.resize(rows);
        for (std::size_t i = 0; i < rows; ++i) labels[i] = slice[i].label;
        auto lg = loss_and_grad<float>(ck.params, ck.config, batch, rows, labels, true,
                                       derive_seed(derive_seed(epoch_seed, "dropout"), b));
        adam_step(ck.params, ck.optimizer, lg.grads, ck.adam);
        window.push_back({lg.loss * rows, lg.correct, rows});
        if (window.size() > std::max<std::uint32_t>(1, hyper.metrics_window)) window.pop_front();
      }
    }
    double loss = 0.0;
    std::size_t correct = 0, rows = 0;
    for (const auto& w : window) {
      loss += w.loss;
      correct += w.correct;
      rows += w.rows;
    }
    MetricsRow row{static_cast<std::uint32_t>(seg + 1), loss / rows,
                   static_cast<double>(correct) / rows};
    ck.segments_completed = static_cast<std::uint32_t>(seg + 1);
    ck.history.push_back(row);
    result.metrics.push_back(row);
    if (sink) sink(ck);
    result.checkpoints.push_back(ck);
  }
  return result;
}

BinaryPredictions predict_instances(const NetworkCheckpoint& ck,
                                    std::span<const AnalogyInstance> instances,
                                    std::span<const PredicateArgumentPair> pairs,
                                    const EmbeddingStore& store, std::uint32_t batch_size) {
  InstanceMaterializer mat(pairs, store);
  mat.prepare(instances);
  BinaryPredictions out;
  out.predicted.reserve(instances.size());
  out.positive_prob.reserve(instances.size());
  std::vector<float> batch;
  batch_size = std::max<std::uint32_t>(1, batch_size);
  for (std::size_t start = 0; start < instances.size(); start += batch_size) {
    const std::size_t rows = std::min<std::size_t>(batch_size, instances.size() - start);
    mat.fill(instances.subspan(start, rows), batch);
    auto pass = forward(ck, batch, rows);
    const auto probs = softmax<float>(pass.scores, rows, 2);
    const auto pred = argmax_rows<float>(pass.scores, rows, 2);
    for (std::size_t r = 0; r < rows; ++r) {
      out.predicted.push_back(static_cast<std::uint8_t>(pred[r]));
      out.positive_prob.push_back(probs[r * 2 + 1]);
    }
  }
  return out;
}

double binary_accuracy(const BinaryPredictions& p, std::span<const AnalogyInstance> instances) {
  if (instances.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) correct += p.predicted[i] == instances[i].label;
  return static_cast<double>(correct) / instances.size();
}

std::size_t select_by_accuracy(std::span<const double> accuracies) {
  if (accuracies.empty()) throw DataError("no checkpoints to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < accuracies.size(); ++i) {
    if (accuracies[i] >= accuracies[best]) best = i;
  }
  return best;
}

CheckpointSelection select_checkpoint(std::span<const NetworkCheckpoint> checkpoints,
                                      std::span<const AnalogyInstance> dev_instances,
                                      std::span<const PredicateArgumentPair> dev_pairs,
                                      const EmbeddingStore& store, SelectionMode mode,
                                      std::uint32_t batch_size) {
  if (checkpoints.empty()) throw DataError("no checkpoints to select from");
  CheckpointSelection sel;
  if (mode == SelectionMode::kLast || dev_instances.empty()) {
    sel.index = checkpoints.size() - 1;
    return sel;
  }
  for (const auto& ck : checkpoints) {
    auto p = predict_instances(ck, dev_instances, dev_pairs, store, batch_size);
    sel.dev_accuracy.push_back(binary_accuracy(p, dev_instances));
  }
  sel.index = select_by_accuracy(sel.dev_accuracy);
  return sel;
}

void write_metrics_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path) {
  std::string out = "checkpoint,loss,accuracy\n";
  char line[96];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%u,%.6f,%.6f\n", r.checkpoint, r.loss, r.accuracy);
    out += line;
  }
  write_file_bytes(path, out);
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file_bytes(path));
  std::string line;
  std::vector<MetricsRow> rows;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (n == 1) {
      if (line != "checkpoint,loss,accuracy") {
        throw SchemaError(1, "header", "expected 'checkpoint,loss,accuracy'");
      }
      continue;
    }
    if (line.empty()) continue;
    MetricsRow r;
    unsigned ck = 0;
    if (std::sscanf(line.c_str(), "%u,%lf,%lf", &ck, &r.loss, &r.accuracy) != 3) {
      throw SchemaError(n, "row", "expected three comma-separated numbers");
    }
    r.checkpoint = ck;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace analogy
