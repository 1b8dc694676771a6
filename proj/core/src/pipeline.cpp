#include "analogy/pipeline.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include <json.hpp>

#include "analogy/binary_io.hpp"
#include "analogy/embed.hpp"
#include "analogy/error.hpp"
#include "analogy/hash.hpp"
#include "analogy/model.hpp"
#include "analogy/rng.hpp"

namespace analogy {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kArtifactVersion = 1;

[[noreturn]] void config_error(const std::string& field, const std::string& msg) {
  throw DataError("config field '" + field + "': " + msg);
}

// Walks one JSON object, handing each known key to its reader and rejecting
// the rest.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) config_error(path_, "expected an object");
  }

  template <typename Fn>
  void field(const std::string& key, Fn&& read) {
    seen_.insert(key);
    if (auto it = obj_.find(key); it != obj_.end() && !it->is_null()) read(*it, path_ + "." + key);
  }

  void done() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.contains(it.key())) config_error(path_ + "." + it.key(), "unknown key");
    }
  }

  const json& get(const std::string& key) const { return obj_.at(key); }
  bool has(const std::string& key) const { return obj_.contains(key); }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename T>
auto read_uint(T& out, std::uint64_t min = 0) {
  return [&out, min](const json& v, const std::string& path) {
    if (!v.is_number_unsigned()) config_error(path, "expected a non-negative integer");
    const auto x = v.get<std::uint64_t>();
    if (x < min) config_error(path, "must be at least " + std::to_string(min));
    out = static_cast<T>(x);
  };
}

auto read_double(double& out) {
  return [&out](const json& v, const std::string& path) {
    if (!v.is_number()) config_error(path, "expected a number");
    out = v.get<double>();
  };
}

auto read_bool(bool& out) {
  return [&out](const json& v, const std::string& path) {
    if (!v.is_boolean()) config_error(path, "expected true or false");
    out = v.get<bool>();
  };
}

auto read_path(fs::path& out, const fs::path& base) {
  return [&out, &base](const json& v, const std::string& path) {
    if (!v.is_string()) config_error(path, "expected a path string");
    fs::path p(v.get<std::string>());
    out = p.is_relative() && !base.empty() ? base / p : p;
  };
}

std::string hex_hash_file(const fs::path& p) { return hex64(fnv1a64(read_file_bytes(p))); }

void write_text(const fs::path& path, std::string_view text) { write_file_bytes(path, text); }

std::string shard_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "shard_%03zu.ains", i);
  return buf;
}

std::string checkpoint_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "checkpoint_%03zu.anck", i);
  return buf;
}

NetworkConfig network_config(const PipelineConfig& c, std::uint32_t dim) {
  NetworkConfig n;
  n.input_dim = 4 * dim;
  n.n_blocks = c.n_blocks;
  n.dropout_rate = c.dropout_rate;
  n.seed = derive_step_seeds(c.seed).init;
  return n;
}

TrainHyperparams train_hyperparams(const PipelineConfig& c) {
  TrainHyperparams h;
  h.adam.learning_rate = c.learning_rate;
  h.batch_size = c.batch_size;
  h.epochs_per_segment = c.epochs_per_segment;
  h.metrics_window = c.metrics_window;
  h.seed = derive_step_seeds(c.seed).train;
  return h;
}

std::vector<fs::path> shard_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".ains") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

PipelineConfig parse_pipeline_config(std::string_view text, const fs::path& base) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what(), e.byte);
  }
  PipelineConfig c;
  Section top(root, "$");
  top.field("seed", read_uint(c.seed));
  top.field("threads", read_uint(c.threads, 1));
  // Output goes under the working directory or $ANALOGY_OUTPUT_ROOT, never
  // next to the config file.
  static const fs::path kNoBase;
  top.field("output_dir", read_path(c.output_dir, kNoBase));
  top.field("corpus", [&](const json& v, const std::string& p) {
    Section s(v, p);
    s.field("path", read_path(c.corpus, base));
    s.field("manifest", read_path(c.manifest, base));
    s.done();
  });
  top.field("embed", [&](const json& v, const std::string& p) {
    Section s(v, p);
    s.field("dim", read_uint(c.embed_dim, 1));
    s.field("store", read_path(c.store, base));
    s.done();
  });
  top.field("instances", [&](const json& v, const std::string& p) {
    Section s(v, p);
    s.field("shards", read_uint(c.shards, 1));
    s.field("include_self_pairs", read_bool(c.include_self_pairs));
    s.field("balance", read_bool(c.balance));
    s.done();
  });
  top.field("model", [&](const json& v, const std::string& p) {
    Section s(v, p);
    s.field("blocks", read_uint(c.n_blocks));
    s.field("dropout", read_double(c.dropout_rate));
    s.done();
  });
  top.field("train", [&](const json& v, const std::string& p) {
    Section s(v, p);
    s.field("batch_size", read_uint(c.batch_size, 1));
    s.field("epochs_per_segment", read_uint(c.epochs_per_segment, 1));
    s.field("learning_rate", read_double(c.learning_rate));
    s.field("metrics_window", read_uint(c.metrics_window, 1));
    s.field("selection", [&](const json& sv, const std::string& sp) {
      const std::string mode = sv.is_string() ? sv.get<std::string>() : "";
      if (mode == "dev") c.selection = SelectionMode::kDevAccuracy;
      else if (mode == "last") c.selection = SelectionMode::kLast;
      else config_error(sp, "expected \"dev\" or \"last\"");
    });
    s.done();
  });
  top.field("transfer", [&](const json& v, const std::string& p) {
    Section s(v, p);
    s.field("n_e", read_uint(c.n_e, 1));
    s.done();
  });
  top.field("eval", [&](const json& v, const std::string& p) {
    Section s(v, p);
    s.field("baselines", read_bool(c.baselines));
    s.field("baseline_epochs", read_uint(c.baseline_epochs, 1));
    s.done();
  });
  top.done();
  if (!(c.dropout_rate >= 0.0 && c.dropout_rate < 1.0)) config_error("$.model.dropout", "must be in [0, 1)");
  if (!(c.learning_rate > 0.0)) config_error("$.train.learning_rate", "must be positive");
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  require_input(path, "config file");
  return parse_pipeline_config(read_file_bytes(path), path.parent_path());
}

std::string canonical_config_json(const PipelineConfig& c) {
  char lr[32], dr[32];
  std::snprintf(lr, sizeof lr, "%.17g", c.learning_rate);
  std::snprintf(dr, sizeof dr, "%.17g", c.dropout_rate);
  // Sorted keys via json's std::map storage. Doubles go through fixed
  // formatting so the hash does not depend on the JSON library's printer.
  json j;
  j["seed"] = c.seed;
  j["corpus"] = {{"path", c.corpus.generic_string()}, {"manifest", c.manifest.generic_string()}};
  j["embed"] = {{"dim", c.embed_dim}, {"store", c.store.generic_string()}};
  j["instances"] = {{"shards", c.shards},
                    {"include_self_pairs", c.include_self_pairs},
                    {"balance", c.balance}};
  j["model"] = {{"blocks", c.n_blocks}, {"dropout", dr}};
  j["train"] = {{"batch_size", c.batch_size},
                {"epochs_per_segment", c.epochs_per_segment},
                {"learning_rate", lr},
                {"metrics_window", c.metrics_window},
                {"selection", c.selection == SelectionMode::kDevAccuracy ? "dev" : "last"}};
  j["transfer"] = {{"n_e", c.n_e}};
  j["eval"] = {{"baselines", c.baselines}, {"baseline_epochs", c.baseline_epochs}};
  return j.dump();
}

StepSeeds derive_step_seeds(std::uint64_t seed) {
  return {derive_seed(seed, "embed"),    derive_seed(seed, "balance"), derive_seed(seed, "shard"),
          derive_seed(seed, "init"),     derive_seed(seed, "train"),   derive_seed(seed, "transfer"),
          derive_seed(seed, "baseline")};
}

fs::path resolve_output_path(const fs::path& path) {
  if (path.is_absolute()) return path;
  if (const char* root = std::getenv("ANALOGY_OUTPUT_ROOT"); root && *root) return fs::path(root) / path;
  return path;
}

void require_input(const fs::path& path, std::string_view what) {
  if (path.empty()) throw DataError(std::string(what) + " was not given");
  if (!fs::exists(path)) throw DataError(std::string(what) + " not found: " + path.string());
}

void write_run_manifest(const fs::path& dir, std::string_view command, const PipelineConfig& c,
                        std::span<const fs::path> inputs, std::span<const fs::path> outputs) {
  const std::string cfg = canonical_config_json(c);
  const StepSeeds s = derive_step_seeds(c.seed);
  ordered_json m;
  m["format"] = "analogy-run-manifest";
  m["version"] = kArtifactVersion;
  m["command"] = command;
  m["seed"] = c.seed;
  m["seeds"] = {{"embed", hex64(s.embed)},       {"balance", hex64(s.balance)},
                {"shard", hex64(s.shard)},       {"init", hex64(s.init)},
                {"train", hex64(s.train)},       {"transfer", hex64(s.transfer)},
                {"baseline", hex64(s.baseline)}};
  m["config_hash"] = hex64(fnv1a64(cfg));
  m["config"] = json::parse(cfg);
  // Files under `dir` are recorded relative to it, so identical runs in
  // different directories produce identical manifests.
  const fs::path base = fs::absolute(dir).lexically_normal();
  auto shown = [&](const fs::path& p) {
    const fs::path rel = fs::absolute(p).lexically_normal().lexically_relative(base);
    return !rel.empty() && *rel.begin() != ".." ? rel.generic_string() : p.generic_string();
  };
  auto files = [&](std::span<const fs::path> ps) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : ps) {
      arr.push_back({{"path", shown(p)},
                     {"fnv1a64", fs::is_regular_file(p) ? ordered_json(hex_hash_file(p)) : nullptr}});
    }
    return arr;
  };
  m["inputs"] = files(inputs);
  m["outputs"] = files(outputs);
  write_text(dir / ("manifest." + std::string(command) + ".json"), m.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Steps

Corpus load_corpus_any(const fs::path& path, unsigned threads) {
  require_input(path, "corpus");
  if (fs::is_directory(path) || path.extension() == ".xml") {
    return parse_fulltext_path(path, threads).sentences;
  }
  return load_jsonl(path);
}

ParseSummary step_parse(const fs::path& input, const fs::path& out_jsonl, unsigned threads) {
  require_input(input, "fulltext input");
  ParseSummary s;
  Corpus corpus;
  if (fs::is_directory(input) || input.extension() == ".xml") {
    auto release = parse_fulltext_path(input, threads);
    s.rejected = release.rejected.size();
    s.skipped_annotation_sets = release.skipped_annotation_sets;
    s.skipped_incorporated = release.skipped_incorporated;
    corpus = std::move(release.sentences);
  } else {
    corpus = load_jsonl(input);
  }
  s.stats = corpus_stats(corpus);
  write_jsonl(corpus, out_jsonl);
  return s;
}

SplitCorpora step_split(const fs::path& corpus_jsonl, const fs::path& manifest, const fs::path& out_dir) {
  require_input(corpus_jsonl, "corpus");
  require_input(manifest, "split manifest");
  auto split = split_corpus(load_jsonl(corpus_jsonl), load_manifest(manifest));
  write_jsonl(split.train, out_dir / "train.jsonl");
  write_jsonl(split.dev, out_dir / "dev.jsonl");
  write_jsonl(split.test, out_dir / "test.jsonl");
  return split;
}

EmbeddingStore step_embed_build(std::span<const fs::path> corpora, std::uint32_t dim, std::uint64_t seed,
                                const fs::path& out_store) {
  if (corpora.empty()) throw DataError("embed-build needs at least one corpus");
  Corpus all;
  for (const auto& p : corpora) {
    require_input(p, "corpus");
    auto c = load_jsonl(p);
    all.insert(all.end(), std::make_move_iterator(c.begin()), std::make_move_iterator(c.end()));
  }
  auto store = build_deterministic_store(all, dim, seed);
  store_write(store, out_store);
  return store;
}

std::vector<AnalogyInstance> InstanceSet::all_instances() const {
  std::vector<AnalogyInstance> out;
  for (const auto& s : shards) out.insert(out.end(), s.instances.begin(), s.instances.end());
  return out;
}

InstanceSet load_instance_set(const fs::path& dir) {
  require_input(dir / "pairs.jsonl", "pair table");
  InstanceSet set;
  set.pairs = read_pair_table(dir / "pairs.jsonl");
  const auto files = shard_files(dir);
  if (files.empty()) throw DataError("no shard files in " + dir.string());
  for (const auto& f : files) {
    std::uint32_t n = 0;
    set.shards.push_back(read_shard(f, &n));
    if (n != files.size()) {
      throw DataError(f.string() + " belongs to a set of " + std::to_string(n) + " shards, found " +
                      std::to_string(files.size()));
    }
  }
  for (std::size_t i = 0; i < set.shards.size(); ++i) {
    if (set.shards[i].shard_index != i) throw DataError("shard files in " + dir.string() + " are out of order");
  }
  return set;
}

EmbeddingStore load_store(const fs::path& path) {
  require_input(path, "embedding store");
  return store_read(path);
}

InstanceCounts step_instances(const fs::path& corpus_jsonl, const fs::path& out_dir, const PipelineConfig& c,
                              bool for_training) {
  require_input(corpus_jsonl, "corpus");
  const auto table = collect_pairs(load_jsonl(corpus_jsonl));
  auto instances = build_all_instances(table, c.include_self_pairs, c.threads);
  const auto counts = count_instances(instances);
  const StepSeeds seeds = derive_step_seeds(c.seed);

  std::optional<InstanceCounts> balanced;
  std::uint32_t n_shards = 1;
  if (for_training) {
    if (c.balance) {
      instances = balance(instances, seeds.balance);
      balanced = count_instances(instances);
    }
    n_shards = c.shards;
  }
  // Evaluation sets keep corpus order in a single shard.
  std::vector<InstanceShard> shards = for_training ? shard(instances, n_shards, seeds.shard)
                                                   : std::vector<InstanceShard>{{0, std::move(instances)}};

  fs::create_directories(out_dir);
  for (const auto& old : shard_files(out_dir)) fs::remove(old);
  write_pair_table(table, out_dir / "pairs.jsonl");
  for (const auto& s : shards) write_shard(s, n_shards, out_dir / shard_name(s.shard_index));

  auto counts_json = [](const InstanceCounts& k) {
    return ordered_json{{"total", k.total},
                        {"positive", k.positive},
                        {"negative", k.negative},
                        {"total_without_self", k.total_without_self},
                        {"positive_without_self", k.positive_without_self}};
  };
  ordered_json j;
  j["format"] = "analogy-instance-counts";
  j["version"] = kArtifactVersion;
  j["pairs"] = table.pairs.size();
  j["frames"] = table.by_frame.size();
  j["all"] = counts_json(counts);
  if (balanced) j["balanced"] = counts_json(*balanced);
  j["shards"] = n_shards;
  write_text(out_dir / "counts.json", j.dump(2) + "\n");
  return balanced.value_or(counts);
}

TrainSummary step_train(const fs::path& train_dir, const fs::path& store_path, const fs::path& out_dir,
                        const PipelineConfig& c, const fs::path& dev_dir, const fs::path& resume,
                        std::uint32_t max_shards) {
  auto train = load_instance_set(train_dir);
  if (max_shards != 0 && max_shards < train.shards.size()) train.shards.resize(max_shards);
  const auto store = load_store(store_path);
  const auto config = network_config(c, store.dim());
  const auto hyper = train_hyperparams(c);

  std::optional<NetworkCheckpoint> start;
  if (!resume.empty()) {
    require_input(resume, "resume checkpoint");
    start = checkpoint_load(resume);
  }

  fs::create_directories(out_dir);
  auto result = train_segments(train.shards, train.pairs.pairs, store, config, hyper,
                               start ? &*start : nullptr, [&](const NetworkCheckpoint& ck) {
                                 checkpoint_save(ck, out_dir / checkpoint_name(ck.segments_completed));
                               });
  write_metrics_csv(result.metrics, out_dir / "metrics.csv");

  TrainSummary summary;
  summary.n_checkpoints = result.checkpoints.size();
  if (result.checkpoints.empty()) throw DataError("nothing to train: every segment is already completed");
  if (c.selection == SelectionMode::kDevAccuracy) {
    if (dev_dir.empty()) throw DataError("dev-accuracy checkpoint selection needs dev instances");
    const auto dev = load_instance_set(dev_dir);
    summary.selection = select_checkpoint(result.checkpoints, dev.all_instances(), dev.pairs.pairs, store,
                                          SelectionMode::kDevAccuracy, c.batch_size);
  } else {
    summary.selection = select_checkpoint(result.checkpoints, {}, {}, store, SelectionMode::kLast);
  }
  const auto& best = result.checkpoints[summary.selection.index];
  summary.best = out_dir / "best.anck";
  checkpoint_save(best, summary.best);

  ordered_json j;
  j["format"] = "analogy-selection";
  j["version"] = kArtifactVersion;
  j["mode"] = c.selection == SelectionMode::kDevAccuracy ? "dev" : "last";
  j["selected_checkpoint"] = best.segments_completed;
  ordered_json acc = ordered_json::array();
  for (double a : summary.selection.dev_accuracy) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", a);
    acc.push_back(std::stod(buf));
  }
  j["dev_accuracy"] = acc;
  write_text(out_dir / "selection.json", j.dump(2) + "\n");
  return summary;
}

BinaryMetrics step_eval_binary(const fs::path& checkpoint, const fs::path& instances_dir,
                               const fs::path& store_path, const fs::path& out_dir) {
  require_input(checkpoint, "checkpoint");
  const auto ck = checkpoint_load(checkpoint);
  const auto set = load_instance_set(instances_dir);
  const auto store = load_store(store_path);
  const auto instances = set.all_instances();
  const auto pred = predict_instances(ck, instances, set.pairs.pairs, store);
  std::vector<std::uint8_t> labels;
  labels.reserve(instances.size());
  for (const auto& i : instances) labels.push_back(i.label);
  const auto m = binary_metrics(pred.predicted, labels);
  write_text(out_dir / "binary_report.txt", format_binary_report(m));
  write_text(out_dir / "binary_report.json", binary_report_json(m));
  return m;
}

ReferenceBank step_bank(const fs::path& source_jsonl, const fs::path& out_bank) {
  require_input(source_jsonl, "source corpus");
  auto bank = build_bank(load_jsonl(source_jsonl));
  write_bank(bank, out_bank);
  return bank;
}

std::vector<DecodedTarget> step_transfer(const fs::path& bank_path, const fs::path& checkpoint,
                                         const fs::path& store_path, const fs::path& targets_jsonl,
                                         const PipelineConfig& c, const fs::path& out_decoded) {
  require_input(bank_path, "reference bank");
  require_input(checkpoint, "checkpoint");
  require_input(targets_jsonl, "target corpus");
  const auto bank = read_bank(bank_path);
  const auto ck = checkpoint_load(checkpoint);
  const auto store = load_store(store_path);
  const auto targets = collect_pairs(load_jsonl(targets_jsonl));
  ModelScorer scorer(ck, store);
  auto decoded =
      decode_targets(scorer, bank, targets.pairs, c.n_e, derive_step_seeds(c.seed).transfer, c.threads);
  write_decoded_jsonl(decoded, out_decoded);
  return decoded;
}

SrcSummary step_eval_src(const fs::path& decoded_path, const fs::path& reference_jsonl,
                         const fs::path& out_dir) {
  require_input(decoded_path, "decoder output");
  require_input(reference_jsonl, "reference corpus");
  const auto records = read_decoded_jsonl(decoded_path);
  if (records.empty()) throw DataError("decoder output is empty: " + decoded_path.string());
  std::vector<std::string> predicted, gold;
  std::vector<TargetResult> results;
  for (const auto& r : records) {
    predicted.push_back(r.predicted_role);
    gold.push_back(r.gold_role);
    results.push_back({r.frame, r.gold_role, r.predicted_role});
  }
  SrcSummary s;
  s.metrics = src_metrics(predicted, gold);
  s.notr = notr_report(results, load_jsonl(reference_jsonl));
  write_text(out_dir / "src_report.txt", format_src_report(s.metrics, s.notr));
  write_text(out_dir / "src_report.json", src_report_json(s.metrics, s.notr));
  return s;
}

BaselineSummary step_baselines(const fs::path& train_jsonl, const fs::path& test_jsonl,
                               const fs::path& store_path, const PipelineConfig& c,
                               const fs::path& out_json) {
  require_input(train_jsonl, "training corpus");
  require_input(test_jsonl, "test corpus");
  const auto store = load_store(store_path);
  const auto train = collect_pairs(load_jsonl(train_jsonl));
  const auto test = collect_pairs(load_jsonl(test_jsonl));
  BaselineOptions opt;
  opt.n_blocks = c.n_blocks;
  opt.dropout_rate = c.dropout_rate;
  opt.train = train_hyperparams(c);
  opt.train.seed = derive_step_seeds(c.seed).baseline;
  opt.epochs = c.baseline_epochs;

  BaselineSummary s;
  opt.features = BaselineFeatures::kElement;
  s.element = baseline_direct(train.pairs, test.pairs, store, opt);
  opt.features = BaselineFeatures::kPredicateElement;
  s.predicate_element = baseline_direct(train.pairs, test.pairs, store, opt);

  auto result_json = [](const BaselineResult& r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", 100.0 * r.accuracy);
    return ordered_json{{"accuracy", std::stod(buf)},
                        {"classes", r.n_classes},
                        {"train", r.n_train},
                        {"test", r.n_test}};
  };
  ordered_json j;
  j["format"] = "analogy-baselines";
  j["version"] = kArtifactVersion;
  j["element"] = result_json(s.element);
  j["predicate_element"] = result_json(s.predicate_element);
  write_text(out_json, j.dump(2) + "\n");
  return s;
}

void step_report_plot(const fs::path& metrics_csv, const fs::path& out_svg) {
  require_input(metrics_csv, "metrics CSV");
  write_text(out_svg, render_metrics_svg(read_metrics_csv(metrics_csv)));
}

PipelineSummary run_pipeline(const PipelineConfig& c, const fs::path& out) {
  require_input(c.corpus, "corpus");
  require_input(c.manifest, "split manifest");
  fs::create_directories(out);
  PipelineSummary s;
  const StepSeeds seeds = derive_step_seeds(c.seed);

  const fs::path corpus = out / "corpus.jsonl";
  s.corpus = step_parse(c.corpus, corpus, c.threads);
  const fs::path inputs[] = {c.corpus};
  const fs::path parse_out[] = {corpus};
  write_run_manifest(out, "parse", c, inputs, parse_out);

  step_split(corpus, c.manifest, out);
  const fs::path train = out / "train.jsonl", dev = out / "dev.jsonl", test = out / "test.jsonl";
  {
    const fs::path in[] = {corpus, c.manifest};
    const fs::path o[] = {train, dev, test};
    write_run_manifest(out, "split", c, in, o);
  }

  fs::path store = out / "store.aemb";
  if (c.store.empty()) {
    const fs::path in[] = {train, dev, test};
    step_embed_build(in, c.embed_dim, seeds.embed, store);
    const fs::path o[] = {store};
    write_run_manifest(out, "embed-build", c, in, o);
  } else {
    store = c.store;
    require_input(store, "embedding store");
  }

  const fs::path inst = out / "instances";
  s.train_balanced = step_instances(train, inst / "train", c, true);
  s.train_counts = count_instances(build_all_instances(collect_pairs(load_jsonl(train)),
                                                       c.include_self_pairs, c.threads));
  step_instances(dev, inst / "dev", c, false);
  step_instances(test, inst / "test", c, false);
  {
    const fs::path in[] = {train, dev, test};
    const fs::path o[] = {inst / "train" / "counts.json", inst / "dev" / "counts.json",
                          inst / "test" / "counts.json"};
    write_run_manifest(out, "instances", c, in, o);
  }

  const fs::path model = out / "model";
  s.train = step_train(inst / "train", store, model, c, inst / "dev");
  {
    const fs::path in[] = {inst / "train" / "pairs.jsonl", store};
    const fs::path o[] = {model / "metrics.csv", s.train.best, model / "selection.json"};
    write_run_manifest(out, "train", c, in, o);
  }

  const fs::path reports = out / "reports";
  s.binary = step_eval_binary(s.train.best, inst / "test", store, reports);
  {
    const fs::path in[] = {s.train.best, inst / "test" / "pairs.jsonl"};
    const fs::path o[] = {reports / "binary_report.json"};
    write_run_manifest(out, "eval-binary", c, in, o);
  }

  const fs::path bank = out / "bank.json";
  step_bank(train, bank);
  const fs::path decoded = out / "decoded.jsonl";
  step_transfer(bank, s.train.best, store, test, c, decoded);
  {
    const fs::path in[] = {bank, s.train.best, store, test};
    const fs::path o[] = {decoded};
    write_run_manifest(out, "transfer", c, in, o);
  }

  s.src = step_eval_src(decoded, dev, reports);
  if (c.baselines) {
    s.baselines = step_baselines(train, test, store, c, reports / "baselines.json");
  }
  {
    const fs::path in[] = {decoded, dev};
    const fs::path o[] = {reports / "src_report.json"};
    write_run_manifest(out, "eval-src", c, in, o);
  }

  step_report_plot(model / "metrics.csv", out / "metrics.svg");
  return s;
}

}  // namespace analogy
