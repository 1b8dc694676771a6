// analogy: command-line driver for the role classification pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "analogy/error.hpp"
#include "analogy/pipeline.hpp"
#include "analogy/synthetic.hpp"

namespace fs = std::filesystem;
using namespace analogy;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string config;
};

PipelineConfig base_config(const Globals& g) {
  PipelineConfig c = g.config.empty() ? PipelineConfig{} : load_pipeline_config(g.config);
  if (g.seed) c.seed = *g.seed;
  if (g.threads) c.threads = std::max(1u, *g.threads);
  return c;
}

fs::path out_path(const std::string& p) { return resolve_output_path(p); }

// Directory that receives the manifest for a step writing `file`.
fs::path dir_of(const fs::path& file) {
  return file.has_parent_path() ? file.parent_path() : fs::path(".");
}

void print_counts(const char* label, const InstanceCounts& k) {
  std::printf("%s: %llu instances (%llu positive, %llu negative)\n", label,
              static_cast<unsigned long long>(k.total), static_cast<unsigned long long>(k.positive),
              static_cast<unsigned long long>(k.negative));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic role classification by analogical transfer"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Global seed (overrides the config)");
  app.add_option("--threads", g.threads, "Worker threads for parallel steps");
  app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);

  std::function<void()> action;

  // parse
  auto* parse = app.add_subcommand("parse", "Convert fulltext XML (file or directory) to JSONL");
  std::string parse_in, parse_out;
  parse->add_option("--input", parse_in, "Fulltext XML file or directory")->required();
  parse->add_option("--out", parse_out, "Output JSONL corpus")->required();
  parse->callback([&] {
    action = [&] {
      auto c = base_config(g);
      const fs::path out = out_path(parse_out);
      auto s = step_parse(parse_in, out, c.threads);
      std::printf("sentences %zu, annotated %zu, frames %zu, documents %zu\n", s.stats.n_sentences,
                  s.stats.n_annotated_sentences, s.stats.n_distinct_frames, s.stats.n_docs);
      std::printf("rejected sentences %zu, annotation sets without target %zu, INC labels %zu\n",
                  s.rejected, s.skipped_annotation_sets, s.skipped_incorporated);
      const fs::path in[] = {parse_in};
      const fs::path o[] = {out};
      write_run_manifest(dir_of(out), "parse", c, in, o);
    };
  });

  // split
  auto* split = app.add_subcommand("split", "Split a JSONL corpus by document manifest");
  std::string split_corpus, split_manifest, split_out;
  split->add_option("--corpus", split_corpus, "JSONL corpus")->required();
  split->add_option("--manifest", split_manifest, "Split manifest (defaults to the config's)");
  split->add_option("--out-dir", split_out, "Output directory")->required();
  split->callback([&] {
    action = [&] {
      auto c = base_config(g);
      const fs::path manifest = split_manifest.empty() ? c.manifest : fs::path(split_manifest);
      const fs::path out = out_path(split_out);
      auto s = step_split(split_corpus, manifest, out);
      std::printf("train %zu, dev %zu, test %zu sentences\n", s.train.size(), s.dev.size(), s.test.size());
      const fs::path in[] = {split_corpus, manifest};
      const fs::path o[] = {out / "train.jsonl", out / "dev.jsonl", out / "test.jsonl"};
      write_run_manifest(out, "split", c, in, o);
    };
  });

  // embed-build
  auto* embed = app.add_subcommand("embed-build", "Build a deterministic span embedding store");
  std::vector<std::string> embed_corpora;
  std::optional<std::uint32_t> embed_dim;
  std::string embed_out;
  embed->add_option("--corpus", embed_corpora, "JSONL corpora (repeatable)")->required();
  embed->add_option("--dim", embed_dim, "Embedding dimension");
  embed->add_option("--out", embed_out, "Output store")->required();
  embed->callback([&] {
    action = [&] {
      auto c = base_config(g);
      if (embed_dim) c.embed_dim = *embed_dim;
      const fs::path out = out_path(embed_out);
      std::vector<fs::path> in(embed_corpora.begin(), embed_corpora.end());
      auto store = step_embed_build(in, c.embed_dim, derive_step_seeds(c.seed).embed, out);
      std::printf("%zu spans, dim %u\n", store.size(), store.dim());
      const fs::path o[] = {out};
      write_run_manifest(dir_of(out), "embed-build", c, in, o);
    };
  });

  // instances
  auto* inst = app.add_subcommand("instances", "Build analogy instances, pair table and shards");
  std::string inst_corpus, inst_out;
  std::optional<std::uint32_t> inst_shards;
  bool inst_eval = false, inst_no_balance = false, inst_no_self = false;
  inst->add_option("--corpus", inst_corpus, "JSONL corpus")->required();
  inst->add_option("--out-dir", inst_out, "Output directory")->required();
  inst->add_option("--shards", inst_shards, "Number of training shards");
  inst->add_flag("--eval", inst_eval, "Write a single unbalanced shard for evaluation");
  inst->add_flag("--no-balance", inst_no_balance, "Keep the natural class ratio");
  inst->add_flag("--no-self-pairs", inst_no_self, "Drop instances pairing a pair with itself");
  inst->callback([&] {
    action = [&] {
      auto c = base_config(g);
      if (inst_shards) c.shards = std::max(1u, *inst_shards);
      if (inst_no_balance) c.balance = false;
      if (inst_no_self) c.include_self_pairs = false;
      const fs::path out = out_path(inst_out);
      print_counts("written", step_instances(inst_corpus, out, c, !inst_eval));
      const fs::path in[] = {inst_corpus};
      const fs::path o[] = {out / "pairs.jsonl", out / "counts.json"};
      write_run_manifest(out, "instances", c, in, o);
    };
  });

  // train
  auto* train = app.add_subcommand("train", "Train the binary analogy classifier segment by segment");
  std::string train_inst, train_store, train_out, train_dev, train_resume, train_selection;
  std::uint32_t train_shards = 0;
  std::optional<std::uint32_t> train_epochs, train_batch;
  train->add_option("--instances", train_inst, "Training instance directory")->required();
  train->add_option("--store", train_store, "Embedding store")->required();
  train->add_option("--out-dir", train_out, "Output directory")->required();
  train->add_option("--dev", train_dev, "Dev instance directory for checkpoint selection");
  train->add_option("--resume", train_resume, "Continue from this checkpoint");
  train->add_option("--shards", train_shards, "Train on the first N shards only (0 = all)");
  train->add_option("--epochs", train_epochs, "Epochs per segment");
  train->add_option("--batch-size", train_batch, "Mini-batch size");
  train->add_option("--selection", train_selection, "Checkpoint selection: dev or last")
      ->check(CLI::IsMember({"dev", "last"}));
  train->callback([&] {
    action = [&] {
      auto c = base_config(g);
      if (train_epochs) c.epochs_per_segment = std::max(1u, *train_epochs);
      if (train_batch) c.batch_size = std::max(1u, *train_batch);
      if (!train_selection.empty()) {
        c.selection = train_selection == "dev" ? SelectionMode::kDevAccuracy : SelectionMode::kLast;
      } else if (train_dev.empty()) {
        c.selection = SelectionMode::kLast;
      }
      const fs::path out = out_path(train_out);
      auto s = step_train(train_inst, train_store, out, c, train_dev, train_resume, train_shards);
      std::printf("%zu checkpoints, selected %s\n", s.n_checkpoints, s.best.string().c_str());
      std::vector<fs::path> in = {fs::path(train_inst) / "pairs.jsonl", train_store};
      if (!train_resume.empty()) in.push_back(train_resume);
      const fs::path o[] = {out / "metrics.csv", out / "best.anck", out / "selection.json"};
      write_run_manifest(out, "train", c, in, o);
    };
  });

  // eval-binary
  auto* evb = app.add_subcommand("eval-binary", "Score a checkpoint on labeled instances");
  std::string evb_ck, evb_inst, evb_store, evb_out;
  evb->add_option("--checkpoint", evb_ck, "Checkpoint")->required();
  evb->add_option("--instances", evb_inst, "Instance directory")->required();
  evb->add_option("--store", evb_store, "Embedding store")->required();
  evb->add_option("--out-dir", evb_out, "Report directory")->required();
  evb->callback([&] {
    action = [&] {
      auto c = base_config(g);
      const fs::path out = out_path(evb_out);
      std::cout << format_binary_report(step_eval_binary(evb_ck, evb_inst, evb_store, out));
      const fs::path in[] = {evb_ck, fs::path(evb_inst) / "pairs.jsonl", evb_store};
      const fs::path o[] = {out / "binary_report.json"};
      write_run_manifest(out, "eval-binary", c, in, o);
    };
  });

  // bank
  auto* bank = app.add_subcommand("bank", "Build the per-frame, per-role reference bank");
  std::string bank_corpus, bank_out;
  bank->add_option("--corpus", bank_corpus, "Source JSONL corpus")->required();
  bank->add_option("--out", bank_out, "Output bank JSON")->required();
  bank->callback([&] {
    action = [&] {
      auto c = base_config(g);
      const fs::path out = out_path(bank_out);
      auto b = step_bank(bank_corpus, out);
      std::printf("%zu frames; n_e covering 90%% of roles: %u\n", b.frames.size(), recommend_n_e(b));
      const fs::path in[] = {bank_corpus};
      const fs::path o[] = {out};
      write_run_manifest(dir_of(out), "bank", c, in, o);
    };
  });

  // transfer
  auto* tr = app.add_subcommand("transfer", "Classify target roles by analogical transfer");
  std::string tr_bank, tr_ck, tr_store, tr_corpus, tr_out;
  std::optional<std::uint32_t> tr_ne;
  tr->add_option("--bank", tr_bank, "Reference bank")->required();
  tr->add_option("--checkpoint", tr_ck, "Checkpoint")->required();
  tr->add_option("--store", tr_store, "Embedding store")->required();
  tr->add_option("--corpus", tr_corpus, "Target JSONL corpus with gold spans")->required();
  tr->add_option("--n-e", tr_ne, "Source pairs sampled per role");
  tr->add_option("--out", tr_out, "Decoder output JSONL")->required();
  tr->callback([&] {
    action = [&] {
      auto c = base_config(g);
      if (tr_ne) c.n_e = std::max(1u, *tr_ne);
      const fs::path out = out_path(tr_out);
      auto d = step_transfer(tr_bank, tr_ck, tr_store, tr_corpus, c, out);
      std::printf("%zu targets decoded\n", d.size());
      const fs::path in[] = {tr_bank, tr_ck, tr_store, tr_corpus};
      const fs::path o[] = {out};
      write_run_manifest(dir_of(out), "transfer", c, in, o);
    };
  });

  // eval-src
  auto* evs = app.add_subcommand("eval-src", "Role classification metrics and NOTR breakdown");
  std::string evs_decoded, evs_ref, evs_out;
  evs->add_option("--decoded", evs_decoded, "Decoder output JSONL")->required();
  evs->add_option("--reference", evs_ref, "Corpus whose frames and roles count as seen")->required();
  evs->add_option("--out-dir", evs_out, "Report directory")->required();
  evs->callback([&] {
    action = [&] {
      auto c = base_config(g);
      const fs::path out = out_path(evs_out);
      auto s = step_eval_src(evs_decoded, evs_ref, out);
      std::cout << format_src_report(s.metrics, s.notr);
      const fs::path in[] = {evs_decoded, evs_ref};
      const fs::path o[] = {out / "src_report.json"};
      write_run_manifest(out, "eval-src", c, in, o);
    };
  });

  // baselines
  auto* base = app.add_subcommand("baselines", "Train and score the direct multi-class baselines");
  std::string base_train, base_test, base_store, base_out;
  base->add_option("--train", base_train, "Training JSONL corpus")->required();
  base->add_option("--test", base_test, "Test JSONL corpus")->required();
  base->add_option("--store", base_store, "Embedding store")->required();
  base->add_option("--out", base_out, "Output JSON")->required();
  base->callback([&] {
    action = [&] {
      auto c = base_config(g);
      const fs::path out = out_path(base_out);
      auto s = step_baselines(base_train, base_test, base_store, c, out);
      std::printf("element only: %.2f%%\npredicate + element: %.2f%%\n", 100.0 * s.element.accuracy,
                  100.0 * s.predicate_element.accuracy);
      const fs::path in[] = {base_train, base_test, base_store};
      const fs::path o[] = {out};
      write_run_manifest(dir_of(out), "baselines", c, in, o);
    };
  });

  // report plot
  auto* report = app.add_subcommand("report", "Render reports");
  report->require_subcommand(1);
  auto* plot = report->add_subcommand("plot", "Loss and accuracy chart (SVG) from a metrics CSV");
  std::string plot_csv, plot_out;
  plot->add_option("--metrics", plot_csv, "metrics.csv written by train")->required();
  plot->add_option("--out", plot_out, "Output SVG")->required();
  plot->callback([&] { action = [&] { step_report_plot(plot_csv, out_path(plot_out)); }; });

  // synth
  auto* synth = app.add_subcommand("synth", "Write the synthetic corpus and its split manifest");
  std::string synth_out;
  std::uint64_t synth_seed = SyntheticOptions{}.seed;
  synth->add_option("--out-dir", synth_out, "Output directory")->required();
  synth->add_option("--corpus-seed", synth_seed, "Generator seed");
  synth->callback([&] {
    action = [&] {
      SyntheticOptions opt;
      opt.seed = synth_seed;
      auto s = generate_synthetic_corpus(opt);
      const fs::path out = out_path(synth_out);
      write_jsonl(s.corpus, out / "corpus.jsonl");
      write_manifest(s.manifest, out / "manifest.json");
      std::printf("%zu sentences\n", s.corpus.size());
    };
  });

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Run every step from a config file");
  std::string pipe_out;
  pipe->add_option("--out-dir", pipe_out, "Output directory (overrides the config)");
  pipe->callback([&] {
    action = [&] {
      if (g.config.empty()) throw CLI::RequiredError("--config");
      auto c = base_config(g);
      const fs::path requested = pipe_out.empty() ? c.output_dir : fs::path(pipe_out);
      if (requested.empty()) throw DataError("no output directory: set output_dir in the config or pass --out-dir");
      const fs::path out = out_path(requested);
      auto s = run_pipeline(c, out);
      print_counts("training instances", s.train_counts);
      print_counts("balanced", s.train_balanced);
      std::cout << format_binary_report(s.binary) << format_src_report(s.src.metrics, s.src.notr);
      if (s.baselines) {
        std::printf("baseline element only: %.2f%%\nbaseline predicate + element: %.2f%%\n",
                    100.0 * s.baselines->element.accuracy, 100.0 * s.baselines->predicate_element.accuracy);
      }
      std::printf("artifacts in %s\n", out.string().c_str());
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (action) action();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
