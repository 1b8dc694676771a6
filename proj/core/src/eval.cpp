#include "analogy/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "analogy/error.hpp"
#include "analogy/rng.hpp"
#include "json.hpp"

namespace analogy {

namespace {

double safe_div(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassMetrics m;
  m.precision = safe_div(tp, tp + fp);
  m.recall = safe_div(tp, tp + fn);
  m.f1 = safe_div(2 * m.precision * m.recall, m.precision + m.recall);
  m.support = tp + fn;
  return m;
}

}  // namespace

BinaryMetrics binary_metrics(std::span<const std::uint8_t> predictions,
                             std::span<const std::uint8_t> labels) {
  if (predictions.empty()) throw DataError("binary metrics over an empty set");
  if (predictions.size() != labels.size()) throw DataError("predictions and labels differ in length");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] != 0;
    const bool y = labels[i] != 0;
    tp += p && y;
    fp += p && !y;
    fn += !p && y;
    tn += !p && !y;
  }
  BinaryMetrics m;
  m.positive = class_metrics(tp, fp, fn);
  m.negative = class_metrics(tn, fn, fp);
  m.total = labels.size();
  m.accuracy = static_cast<double>(tp + tn) / m.total;
  return m;
}

SrcMetrics src_metrics(std::span<const std::string> predicted, std::span<const std::string> gold) {
  if (gold.empty()) throw DataError("role classification metrics over an empty set");
  if (predicted.size() != gold.size()) throw DataError("predicted and gold roles differ in length");
  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0;
  };
  std::map<std::string, Counts> counts;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!predicted[i].empty() && predicted[i] == gold[i]) {
      ++correct;
      ++counts[gold[i]].tp;
    } else {
      ++counts[gold[i]].fn;
      if (!predicted[i].empty()) ++counts[predicted[i]].fp;
    }
  }
  SrcMetrics m;
  m.total = gold.size();
  m.accuracy = static_cast<double>(correct) / m.total;
  for (const auto& [role, c] : counts) {
    ClassMetrics cm = class_metrics(c.tp, c.fp, c.fn);
    const double w = static_cast<double>(cm.support) / m.total;
    m.precision += w * cm.precision;
    m.recall += w * cm.recall;
    m.f1 += w * cm.f1;
    m.per_class.emplace(role, cm);
  }
  return m;
}

NotrReport notr_report(std::span<const TargetResult> results, const Corpus& reference) {
  std::set<std::string> ref_frames;
  std::set<std::pair<std::string, std::string>> ref_roles;
  for (const auto& s : reference) {
    for (const auto& ann : s.annotations) {
      ref_frames.insert(ann.frame_name);
      for (const auto& fe : ann.elements) {
        if (fe.span) ref_roles.emplace(ann.frame_name, fe.role_name);
      }
    }
  }

  NotrReport r;
  std::size_t correct = 0;
  std::set<std::string> frames, unseen_frames, unseen_role_frames;
  std::size_t frame_correct = 0, role_correct = 0;
  for (const auto& t : results) {
    const bool ok = !t.predicted_role.empty() && t.predicted_role == t.gold_role;
    ++r.total;
    correct += ok;
    r.unclassifiable += t.predicted_role.empty();
    frames.insert(t.frame);
    if (!ref_frames.contains(t.frame)) {
      ++r.unseen_frame.count;
      frame_correct += ok;
      unseen_frames.insert(t.frame);
    }
    if (!ref_roles.contains({t.frame, t.gold_role})) {
      ++r.unseen_role.count;
      role_correct += ok;
      unseen_role_frames.insert(t.frame);
    }
  }
  r.distinct_frames = frames.size();
  r.overall_accuracy = safe_div(correct, r.total);
  auto finish = [&](SubgroupReport& g, std::size_t ok, std::size_t n_frames) {
    g.distinct_frames = n_frames;
    if (g.count == 0) return;
    g.accuracy = static_cast<double>(ok) / g.count;
    g.delta = g.accuracy - r.overall_accuracy;
  };
  finish(r.unseen_frame, frame_correct, unseen_frames.size());
  finish(r.unseen_role, role_correct, unseen_role_frames.size());
  return r;
}

// ---------------------------------------------------------------------------

namespace {

void fill_features(const EmbeddingStore& store, const PredicateArgumentPair& p, BaselineFeatures f,
                   float* out) {
  if (f == BaselineFeatures::kPredicateElement) {
    auto pv = store.lookup(p.predicate_key);
    out = std::copy(pv.begin(), pv.end(), out);
  }
  auto ev = store.lookup(p.element_key);
  std::copy(ev.begin(), ev.end(), out);
}

}  // namespace

BaselineResult baseline_direct(std::span<const PredicateArgumentPair> train,
                               std::span<const PredicateArgumentPair> test,
                               const EmbeddingStore& store, const BaselineOptions& opt) {
  if (train.empty()) throw DataError("direct baseline needs a non-empty training set");
  std::vector<std::string> classes;
  for (const auto& p : train) classes.push_back(p.role_name);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw DataError("direct baseline needs at least two roles in training");
  auto class_of = [&](const std::string& role) -> std::int64_t {
    auto it = std::lower_bound(classes.begin(), classes.end(), role);
    return it != classes.end() && *it == role ? it - classes.begin() : -1;
  };

  const std::size_t width =
      (opt.features == BaselineFeatures::kPredicateElement ? 2 : 1) * std::size_t{store.dim()};
  NetworkConfig cfg;
  cfg.input_dim = static_cast<std::uint32_t>(width);
  cfg.n_blocks = opt.n_blocks;
  cfg.dropout_rate = opt.dropout_rate;
  cfg.output_dim = static_cast<std::uint32_t>(classes.size());
  cfg.seed = derive_seed(opt.train.seed, "baseline");
  auto ck = fresh_checkpoint(cfg, opt.train.adam);

  std::vector<float> x_train(train.size() * width);
  std::vector<std::uint32_t> y_train(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    fill_features(store, train[i], opt.features, x_train.data() + i * width);
    y_train[i] = static_cast<std::uint32_t>(class_of(train[i].role_name));
  }

  const std::size_t bs = std::max<std::uint32_t>(1, opt.train.batch_size);
  std::vector<std::size_t> order(train.size());
  std::vector<float> xb;
  std::vector<std::uint32_t> yb;
  for (std::uint32_t epoch = 0; epoch < opt.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const std::uint64_t epoch_seed = derive_seed(cfg.seed, epoch);
    Rng(epoch_seed).shuffle(order);
    for (std::size_t b = 0, start = 0; start < order.size(); ++b, start += bs) {
      const std::size_t rows = std::min(bs, order.size() - start);
      xb.resize(rows * width);
      yb.resize(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t i = order[start + r];
        std::copy_n(x_train.data() + i * width, width, xb.data() + r * width);
        yb[r] = y_train[i];
      }
      auto lg = loss_and_grad<float>(ck.params, cfg, xb, rows, yb, true, derive_seed(epoch_seed, b));
      adam_step(ck.params, ck.optimizer, lg.grads, ck.adam);
    }
  }

  BaselineResult res;
  res.n_classes = classes.size();
  res.n_train = train.size();
  res.n_test = test.size();
  std::size_t correct = 0;
  std::vector<float> x(width);
  for (const auto& p : test) {
    fill_features(store, p, opt.features, x.data());
    auto pass = forward(ck, x, 1);
    const auto pred = argmax_rows<float>(pass.scores, 1, classes.size());
    res.predicted.push_back(classes[pred[0]]);
    correct += res.predicted.back() == p.role_name;
  }
  res.accuracy = test.empty() ? 0.0 : static_cast<double>(correct) / test.size();
  return res;
}

// ---------------------------------------------------------------------------

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%6.2f", 100.0 * v);
  return buf;
}

// Six decimals keep reports stable against last-bit summation noise.
double r6(double v) { return std::round(v * 1e6) / 1e6; }

nlohmann::ordered_json class_json(const ClassMetrics& m) {
  return {{"precision", r6(m.precision)}, {"recall", r6(m.recall)}, {"f1", r6(m.f1)}, {"support", m.support}};
}

nlohmann::ordered_json subgroup_json(const SubgroupReport& g) {
  return {{"count", g.count}, {"distinct_frames", g.distinct_frames},
          {"accuracy", g.count ? nlohmann::ordered_json(r6(g.accuracy)) : nullptr},
          {"delta", g.count ? nlohmann::ordered_json(r6(g.delta)) : nullptr}};
}

}  // namespace

std::string format_binary_report(const BinaryMetrics& m) {
  std::string s;
  s += "Binary analogy classification (" + std::to_string(m.total) + " instances, %)\n";
  s += "             0 (negative)  1 (positive)\n";
  s += "Precision    " + pct(m.negative.precision) + "        " + pct(m.positive.precision) + "\n";
  s += "Recall       " + pct(m.negative.recall) + "        " + pct(m.positive.recall) + "\n";
  s += "F1 score     " + pct(m.negative.f1) + "        " + pct(m.positive.f1) + "\n";
  s += "Support      " + std::to_string(m.negative.support) + " / " + std::to_string(m.positive.support) + "\n";
  s += "Accuracy     " + pct(m.accuracy) + "\n";
  return s;
}

std::string binary_report_json(const BinaryMetrics& m) {
  nlohmann::ordered_json j;
  j["total"] = m.total;
  j["accuracy"] = r6(m.accuracy);
  j["negative"] = class_json(m.negative);
  j["positive"] = class_json(m.positive);
  return j.dump(2) + "\n";
}

std::string format_src_report(const SrcMetrics& m, const NotrReport& n) {
  std::string s;
  s += "Semantic role classification on gold spans (" + std::to_string(m.total) + " targets, %)\n";
  s += "Precision (weighted) " + pct(m.precision) + "\n";
  s += "Recall (weighted)    " + pct(m.recall) + "\n";
  s += "F1 (weighted)        " + pct(m.f1) + "\n";
  s += "Accuracy             " + pct(m.accuracy) + "\n";
  s += "Unclassifiable       " + std::to_string(n.unclassifiable) + "\n";
  auto group = [&](const char* name, const SubgroupReport& g) {
    s += name;
    if (g.count == 0) {
      s += ": none\n";
      return;
    }
    s += ": " + std::to_string(g.count) + " targets in " + std::to_string(g.distinct_frames) +
         " of " + std::to_string(n.distinct_frames) + " frames, accuracy " + pct(g.accuracy) +
         ", delta " + pct(g.delta) + "\n";
  };
  group("Frame absent from reference split", n.unseen_frame);
  group("Role absent from reference split ", n.unseen_role);
  return s;
}

std::string src_report_json(const SrcMetrics& m, const NotrReport& n) {
  nlohmann::ordered_json j;
  j["total"] = m.total;
  j["accuracy"] = r6(m.accuracy);
  j["precision_weighted"] = r6(m.precision);
  j["recall_weighted"] = r6(m.recall);
  j["f1_weighted"] = r6(m.f1);
  j["unclassifiable"] = n.unclassifiable;
  j["notr"] = {{"distinct_frames", n.distinct_frames},
               {"unseen_frame", subgroup_json(n.unseen_frame)},
               {"unseen_role", subgroup_json(n.unseen_role)}};
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& [role, cm] : m.per_class) per[role] = class_json(cm);
  j["per_class"] = std::move(per);
  return j.dump(2) + "\n";
}

}  // namespace analogy
