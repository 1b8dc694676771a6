#include "analogy/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "analogy/rng.hpp"
#include "analogy/utf8.hpp"

namespace analogy {

namespace {

struct FrameSpec {
  std::string name;
  std::vector<std::string> roles;
  std::vector<std::string> triggers;
  std::vector<std::vector<std::string>> lexicon;  // per role
};

const std::array<std::pair<const char*, std::array<const char*, 4>>, 5> kFrames = {{
    {"Commerce_buy", {"Buyer", "Goods", "Seller", "Place"}},
    {"Motion", {"Theme", "Source", "Goal", "Path"}},
    {"Ingestion", {"Ingestor", "Ingestibles", "Instrument", "Place"}},
    {"Placing", {"Agent", "Theme", "Goal", "Manner"}},
    {"Statement", {"Speaker", "Message", "Addressee", "Time"}},
}};

constexpr std::array<const char*, 20> kOnsets = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r",
                                                 "s", "t", "v", "z", "br", "kl", "tr", "st", "pl", "gr"};
constexpr std::array<const char*, 6> kVowels = {"a", "e", "i", "o", "u", "ai"};

class WordMaker {
 public:
  explicit WordMaker(std::uint64_t seed) : rng_(seed) {}

  std::string fresh(std::size_t syllables) {
    while (true) {
      std::string w;
      for (std::size_t s = 0; s < syllables; ++s) {
        w += kOnsets[rng_.below(kOnsets.size())];
        w += kVowels[rng_.below(kVowels.size())];
      }
      if (rng_.below(2)) w += "n";
      if (used_.insert(w).second) return w;
    }
  }

 private:
  Rng rng_;
  std::set<std::string> used_;
};

std::vector<FrameSpec> make_frames(const SyntheticOptions& opt, WordMaker& words) {
  std::vector<FrameSpec> frames;
  for (std::uint32_t f = 0; f < opt.n_frames; ++f) {
    FrameSpec spec;
    spec.name = f < kFrames.size() ? kFrames[f].first : "Frame_" + std::to_string(f);
    for (std::uint32_t r = 0; r < opt.n_roles; ++r) {
      spec.roles.push_back(f < kFrames.size() && r < 4 ? kFrames[f].second[r]
                                                       : "Role_" + std::to_string(r));
    }
    for (std::uint32_t k = 0; k < opt.lexical_units_per_frame; ++k) spec.triggers.push_back(words.fresh(2));
    spec.lexicon.resize(opt.n_roles);
    for (auto& lex : spec.lexicon) {
      for (std::uint32_t k = 0; k < opt.words_per_role; ++k) lex.push_back(words.fresh(3));
    }
    frames.push_back(std::move(spec));
  }
  return frames;
}

// Builds sentence text token by token while recording code point offsets.
class TextBuilder {
 public:
  Span add(const std::string& token) {
    if (!text_.empty()) {
      text_ += ' ';
      ++length_;
    }
    Span s{length_, length_ + utf8::length(token), token};
    text_ += token;
    length_ = s.end;
    return s;
  }

  std::string text() const { return text_ + " ."; }

 private:
  std::string text_;
  std::size_t length_ = 0;
};

void add_clause(const FrameSpec& frame, const SyntheticOptions& opt, Rng& rng, TextBuilder& tb,
                FrameAnnotation& ann) {
  ann.frame_name = frame.name;
  const std::string& trigger = frame.triggers[rng.below(frame.triggers.size())];
  ann.lexical_unit = trigger + ".v";

  const std::size_t n_elems = 2 + rng.below(2);
  auto roles = rng.sample_indices(frame.roles.size(), std::min<std::size_t>(n_elems, frame.roles.size()));
  static constexpr std::array<const char*, 4> kFillers = {"near", "with", "over", "then"};

  for (std::size_t k = 0; k < roles.size(); ++k) {
    if (k == 1) ann.trigger = tb.add(trigger);
    if (k >= 2) tb.add(kFillers[rng.below(kFillers.size())]);
    const auto& lex = frame.lexicon[roles[k]];
    FrameElementAnn fe;
    fe.role_name = frame.roles[roles[k]];
    fe.span = tb.add(lex[rng.below(lex.size())]);
    ann.elements.push_back(std::move(fe));
  }
  if (roles.size() < frame.roles.size() && rng.uniform() < opt.null_instantiation_rate) {
    for (std::size_t r = 0; r < frame.roles.size(); ++r) {
      if (std::find(roles.begin(), roles.end(), r) != roles.end()) continue;
      FrameElementAnn fe;
      fe.role_name = frame.roles[r];
      fe.null_instantiation = NullInstantiation::kDNI;
      ann.elements.push_back(std::move(fe));
      break;
    }
  }
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticOptions& opt) {
  WordMaker words(derive_seed(opt.seed, "lexicon"));
  const auto frames = make_frames(opt, words);
  Rng rng(derive_seed(opt.seed, "sentences"));

  SyntheticCorpus out;
  const std::uint32_t n_train = std::max<std::uint32_t>(1, opt.n_docs * 7 / 10);
  const std::uint32_t n_dev = std::max<std::uint32_t>(1, opt.n_docs / 10);
  std::size_t sentence_no = 0;
  for (std::uint32_t d = 0; d < opt.n_docs; ++d) {
    char doc_id[32];
    std::snprintf(doc_id, sizeof doc_id, "SYN__doc%02u", d);
    (d < n_train ? out.manifest.train_docs
                 : d < n_train + n_dev ? out.manifest.dev_docs : out.manifest.test_docs)
        .push_back(doc_id);
    for (std::uint32_t i = 0; i < opt.sentences_per_doc; ++i) {
      Sentence s;
      s.doc_id = doc_id;
      char sid[32];
      std::snprintf(sid, sizeof sid, "s%05zu", sentence_no++);
      s.sentence_id = sid;

      TextBuilder tb;
      // Frames cycle so that every split sees every frame.
      const std::size_t first = (d * opt.sentences_per_doc + i) % frames.size();
      FrameAnnotation a;
      add_clause(frames[first], opt, rng, tb, a);
      s.annotations.push_back(std::move(a));
      if (frames.size() > 1 && rng.uniform() < opt.second_frame_rate) {
        tb.add("and");
        const std::size_t second = (first + 1 + rng.below(frames.size() - 1)) % frames.size();
        FrameAnnotation b;
        add_clause(frames[second], opt, rng, tb, b);
        s.annotations.push_back(std::move(b));
      }
      s.text = tb.text();
      out.corpus.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace analogy
