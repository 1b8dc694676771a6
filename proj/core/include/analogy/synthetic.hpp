#pragma once

// Generator for the small synthetic corpus shipped under data/synthetic.
// Every (frame, role) owns a private lexicon, so the role of an element is
// recoverable from its surface text alone.

#include <cstdint>

#include "analogy/corpus.hpp"

namespace analogy {

struct SyntheticOptions {
  std::uint32_t n_frames = 5;
  std::uint32_t n_roles = 4;
  std::uint32_t n_docs = 10;
  std::uint32_t sentences_per_doc = 20;
  std::uint32_t words_per_role = 3;
  std::uint32_t lexical_units_per_frame = 3;
  // Probability that a sentence carries a second clause evoking another frame.
  double second_frame_rate = 0.15;
  // Probability that an annotation also lists a DNI element.
  double null_instantiation_rate = 0.1;
  std::uint64_t seed = 2024;
};

struct SyntheticCorpus {
  Corpus corpus;
  // First 70% of documents train, then 10% dev, the rest test.
  SplitManifest manifest;
};

SyntheticCorpus generate_synthetic_corpus(const SyntheticOptions& options = {});

}  // namespace analogy
