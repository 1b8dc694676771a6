#pragma once

// Neutral in-memory model of FrameNet fulltext annotation, plus the JSONL
// interchange format and the document-level train/dev/test split.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace analogy {

// Character extent [start, end) inside a sentence. `text` caches the
// substring so downstream code never has to re-slice.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;

  bool operator==(const Span&) const = default;
};

enum class NullInstantiation { kDNI, kINI, kCNI };

std::string_view to_string(NullInstantiation ni);
std::optional<NullInstantiation> parse_null_instantiation(std::string_view s);

// Exactly one of `span` / `null_instantiation` is set.
struct FrameElementAnn {
  std::string role_name;
  std::optional<Span> span;
  std::optional<NullInstantiation> null_instantiation;
  // Set when the element was labeled in several pieces and merged into the
  // smallest covering span.
  bool discontinuous = false;

  bool operator==(const FrameElementAnn&) const = default;
};

struct FrameAnnotation {
  std::string frame_name;
  std::string lexical_unit;
  Span trigger;
  std::vector<FrameElementAnn> elements;

  bool operator==(const FrameAnnotation&) const = default;
};

struct Sentence {
  std::string sentence_id;
  std::string doc_id;
  std::string text;
  std::vector<FrameAnnotation> annotations;

  bool operator==(const Sentence&) const = default;
};

using Corpus = std::vector<Sentence>;

// Builds a span over `sentence_text`, validating the offsets.
// Throws DataError when the offsets do not fit.
Span make_span(std::string_view sentence_text, std::size_t start, std::size_t end);

// Checks every type invariant of a sentence; throws DataError naming the
// sentence on the first violation.
void validate_sentence(const Sentence& sentence);

// ---------------------------------------------------------------------------
// FrameNet fulltext XML

struct RejectedRecord {
  std::string sentence_id;
  std::string reason;
};

struct ParsedDocument {
  std::string doc_id;
  std::vector<Sentence> sentences;
  // Sentences dropped because their label offsets were inconsistent.
  std::vector<RejectedRecord> rejected;
  // Frame annotation sets without any Target label.
  std::size_t skipped_annotation_sets = 0;
  // INC (incorporated) element labels; they carry no span of their own.
  std::size_t skipped_incorporated = 0;
};

// Parses one fulltext annotation document. The document id is taken from the
// header as "<corpus>__<document>" (the release file naming), falling back to
// `fallback_doc_id` and then to the sentences' docID attribute.
// Malformed XML raises ParseError carrying the byte offset.
ParsedDocument parse_fulltext_doc(std::string_view xml_bytes,
                                  std::string_view fallback_doc_id = {});

struct ParsedRelease {
  Corpus sentences;
  std::vector<RejectedRecord> rejected;
  std::size_t n_documents = 0;
  std::size_t skipped_annotation_sets = 0;
  std::size_t skipped_incorporated = 0;
};

// Parses every *.xml file under `path` (or the single file `path`) in sorted
// file-name order. Documents are parsed on up to `threads` threads; the
// output order does not depend on the thread count.
ParsedRelease parse_fulltext_path(const std::filesystem::path& path, unsigned threads = 1);

// ---------------------------------------------------------------------------
// JSONL interchange

std::string to_jsonl_line(const Sentence& sentence);
// `line` is 1-based and only used for error messages.
Sentence parse_jsonl_line(std::string_view line_text, std::size_t line);

void write_jsonl(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_jsonl(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Splits

struct SplitManifest {
  std::vector<std::string> train_docs;
  std::vector<std::string> dev_docs;
  std::vector<std::string> test_docs;
  // When set ("train", "dev" or "test"), documents not listed anywhere are
  // routed there instead of raising an error.
  std::optional<std::string> default_split;
};

SplitManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const SplitManifest& manifest, const std::filesystem::path& path);

struct SplitCorpora {
  Corpus train;
  Corpus dev;
  Corpus test;
};

SplitCorpora split_corpus(const Corpus& corpus, const SplitManifest& manifest);

struct CorpusStats {
  std::size_t n_sentences = 0;
  std::size_t n_annotated_sentences = 0;
  std::size_t n_distinct_frames = 0;
  std::size_t n_docs = 0;
  std::size_t n_annotations = 0;
  std::size_t n_spanned_elements = 0;
  std::size_t n_null_elements = 0;

  bool operator==(const CorpusStats&) const = default;
};

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace analogy
