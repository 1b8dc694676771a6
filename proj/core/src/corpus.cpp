#include "analogy/corpus.hpp"

#include <map>
#include <set>
#include <unordered_map>

#include "analogy/binary_io.hpp"
#include "analogy/error.hpp"
#include "analogy/utf8.hpp"
#include "json.hpp"

namespace analogy {

std::string_view to_string(NullInstantiation ni) {
  switch (ni) {
    case NullInstantiation::kDNI: return "DNI";
    case NullInstantiation::kINI: return "INI";
    case NullInstantiation::kCNI: return "CNI";
  }
  return "?";
}

std::optional<NullInstantiation> parse_null_instantiation(std::string_view s) {
  if (s == "DNI") return NullInstantiation::kDNI;
  if (s == "INI") return NullInstantiation::kINI;
  if (s == "CNI") return NullInstantiation::kCNI;
  return std::nullopt;
}

Span make_span(std::string_view sentence_text, std::size_t start, std::size_t end) {
  const std::size_t len = utf8::length(sentence_text);
  if (!(start < end && end <= len)) {
    throw DataError("span [" + std::to_string(start) + "," + std::to_string(end) +
                    ") does not fit a sentence of length " + std::to_string(len));
  }
  return Span{start, end, utf8::substr(sentence_text, start, end)};
}

namespace {

void check_span(const Sentence& s, const Span& span, std::size_t len, const char* what) {
  if (!(span.start < span.end && span.end <= len)) {
    throw DataError("sentence " + s.sentence_id + ": " + what + " span [" +
                    std::to_string(span.start) + "," + std::to_string(span.end) +
                    ") out of range");
  }
  if (utf8::substr(s.text, span.start, span.end) != span.text) {
    throw DataError("sentence " + s.sentence_id + ": " + what +
                    " span text does not match the sentence");
  }
}

}  // namespace

void validate_sentence(const Sentence& s) {
  if (s.sentence_id.empty()) throw DataError("sentence with empty sentence_id");
  if (s.doc_id.empty()) throw DataError("sentence " + s.sentence_id + ": empty doc_id");
  const std::size_t len = utf8::length(s.text);
  for (const auto& ann : s.annotations) {
    if (ann.frame_name.empty()) {
      throw DataError("sentence " + s.sentence_id + ": annotation with empty frame name");
    }
    check_span(s, ann.trigger, len, "trigger");
    for (const auto& fe : ann.elements) {
      if (fe.role_name.empty()) {
        throw DataError("sentence " + s.sentence_id + ": element with empty role name");
      }
      if (fe.span.has_value() == fe.null_instantiation.has_value()) {
        throw DataError("sentence " + s.sentence_id + ": element " + fe.role_name +
                        " must have exactly one of span / null instantiation");
      }
      if (fe.span) check_span(s, *fe.span, len, "element");
    }
  }
}

// ---------------------------------------------------------------------------

SplitManifest load_manifest(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("manifest '" + path.string() + "': " + e.what(), e.byte);
  }
  if (!j.is_object()) throw SchemaError(1, "$", "manifest must be a JSON object");
  SplitManifest m;
  auto read_list = [&](const char* key, std::vector<std::string>& out) {
    if (!j.contains(key)) throw SchemaError(1, key, "missing document list");
    const auto& arr = j.at(key);
    if (!arr.is_array()) throw SchemaError(1, key, "expected an array of document ids");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_string()) {
        throw SchemaError(1, std::string(key) + "[" + std::to_string(i) + "]", "expected a string");
      }
      out.push_back(arr[i].get<std::string>());
    }
  };
  read_list("train", m.train_docs);
  read_list("dev", m.dev_docs);
  read_list("test", m.test_docs);
  if (j.contains("default")) {
    const auto& d = j.at("default");
    if (!d.is_string() || (d != "train" && d != "dev" && d != "test")) {
      throw SchemaError(1, "default", "must be one of \"train\", \"dev\", \"test\"");
    }
    m.default_split = d.get<std::string>();
  }
  return m;
}

void write_manifest(const SplitManifest& m, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["train"] = m.train_docs;
  j["dev"] = m.dev_docs;
  j["test"] = m.test_docs;
  if (m.default_split) j["default"] = *m.default_split;
  write_file_bytes(path, j.dump(2) + "\n");
}

SplitCorpora split_corpus(const Corpus& corpus, const SplitManifest& manifest) {
  enum Route { kTrain, kDev, kTest };
  std::unordered_map<std::string, Route> route;
  auto add = [&](const std::vector<std::string>& docs, Route r, const char* name) {
    for (const auto& d : docs) {
      auto [it, inserted] = route.emplace(d, r);
      if (!inserted && it->second != r) {
        throw DataError("manifest lists document '" + d + "' in more than one split (" + name + ")");
      }
    }
  };
  add(manifest.train_docs, kTrain, "train");
  add(manifest.dev_docs, kDev, "dev");
  add(manifest.test_docs, kTest, "test");

  std::optional<Route> fallback;
  if (manifest.default_split) {
    fallback = *manifest.default_split == "train" ? kTrain
               : *manifest.default_split == "dev" ? kDev
                                                  : kTest;
  }

  SplitCorpora out;
  for (const auto& s : corpus) {
    auto it = route.find(s.doc_id);
    Route r;
    if (it != route.end()) {
      r = it->second;
    } else if (fallback) {
      r = *fallback;
    } else {
      throw DataError("document '" + s.doc_id + "' is not listed in the split manifest");
    }
    (r == kTrain ? out.train : r == kDev ? out.dev : out.test).push_back(s);
  }
  return out;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats st;
  std::set<std::string_view> frames;
  std::set<std::string_view> docs;
  for (const auto& s : corpus) {
    ++st.n_sentences;
    if (!s.annotations.empty()) ++st.n_annotated_sentences;
    docs.insert(s.doc_id);
    for (const auto& ann : s.annotations) {
      ++st.n_annotations;
      frames.insert(ann.frame_name);
      for (const auto& fe : ann.elements) {
        if (fe.span) {
          ++st.n_spanned_elements;
        } else {
          ++st.n_null_elements;
        }
      }
    }
  }
  st.n_distinct_frames = frames.size();
  st.n_docs = docs.size();
  return st;
}

}  // namespace analogy
