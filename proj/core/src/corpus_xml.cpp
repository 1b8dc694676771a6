// FrameNet fulltext XML ingestion.
//
// Relevant structure of a release file:
//
//   <fullTextAnnotation>
//     <header><corpus name="ANC"><document name="110CYL067"/></corpus></header>
//     <sentence ID="..." docID="...">
//       <text>...</text>
//       <annotationSet frameName="..." luName="..." ID="...">
//         <layer name="Target" rank="1"><label start="5" end="12" name="Target"/></layer>
//         <layer name="FE" rank="1">
//           <label start="0" end="3" name="Speaker"/>
//           <label itype="DNI" name="Interlocutor"/>
//         </layer>
//         ... (GF, PT, Other, Sent, Verb layers are ignored)
//       </annotationSet>
//     </sentence>
//   </fullTextAnnotation>
//
// Label offsets in the release are character offsets with an inclusive end.

#include <expat.h>

#include <algorithm>
#include <charconv>
#include <cstring>
#include <future>
#include <memory>
#include <optional>
#include <type_traits>
#include <string>
#include <vector>

#include "analogy/binary_io.hpp"
#include "analogy/corpus.hpp"
#include "analogy/error.hpp"
#include "analogy/utf8.hpp"

namespace analogy {
namespace {

struct RawLabel {
  std::string layer;
  int rank = 1;
  std::string name;
  std::optional<std::string> start;
  std::optional<std::string> end;
  std::optional<std::string> itype;
};

struct RawAnnotationSet {
  std::optional<std::string> frame_name;
  std::string lu_name;
  std::vector<RawLabel> labels;
};

struct RawSentence {
  std::string id;
  std::string doc_attr;
  std::string text;
  std::vector<RawAnnotationSet> sets;
};

const char* find_attr(const XML_Char** attrs, const char* name) {
  for (int i = 0; attrs[i] != nullptr; i += 2) {
    if (std::strcmp(attrs[i], name) == 0) return attrs[i + 1];
  }
  return nullptr;
}

// Strips an optional namespace prefix ("fn:label" -> "label").
std::string_view local_name(const XML_Char* name) {
  std::string_view n(name);
  auto colon = n.rfind(':');
  return colon == std::string_view::npos ? n : n.substr(colon + 1);
}

bool parse_offset(const std::optional<std::string>& s, std::size_t& out) {
  if (!s) return false;
  const char* b = s->data();
  const char* e = b + s->size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

class FulltextHandler {
 public:
  void start(std::string_view name, const XML_Char** attrs) {
    if (name == "corpus" && in_header_) {
      if (auto v = find_attr(attrs, "name")) corpus_name_ = v;
    } else if (name == "document" && in_header_) {
      if (auto v = find_attr(attrs, "name")) document_name_ = v;
    } else if (name == "header") {
      in_header_ = true;
    } else if (name == "sentence") {
      cur_ = RawSentence{};
      if (auto v = find_attr(attrs, "ID")) cur_->id = v;
      if (auto v = find_attr(attrs, "docID")) cur_->doc_attr = v;
    } else if (name == "text" && cur_ && !in_set_) {
      in_text_ = true;
    } else if (name == "annotationSet" && cur_) {
      in_set_ = true;
      RawAnnotationSet set;
      if (auto v = find_attr(attrs, "frameName")) set.frame_name = v;
      if (auto v = find_attr(attrs, "luName")) set.lu_name = v;
      cur_->sets.push_back(std::move(set));
    } else if (name == "layer" && in_set_) {
      layer_name_ = find_attr(attrs, "name") ? find_attr(attrs, "name") : "";
      layer_rank_ = 1;
      if (auto v = find_attr(attrs, "rank")) layer_rank_ = std::atoi(v);
    } else if (name == "label" && in_set_) {
      RawLabel l;
      l.layer = layer_name_;
      l.rank = layer_rank_;
      if (auto v = find_attr(attrs, "name")) l.name = v;
      if (auto v = find_attr(attrs, "start")) l.start = v;
      if (auto v = find_attr(attrs, "end")) l.end = v;
      if (auto v = find_attr(attrs, "itype")) l.itype = v;
      cur_->sets.back().labels.push_back(std::move(l));
    }
  }

  void end(std::string_view name) {
    if (name == "header") {
      in_header_ = false;
    } else if (name == "text") {
      in_text_ = false;
    } else if (name == "annotationSet") {
      in_set_ = false;
    } else if (name == "sentence" && cur_) {
      raw_.push_back(std::move(*cur_));
      cur_.reset();
    }
  }

  void chars(std::string_view data) {
    if (in_text_ && cur_) cur_->text.append(data);
  }

  ParsedDocument finish(std::string_view fallback_doc_id) {
    ParsedDocument doc;
    if (!corpus_name_.empty() && !document_name_.empty()) {
      doc.doc_id = corpus_name_ + "__" + document_name_;
    } else {
      doc.doc_id = std::string(fallback_doc_id);
    }
    for (std::size_t i = 0; i < raw_.size(); ++i) {
      RawSentence& raw = raw_[i];
      std::string doc_id = doc.doc_id.empty() ? raw.doc_attr : doc.doc_id;
      if (doc_id.empty()) throw DataError("cannot determine a document id for the fulltext document");
      if (doc.doc_id.empty()) doc.doc_id = doc_id;
      std::string sentence_id = raw.id.empty() ? doc_id + "#" + std::to_string(i) : raw.id;
      std::string reason;
      auto sentence = convert(raw, doc_id, sentence_id, doc, reason);
      if (sentence) {
        doc.sentences.push_back(std::move(*sentence));
      } else {
        doc.rejected.push_back({sentence_id, reason});
      }
    }
    return doc;
  }

 private:
  // Returns nullopt (and fills `reason`) when a label offset is inconsistent.
  static std::optional<Sentence> convert(const RawSentence& raw, const std::string& doc_id,
                                         const std::string& sentence_id, ParsedDocument& doc,
                                         std::string& reason) {
    Sentence s;
    s.sentence_id = sentence_id;
    s.doc_id = doc_id;
    s.text = raw.text;
    const std::size_t len = utf8::length(s.text);

    // Resolves an inclusive-end label to [start, end); false on bad offsets.
    auto label_extent = [&](const RawLabel& l, std::size_t& b, std::size_t& e) {
      std::size_t last = 0;
      if (!parse_offset(l.start, b) || !parse_offset(l.end, last) || last < b || last >= len) {
        reason = "label '" + l.name + "' in layer " + l.layer + " has offsets [" +
                 l.start.value_or("?") + "," + l.end.value_or("?") +
                 "] outside a sentence of length " + std::to_string(len);
        return false;
      }
      e = last + 1;
      return true;
    };

    for (const auto& set : raw.sets) {
      if (!set.frame_name) continue;
      FrameAnnotation ann;
      ann.frame_name = *set.frame_name;
      ann.lexical_unit = set.lu_name;

      std::optional<std::pair<std::size_t, std::size_t>> target;
      struct ElementAcc {
        std::string role;
        std::optional<std::pair<std::size_t, std::size_t>> extent;
        std::size_t pieces = 0;
        std::optional<NullInstantiation> ni;
      };
      std::vector<ElementAcc> elements;

      for (const auto& l : set.labels) {
        if (l.layer == "Target") {
          std::size_t b, e;
          if (!label_extent(l, b, e)) return std::nullopt;
          target = target ? std::pair{std::min(target->first, b), std::max(target->second, e)}
                          : std::pair{b, e};
        } else if (l.layer == "FE" && l.rank == 1) {
          auto it = std::find_if(elements.begin(), elements.end(),
                                 [&](const ElementAcc& a) { return a.role == l.name; });
          if (it == elements.end()) {
            elements.push_back({l.name, std::nullopt, 0, std::nullopt});
            it = std::prev(elements.end());
          }
          if (l.itype) {
            if (auto ni = parse_null_instantiation(*l.itype)) {
              it->ni = *ni;
            } else {
              ++doc.skipped_incorporated;
            }
            continue;
          }
          std::size_t b, e;
          if (!label_extent(l, b, e)) return std::nullopt;
          it->extent = it->extent ? std::pair{std::min(it->extent->first, b),
                                              std::max(it->extent->second, e)}
                                  : std::pair{b, e};
          ++it->pieces;
        }
      }

      if (!target) {
        ++doc.skipped_annotation_sets;
        continue;
      }
      ann.trigger = make_span(s.text, target->first, target->second);
      for (const auto& acc : elements) {
        FrameElementAnn fe;
        fe.role_name = acc.role;
        if (acc.extent) {
          fe.span = make_span(s.text, acc.extent->first, acc.extent->second);
          fe.discontinuous = acc.pieces > 1;
        } else if (acc.ni) {
          fe.null_instantiation = acc.ni;
        } else {
          continue;  // only INC labels for this role
        }
        ann.elements.push_back(std::move(fe));
      }
      s.annotations.push_back(std::move(ann));
    }
    return s;
  }

  bool in_header_ = false;
  bool in_text_ = false;
  bool in_set_ = false;
  std::string corpus_name_;
  std::string document_name_;
  std::string layer_name_;
  int layer_rank_ = 1;
  std::optional<RawSentence> cur_;
  std::vector<RawSentence> raw_;
};

void XMLCALL on_start(void* ud, const XML_Char* name, const XML_Char** attrs) {
  static_cast<FulltextHandler*>(ud)->start(local_name(name), attrs);
}
void XMLCALL on_end(void* ud, const XML_Char* name) {
  static_cast<FulltextHandler*>(ud)->end(local_name(name));
}
void XMLCALL on_chars(void* ud, const XML_Char* s, int len) {
  static_cast<FulltextHandler*>(ud)->chars(std::string_view(s, static_cast<std::size_t>(len)));
}

struct ParserDeleter {
  void operator()(XML_Parser p) const { XML_ParserFree(p); }
};

}  // namespace

ParsedDocument parse_fulltext_doc(std::string_view xml_bytes, std::string_view fallback_doc_id) {
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, ParserDeleter> parser(
      XML_ParserCreate("UTF-8"));
  if (!parser) throw Error("cannot allocate XML parser");
  FulltextHandler handler;
  XML_SetUserData(parser.get(), &handler);
  XML_SetElementHandler(parser.get(), on_start, on_end);
  XML_SetCharacterDataHandler(parser.get(), on_chars);
  if (XML_Parse(parser.get(), xml_bytes.data(), static_cast<int>(xml_bytes.size()), XML_TRUE) ==
      XML_STATUS_ERROR) {
    const auto offset = XML_GetCurrentByteIndex(parser.get());
    throw ParseError(std::string("malformed XML: ") + XML_ErrorString(XML_GetErrorCode(parser.get())),
                     offset < 0 ? 0 : static_cast<std::size_t>(offset));
  }
  return handler.finish(fallback_doc_id);
}

ParsedRelease parse_fulltext_path(const std::filesystem::path& path, unsigned threads) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".xml") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path)) {
    files.push_back(path);
  } else {
    throw DataError("fulltext input '" + path.string() + "' does not exist");
  }

  auto parse_one = [](const fs::path& file) {
    try {
      return parse_fulltext_doc(read_file_bytes(file), file.stem().string());
    } catch (const ParseError& e) {
      throw ParseError(file.string() + ": " + e.what(), e.byte_offset());
    }
  };

  std::vector<ParsedDocument> docs(files.size());
  threads = std::max(1u, threads);
  for (std::size_t base = 0; base < files.size(); base += threads) {
    std::vector<std::future<ParsedDocument>> batch;
    const std::size_t end = std::min(files.size(), base + threads);
    for (std::size_t i = base; i < end; ++i) {
      batch.push_back(std::async(threads == 1 ? std::launch::deferred : std::launch::async,
                                 parse_one, files[i]));
    }
    for (std::size_t i = base; i < end; ++i) docs[i] = batch[i - base].get();
  }

  ParsedRelease out;
  out.n_documents = docs.size();
  for (auto& d : docs) {
    for (auto& s : d.sentences) out.sentences.push_back(std::move(s));
    for (auto& r : d.rejected) out.rejected.push_back(std::move(r));
    out.skipped_annotation_sets += d.skipped_annotation_sets;
    out.skipped_incorporated += d.skipped_incorporated;
  }
  return out;
}

}  // namespace analogy
