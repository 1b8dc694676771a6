#include <fstream>
#include <string>

#include "analogy/corpus.hpp"
#include "analogy/error.hpp"
#include "analogy/utf8.hpp"
#include "json.hpp"

namespace analogy {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_jsonl_line(const Sentence& s) {
  ordered_json j;
  j["doc_id"] = s.doc_id;
  j["sentence_id"] = s.sentence_id;
  j["text"] = s.text;
  j["annotations"] = ordered_json::array();
  for (const auto& ann : s.annotations) {
    ordered_json a;
    a["frame"] = ann.frame_name;
    a["lexical_unit"] = ann.lexical_unit;
    a["trigger"] = {{"start", ann.trigger.start}, {"end", ann.trigger.end}};
    a["elements"] = ordered_json::array();
    for (const auto& fe : ann.elements) {
      ordered_json e;
      e["role"] = fe.role_name;
      if (fe.span) {
        e["start"] = fe.span->start;
        e["end"] = fe.span->end;
      }
      if (fe.null_instantiation) e["ni"] = std::string(to_string(*fe.null_instantiation));
      if (fe.discontinuous) e["discontinuous"] = true;
      a["elements"].push_back(std::move(e));
    }
    j["annotations"].push_back(std::move(a));
  }
  return j.dump();
}

namespace {

class FieldReader {
 public:
  explicit FieldReader(std::size_t line) : line_(line) {}

  const json& member(const json& obj, const std::string& path, const char* key) const {
    if (!obj.is_object()) throw SchemaError(line_, path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(line_, join(path, key), "missing field");
    return *it;
  }

  std::string str(const json& obj, const std::string& path, const char* key) const {
    const json& v = member(obj, path, key);
    if (!v.is_string()) throw SchemaError(line_, join(path, key), "expected a string");
    return v.get<std::string>();
  }

  std::size_t offset(const json& obj, const std::string& path, const char* key) const {
    const json& v = member(obj, path, key);
    if (!v.is_number_unsigned()) {
      throw SchemaError(line_, join(path, key), "expected a non-negative integer");
    }
    return v.get<std::size_t>();
  }

  const json& array(const json& obj, const std::string& path, const char* key) const {
    const json& v = member(obj, path, key);
    if (!v.is_array()) throw SchemaError(line_, join(path, key), "expected an array");
    return v;
  }

  static std::string join(const std::string& path, const char* key) { return path + "." + key; }
  static std::string index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
  }

  Span span(const std::string& text, const std::string& path, std::size_t b, std::size_t e) const {
    try {
      return make_span(text, b, e);
    } catch (const DataError& err) {
      throw SchemaError(line_, path, err.what());
    }
  }

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace

Sentence parse_jsonl_line(std::string_view line_text, std::size_t line) {
  json j;
  try {
    j = json::parse(line_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(line, "$", std::string("invalid JSON: ") + e.what());
  }
  FieldReader r(line);
  Sentence s;
  s.doc_id = r.str(j, "$", "doc_id");
  s.sentence_id = r.str(j, "$", "sentence_id");
  s.text = r.str(j, "$", "text");
  const json& anns = r.array(j, "$", "annotations");
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const std::string apath = FieldReader::index("$.annotations", i);
    const json& a = anns[i];
    FrameAnnotation ann;
    ann.frame_name = r.str(a, apath, "frame");
    ann.lexical_unit = r.str(a, apath, "lexical_unit");
    const json& trig = r.member(a, apath, "trigger");
    const std::string tpath = apath + ".trigger";
    ann.trigger = r.span(s.text, tpath, r.offset(trig, tpath, "start"), r.offset(trig, tpath, "end"));
    const json& els = r.array(a, apath, "elements");
    for (std::size_t k = 0; k < els.size(); ++k) {
      const std::string epath = FieldReader::index(apath + ".elements", k);
      const json& e = els[k];
      FrameElementAnn fe;
      fe.role_name = r.str(e, epath, "role");
      if (fe.role_name.empty()) throw SchemaError(line, epath + ".role", "empty role name");
      const bool has_start = e.contains("start");
      const bool has_ni = e.contains("ni");
      if (has_start == has_ni) {
        throw SchemaError(line, epath, "exactly one of start/end or ni must be present");
      }
      if (has_start) {
        fe.span = r.span(s.text, epath, r.offset(e, epath, "start"), r.offset(e, epath, "end"));
      } else {
        auto ni = parse_null_instantiation(r.str(e, epath, "ni"));
        if (!ni) throw SchemaError(line, epath + ".ni", "expected one of DNI, INI, CNI");
        fe.null_instantiation = *ni;
      }
      if (e.contains("discontinuous")) {
        if (!e["discontinuous"].is_boolean()) {
          throw SchemaError(line, epath + ".discontinuous", "expected a boolean");
        }
        fe.discontinuous = e["discontinuous"].get<bool>();
      }
      ann.elements.push_back(std::move(fe));
    }
    s.annotations.push_back(std::move(ann));
  }
  return s;
}

void write_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  for (const auto& s : corpus) {
    validate_sentence(s);
    out << to_jsonl_line(s) << '\n';
  }
  if (!out) throw DataError("I/O error while writing '" + path.string() + "'");
}

Corpus load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  Corpus corpus;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    corpus.push_back(parse_jsonl_line(line, n));
  }
  if (in.bad()) throw DataError("I/O error while reading '" + path.string() + "'");
  return corpus;
}

}  // namespace analogy
