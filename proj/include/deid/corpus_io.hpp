#ifndef DEID_CORPUS_IO_HPP
#define DEID_CORPUS_IO_HPP

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "deid/corpus.hpp"
#include "deid/error.hpp"

// On-disk formats. All files are UTF-8 with \n line endings.
//
//   corpus      one record per line: <id><TAB><text>, newlines in the text
//               escaped as \n and backslashes as \\; `#` starts a comment
//   annotations TSV with header doc_id/start/end/label/surface; the surface
//               column uses the same escaping as corpus text
//   IOB2        CoNLL-2002 style: <surface><TAB><tag> per token, one blank
//               line terminates each document

namespace deid {

inline std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '\\') out += "\\\\";
    else if (c == '\n') out += "\\n";
    else if (c == '\t') out += "\\t";
    else out.push_back(c);
  }
  return out;
}

inline std::string unescape_field(std::string_view s, const std::string& file,
                                  std::size_t line) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out.push_back(s[i]);
      continue;
    }
    if (i + 1 >= s.size()) throw ParseError(file, line, "dangling backslash");
    ++i;
    switch (s[i]) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case '\\': out.push_back('\\'); break;
      default:
        throw ParseError(file, line, std::string("unknown escape \\") + s[i]);
    }
  }
  return out;
}

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t pos = 0;
  while (true) {
    std::size_t tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(pos));
      break;
    }
    cols.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return cols;
}

inline std::size_t parse_offset(std::string_view s, const std::string& file,
                                std::size_t line, const char* what) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(file, line, std::string("invalid ") + what + " '" + std::string(s) + "'");
  return value;
}

inline std::string chomp(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace detail

inline std::vector<Document> read_corpus(std::istream& in, const std::string& file = "<corpus>") {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = detail::chomp(std::move(raw));
    if (line.empty() || line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(file, lineno, "expected <id><TAB><text>");
    std::string id = line.substr(0, tab);
    if (id.empty()) throw ParseError(file, lineno, "empty document id");
    if (!seen.insert(id).second)
      throw ParseError(file, lineno, "duplicate document id '" + id + "'");
    std::string text = unescape_field(std::string_view(line).substr(tab + 1), file, lineno);
    unicode::decode_utf8(text);  // reject invalid UTF-8 at load time
    docs.push_back({std::move(id), std::move(text)});
  }
  if (in.bad()) throw Error("I/O error while reading " + file);
  return docs;
}

inline std::vector<Document> load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  return read_corpus(in, path);
}

inline void write_corpus(std::ostream& out, const std::vector<Document>& docs) {
  for (const Document& doc : docs)
    out << doc.id << '\t' << escape_field(doc.text) << '\n';
}

inline constexpr std::string_view annotation_header = "doc_id\tstart\tend\tlabel\tsurface";

// Parses an annotation file without validating against any document text.
// Used by the evaluator, which only sees offsets.
inline std::vector<Annotation> read_annotations(std::istream& in,
                                                const std::string& file = "<annotations>") {
  std::vector<Annotation> anns;
  std::string raw;
  std::size_t lineno = 0;
  bool saw_header = false;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = detail::chomp(std::move(raw));
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line != annotation_header)
        throw ParseError(file, lineno,
                         "expected header '" + std::string(annotation_header) + "'");
      saw_header = true;
      continue;
    }
    const auto cols = detail::split_tabs(line);
    if (cols.size() != 5)
      throw ParseError(file, lineno,
                       "expected 5 columns, found " + std::to_string(cols.size()));
    Annotation ann;
    ann.doc_id = std::string(cols[0]);
    ann.start = detail::parse_offset(cols[1], file, lineno, "start offset");
    ann.end = detail::parse_offset(cols[2], file, lineno, "end offset");
    const auto label = label_from_string(cols[3]);
    if (!label)
      throw ParseError(file, lineno, "unknown label '" + std::string(cols[3]) + "'");
    ann.label = *label;
    ann.surface = unescape_field(cols[4], file, lineno);
    if (ann.start >= ann.end)
      throw ParseError(file, lineno, "empty span [" + std::to_string(ann.start) + "," +
                                         std::to_string(ann.end) + ")");
    anns.push_back(std::move(ann));
  }
  if (in.bad()) throw Error("I/O error while reading " + file);
  if (!saw_header && anns.empty() && lineno == 0) return anns;  // empty file: no annotations
  if (!saw_header) throw ParseError(file, lineno, "missing header line");
  return anns;
}

// Loads annotations and validates each one against its document: the id
// must exist, offsets must lie inside the text and the surface column must
// equal the text slice.
inline std::vector<Annotation> load_annotations(const std::string& path,
                                                const std::vector<Document>& corpus) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open annotation file '" + path + "'");
  std::vector<Annotation> anns = read_annotations(in, path);

  std::unordered_map<std::string, std::u32string> texts;
  for (const Document& doc : corpus) texts.emplace(doc.id, unicode::decode_utf8(doc.text));

  for (const Annotation& ann : anns) {
    auto it = texts.find(ann.doc_id);
    if (it == texts.end())
      throw Error(path + ": annotation references unknown document '" + ann.doc_id + "'");
    const std::u32string& text = it->second;
    if (ann.end > text.size())
      throw Error(path + ": span [" + std::to_string(ann.start) + "," +
                  std::to_string(ann.end) + ") exceeds length " +
                  std::to_string(text.size()) + " of document '" + ann.doc_id + "'");
    const std::string slice = unicode::encode_utf8(
        std::u32string_view(text).substr(ann.start, ann.end - ann.start));
    if (slice != ann.surface)
      throw Error(path + ": surface mismatch in document '" + ann.doc_id + "' at [" +
                  std::to_string(ann.start) + "," + std::to_string(ann.end) +
                  "): expected '" + slice + "', found '" + ann.surface + "'");
  }
  return anns;
}

inline void write_annotations(std::ostream& out, const std::vector<Annotation>& anns) {
  out << annotation_header << '\n';
  for (const Annotation& ann : anns) {
    out << ann.doc_id << '\t' << ann.start << '\t' << ann.end << '\t'
        << to_string(ann.label) << '\t' << escape_field(ann.surface) << '\n';
  }
}

// IOB2 serialization. Offsets are not stored; read_iob2 lays tokens out
// with single spaces between them, so offsets survive a round trip only
// up to that convention (surfaces and tags survive exactly).
inline void write_iob2(std::ostream& out, const std::vector<std::vector<TaggedToken>>& docs) {
  for (const auto& doc : docs) {
    for (const TaggedToken& tt : doc)
      out << tt.token.surface << '\t' << to_string(tt.tag) << '\n';
    out << '\n';
  }
}

inline std::vector<std::vector<TaggedToken>> read_iob2(std::istream& in,
                                                       const std::string& file = "<iob2>",
                                                       Iob2Policy policy = Iob2Policy::Strict) {
  std::vector<std::vector<TaggedToken>> docs;
  std::vector<TaggedToken> current;
  std::size_t offset = 0;
  bool any_line = false;
  std::string raw;
  std::size_t lineno = 0;

  auto flush = [&]() {
    docs.push_back(std::move(current));
    current.clear();
    offset = 0;
  };

  while (std::getline(in, raw)) {
    ++lineno;
    any_line = true;
    const std::string line = detail::chomp(std::move(raw));
    if (line.empty()) {
      flush();
      continue;
    }
    const auto cols = detail::split_tabs(line);
    if (cols.size() != 2)
      throw ParseError(file, lineno,
                       "expected <surface><TAB><tag>, found " + std::to_string(cols.size()) +
                           " columns");
    if (cols[0].empty()) throw ParseError(file, lineno, "empty token surface");
    auto tag = tag_from_string(cols[1]);
    if (!tag) throw ParseError(file, lineno, "malformed tag '" + std::string(cols[1]) + "'");
    if (tag->kind == IOB2Tag::Kind::I) {
      const bool orphan = current.empty() || current.back().tag.is_o() ||
                          current.back().tag.label != tag->label;
      if (orphan) {
        if (policy == Iob2Policy::Strict)
          throw ParseError(file, lineno,
                           "orphan I tag at token index " + std::to_string(current.size()));
        tag = IOB2Tag::b(tag->label);
      }
    }
    Token tok;
    tok.surface = std::string(cols[0]);
    tok.start = offset;
    tok.end = offset + unicode::length(tok.surface);
    offset = tok.end + 1;  // single-space layout
    current.push_back({std::move(tok), *tag});
  }
  if (in.bad()) throw Error("I/O error while reading " + file);
  if (!current.empty()) flush();  // final document without trailing blank line
  (void)any_line;
  return docs;
}

inline std::vector<std::vector<TaggedToken>> load_iob2(const std::string& path,
                                                       Iob2Policy policy = Iob2Policy::Strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open IOB2 file '" + path + "'");
  return read_iob2(in, path, policy);
}

}  // namespace deid

#endif  // DEID_CORPUS_IO_HPP
