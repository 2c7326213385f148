#ifndef DEID_CORPUS_HPP
#define DEID_CORPUS_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deid/error.hpp"
#include "deid/unicode.hpp"

// Data model for documents, character-span annotations, tokens and IOB2
// tag sequences. All offsets count Unicode scalar values. Every type here
// is immutable after construction and safe to share across workers.

namespace deid {

// The eleven PID classes, in report order.
enum class Label {
  Date,
  Num,
  Per,
  Gender,
  Org,
  Mail,
  Loc,
  JobTitle,
  Code,
  Title,
  Website,
};

inline constexpr std::size_t label_count = 11;

inline constexpr std::array<Label, label_count> all_labels = {
    Label::Date, Label::Num,  Label::Per,      Label::Gender,
    Label::Org,  Label::Mail, Label::Loc,      Label::JobTitle,
    Label::Code, Label::Title, Label::Website,
};

inline std::string to_string(Label label) {
  switch (label) {
    case Label::Date:     return "DATE";
    case Label::Num:      return "NUM";
    case Label::Per:      return "PER";
    case Label::Gender:   return "GENDER";
    case Label::Org:      return "ORG";
    case Label::Mail:     return "MAIL";
    case Label::Loc:      return "LOC";
    case Label::JobTitle: return "JOBTITLE";
    case Label::Code:     return "CODE";
    case Label::Title:    return "TITLE";
    case Label::Website:  return "WEBSITE";
  }
  return "";
}

inline std::optional<Label> label_from_string(std::string_view s) {
  for (Label l : all_labels)
    if (to_string(l) == s) return l;
  return std::nullopt;
}

struct Document {
  std::string id;    // unique within a corpus, non-empty
  std::string text;  // UTF-8; may be empty

  friend bool operator==(const Document&, const Document&) = default;
};

// Standoff annotation over a document, [start, end) in code points.
struct Annotation {
  std::string doc_id;
  std::size_t start = 0;
  std::size_t end = 0;
  Label label = Label::Per;
  std::string surface;  // equals text[start..end]

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Token {
  std::string surface;
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

struct IOB2Tag {
  enum class Kind { O, B, I };
  Kind kind = Kind::O;
  Label label = Label::Per;  // meaningful only when kind != O

  static IOB2Tag o() { return {}; }
  static IOB2Tag b(Label l) { return {Kind::B, l}; }
  static IOB2Tag i(Label l) { return {Kind::I, l}; }
  bool is_o() const { return kind == Kind::O; }

  friend bool operator==(const IOB2Tag& a, const IOB2Tag& b) {
    if (a.kind != b.kind) return false;
    return a.kind == Kind::O || a.label == b.label;
  }
};

inline std::string to_string(const IOB2Tag& tag) {
  switch (tag.kind) {
    case IOB2Tag::Kind::O: return "O";
    case IOB2Tag::Kind::B: return "B-" + std::string(to_string(tag.label));
    case IOB2Tag::Kind::I: return "I-" + std::string(to_string(tag.label));
  }
  return "O";
}

inline std::optional<IOB2Tag> tag_from_string(std::string_view s) {
  if (s == "O") return IOB2Tag::o();
  if (s.size() < 3 || s[1] != '-') return std::nullopt;
  auto label = label_from_string(s.substr(2));
  if (!label) return std::nullopt;
  if (s[0] == 'B') return IOB2Tag::b(*label);
  if (s[0] == 'I') return IOB2Tag::i(*label);
  return std::nullopt;
}

struct TaggedToken {
  Token token;
  IOB2Tag tag;

  friend bool operator==(const TaggedToken&, const TaggedToken&) = default;
};

// Verifies the I-follows-B/I rule; returns the index of the first orphan
// I tag, or nullopt if the sequence is valid.
inline std::optional<std::size_t> find_orphan_i(const std::vector<TaggedToken>& tagged) {
  for (std::size_t i = 0; i < tagged.size(); ++i) {
    if (tagged[i].tag.kind != IOB2Tag::Kind::I) continue;
    if (i == 0) return i;
    const IOB2Tag& prev = tagged[i - 1].tag;
    if (prev.is_o() || prev.label != tagged[i].tag.label) return i;
  }
  return std::nullopt;
}

inline bool ranges_intersect(std::size_t a_start, std::size_t a_end,
                             std::size_t b_start, std::size_t b_end) {
  return a_start < b_end && b_start < a_end;
}

inline std::size_t overlap_length(std::size_t a_start, std::size_t a_end,
                                  std::size_t b_start, std::size_t b_end) {
  const std::size_t lo = a_start > b_start ? a_start : b_start;
  const std::size_t hi = a_end < b_end ? a_end : b_end;
  return hi > lo ? hi - lo : 0;
}

// Rejects overlapping annotations; the evaluation semantics assume one
// gold label per span. `what` names the span kind in the error message.
inline void require_non_overlapping(const std::vector<Annotation>& annotations,
                                    const std::string& what = "annotation") {
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    for (std::size_t j = i + 1; j < annotations.size(); ++j) {
      const Annotation& a = annotations[i];
      const Annotation& b = annotations[j];
      if (a.doc_id == b.doc_id && ranges_intersect(a.start, a.end, b.start, b.end)) {
        throw Error("overlapping " + what + "s in document '" + a.doc_id + "': [" +
                    std::to_string(a.start) + "," + std::to_string(a.end) + ") " +
                    std::string(to_string(a.label)) + " vs [" + std::to_string(b.start) +
                    "," + std::to_string(b.end) + ") " + std::string(to_string(b.label)));
      }
    }
  }
}

// Projects character-span annotations onto tokens. A token overlaps an
// annotation iff their ranges intersect; the first token of each
// annotation gets B, later ones I. A token touched by two annotations is
// claimed by the one with the larger intersection (earlier start on ties),
// and the loser restarts with B on its next token so the output always
// satisfies the IOB2 invariant.
inline std::vector<TaggedToken> annotations_to_iob2(const Document& doc,
                                                    const std::vector<Annotation>& annotations,
                                                    const std::vector<Token>& tokens) {
  require_non_overlapping(annotations);
  std::vector<TaggedToken> out;
  out.reserve(tokens.size());
  const Annotation* prev_owner = nullptr;
  for (const Token& tok : tokens) {
    const Annotation* owner = nullptr;
    std::size_t best = 0;
    for (const Annotation& ann : annotations) {
      if (ann.doc_id != doc.id) continue;
      const std::size_t ov = overlap_length(ann.start, ann.end, tok.start, tok.end);
      if (ov == 0) continue;
      if (ov > best || (ov == best && owner && ann.start < owner->start)) {
        best = ov;
        owner = &ann;
      }
    }
    IOB2Tag tag = IOB2Tag::o();
    if (owner) {
      tag = (owner == prev_owner) ? IOB2Tag::i(owner->label) : IOB2Tag::b(owner->label);
    }
    out.push_back({tok, tag});
    prev_owner = owner;
  }
  return out;
}

enum class Iob2Policy { Strict, Repair };

// Extracts maximal B,I...I runs as annotations. Surfaces are sliced from
// the document text, so spans always satisfy surface == text[start..end].
// In strict mode an orphan I tag is an error; repair promotes it to B.
inline std::vector<Annotation> iob2_to_spans(const Document& doc,
                                             const std::vector<TaggedToken>& tagged,
                                             Iob2Policy policy = Iob2Policy::Strict) {
  std::vector<Annotation> out;
  const std::u32string text32 = unicode::decode_utf8(doc.text);
  std::optional<std::size_t> open_start;
  Label open_label = Label::Per;
  std::size_t open_end = 0;

  auto close = [&]() {
    if (!open_start) return;
    Annotation ann;
    ann.doc_id = doc.id;
    ann.start = *open_start;
    ann.end = open_end;
    ann.label = open_label;
    ann.surface = unicode::encode_utf8(
        std::u32string_view(text32).substr(ann.start, ann.end - ann.start));
    out.push_back(std::move(ann));
    open_start.reset();
  };

  for (std::size_t i = 0; i < tagged.size(); ++i) {
    const TaggedToken& tt = tagged[i];
    switch (tt.tag.kind) {
      case IOB2Tag::Kind::O:
        close();
        break;
      case IOB2Tag::Kind::B:
        close();
        open_start = tt.token.start;
        open_label = tt.tag.label;
        open_end = tt.token.end;
        break;
      case IOB2Tag::Kind::I:
        if (open_start && open_label == tt.tag.label) {
          open_end = tt.token.end;
        } else if (policy == Iob2Policy::Strict) {
          throw Error("orphan I-" + std::string(to_string(tt.tag.label)) +
                      " tag at token index " + std::to_string(i) + " in document '" +
                      doc.id + "'");
        } else {
          close();
          open_start = tt.token.start;
          open_label = tt.tag.label;
          open_end = tt.token.end;
        }
        break;
    }
  }
  close();
  return out;
}

}  // namespace deid

#endif  // DEID_CORPUS_HPP
