#ifndef DEID_LEXICON_HPP
#define DEID_LEXICON_HPP

#include <algorithm>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "deid/error.hpp"
#include "deid/spans.hpp"
#include "deid/tokenizer.hpp"
#include "deid/unicode.hpp"

// Labeled gazetteers. Entries may span multiple tokens; matching is
// longest-first at each start token, consuming the matched region, and
// case-insensitive unless the lexicon says otherwise.
//
// Lexicon files hold one entry per line, UTF-8, `#` comments. A second
// tab-separated column may carry a per-entry category (the title list uses
// it to distinguish salutations from degrees); matching ignores it.

namespace deid {

struct LexiconEntry {
  std::string surface;               // as written in the file
  std::string category;              // optional metadata column
  std::vector<std::string> tokens;   // tokenized surface, folded unless case-sensitive
};

class Lexicon {
public:
  Lexicon() = default;

  Lexicon(Label label, std::vector<std::string> entries, bool case_sensitive = false)
      : label_(label), case_sensitive_(case_sensitive) {
    for (auto& e : entries) add(std::move(e), "");
  }

  Label label() const { return label_; }
  void set_label(Label label) { label_ = label; }
  bool case_sensitive() const { return case_sensitive_; }
  void set_case_sensitive(bool v) { case_sensitive_ = v; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<LexiconEntry>& entries() const { return entries_; }

  void add(std::string surface, std::string category = "") {
    LexiconEntry entry;
    entry.surface = std::move(surface);
    entry.category = std::move(category);
    for (const Token& t : tokenize(entry.surface))
      entry.tokens.push_back(case_sensitive_ ? t.surface : unicode::fold_utf8(t.surface));
    if (entry.tokens.empty())
      throw Error("lexicon entry '" + entry.surface + "' has no tokens");
    const std::string first = entry.tokens.front();
    entries_.push_back(std::move(entry));
    auto& bucket = index_[first];
    bucket.push_back(entries_.size() - 1);
    // keep buckets ordered longest entry first
    std::stable_sort(bucket.begin(), bucket.end(), [&](std::size_t a, std::size_t b) {
      return entries_[a].tokens.size() > entries_[b].tokens.size();
    });
  }

  // Longest entry whose token sequence matches at `pos`; returns the number
  // of document tokens consumed, or 0.
  std::size_t match_at(const std::vector<std::string>& folded, std::size_t pos) const {
    auto it = index_.find(folded[pos]);
    if (it == index_.end()) return 0;
    for (std::size_t idx : it->second) {
      const auto& entry_tokens = entries_[idx].tokens;
      if (pos + entry_tokens.size() > folded.size()) continue;
      bool ok = true;
      for (std::size_t k = 1; k < entry_tokens.size(); ++k) {
        if (entry_tokens[k] != folded[pos + k]) {
          ok = false;
          break;
        }
      }
      if (ok) return entry_tokens.size();
    }
    return 0;
  }

  // Folds document token surfaces the way this lexicon compares them.
  std::vector<std::string> fold_tokens(const std::vector<Token>& tokens) const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const Token& t : tokens)
      out.push_back(case_sensitive_ ? t.surface : unicode::fold_utf8(t.surface));
    return out;
  }

private:
  Label label_ = Label::Per;
  bool case_sensitive_ = false;
  std::vector<LexiconEntry> entries_;
  std::unordered_map<std::string, std::vector<std::size_t>> index_;
};

inline Lexicon read_lexicon(std::istream& in, Label label, bool case_sensitive = false,
                            const std::string& file = "<lexicon>") {
  Lexicon lex;
  lex.set_label(label);
  lex.set_case_sensitive(case_sensitive);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string entry = line;
    std::string category;
    const std::size_t tab = entry.find('\t');
    if (tab != std::string::npos) {
      category = entry.substr(tab + 1);
      entry.erase(tab);
    }
    while (!entry.empty() && (entry.back() == ' ' || entry.back() == '\t')) entry.pop_back();
    while (!entry.empty() && (entry.front() == ' ' || entry.front() == '\t')) entry.erase(0, 1);
    if (entry.empty()) continue;
    lex.add(std::move(entry), std::move(category));
  }
  if (in.bad()) throw Error("I/O error while reading " + file);
  return lex;
}

inline Lexicon load_lexicon(const std::string& path, Label label, bool case_sensitive = false) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open lexicon file '" + path + "'");
  return read_lexicon(in, label, case_sensitive, path);
}

// Greedy longest-match over token subsequences: at each start token the
// longest matching entry wins and its region is consumed, so one lexicon
// never produces overlapping spans.
inline std::vector<CandidateSpan> lexicon_match(const std::vector<Token>& tokens,
                                                const Lexicon& lexicon,
                                                std::string_view source = "lexicon") {
  std::vector<CandidateSpan> out;
  if (lexicon.empty() || tokens.empty()) return out;
  const std::vector<std::string> folded = lexicon.fold_tokens(tokens);
  std::size_t pos = 0;
  while (pos < tokens.size()) {
    const std::size_t consumed = lexicon.match_at(folded, pos);
    if (consumed == 0) {
      ++pos;
      continue;
    }
    out.push_back(make_candidate(tokens[pos].start, tokens[pos + consumed - 1].end,
                                 lexicon.label(), std::string(source)));
    pos += consumed;
  }
  return out;
}

}  // namespace deid

#endif  // DEID_LEXICON_HPP
