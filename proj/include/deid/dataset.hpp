#ifndef DEID_DATASET_HPP
#define DEID_DATASET_HPP

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "deid/corpus.hpp"
#include "deid/error.hpp"
#include "deid/tokenizer.hpp"
#include "deid/unicode.hpp"

// Unsupervised job-title dataset construction: expand a raw title list
// with its "senior" variants, then project the titles onto tokenized texts
// as B-/I-JOBTITLE tags, longest title first.

namespace deid {

// Prepared title list: deduplicated (case-insensitively) and ordered by
// descending character count, ties broken lexicographically.
struct JobTitleList {
  std::vector<std::string> titles;
};

namespace detail {

inline std::string trim_copy(std::string_view s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && (s[begin] == ' ' || s[begin] == '\t' || s[begin] == '\r')) ++begin;
  while (end > begin && (s[end - 1] == ' ' || s[end - 1] == '\t' || s[end - 1] == '\r')) --end;
  return std::string(s.substr(begin, end - begin));
}

}  // namespace detail

// Close the raw list under the two copy rules: a title carrying the
// prefix also appears without it, and a title without the prefix also
// appears with it (applied once — the prefixed copy of "senior x" is never
// "senior senior x"). Closure makes the operation idempotent: expanding an
// expanded list adds nothing.
inline JobTitleList expand_job_titles(const std::vector<std::string>& raw,
                                      const std::string& prefix = "senior") {
  const std::u32string prefix_cps = unicode::decode_utf8(prefix) + U' ';
  const std::u32string prefix_folded = unicode::fold(prefix_cps);

  std::map<std::u32string, std::string> chosen;  // folded -> first surface seen
  std::vector<std::pair<std::u32string, std::string>> worklist;  // (folded, surface)

  auto add = [&](std::string surface) {
    surface = detail::trim_copy(surface);
    if (surface.empty()) return;
    std::u32string folded = unicode::fold(unicode::decode_utf8(surface));
    if (chosen.emplace(folded, surface).second) worklist.emplace_back(std::move(folded), std::move(surface));
  };

  for (const std::string& title : raw) add(title);

  while (!worklist.empty()) {
    auto [folded, surface] = std::move(worklist.back());
    worklist.pop_back();
    if (folded.size() > prefix_folded.size() &&
        folded.compare(0, prefix_folded.size(), prefix_folded) == 0) {
      const std::u32string cps = unicode::decode_utf8(surface);
      add(unicode::encode_utf8(cps.substr(prefix_cps.size())));
    } else {
      add(prefix + " " + surface);
    }
  }

  JobTitleList list;
  list.titles.reserve(chosen.size());
  for (auto& [folded, surface] : chosen) list.titles.push_back(std::move(surface));
  std::sort(list.titles.begin(), list.titles.end(),
            [](const std::string& a, const std::string& b) {
              const std::size_t la = unicode::length(a);
              const std::size_t lb = unicode::length(b);
              if (la != lb) return la > lb;
              return a < b;
            });
  return list;
}

// Remove stop-listed titles (generic words the user wants untagged);
// comparison is case-insensitive like all title matching.
inline JobTitleList apply_stoplist(JobTitleList list, const std::vector<std::string>& stoplist) {
  std::set<std::string> stopped;
  for (const std::string& s : stoplist) stopped.insert(unicode::fold_utf8(detail::trim_copy(s)));
  if (stopped.empty()) return list;
  std::vector<std::string> kept;
  kept.reserve(list.titles.size());
  for (std::string& title : list.titles)
    if (!stopped.count(unicode::fold_utf8(title))) kept.push_back(std::move(title));
  list.titles = std::move(kept);
  return list;
}

// One title (or stop-list entry) per line, UTF-8.
inline std::vector<std::string> read_title_list(std::istream& in) {
  std::vector<std::string> titles;
  std::string line;
  while (std::getline(in, line)) {
    std::string title = detail::trim_copy(line);
    if (!title.empty()) titles.push_back(std::move(title));
  }
  return titles;
}

inline std::vector<std::string> load_title_list(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open title list file: " + path);
  return read_title_list(in);
}

// Tag every occurrence of every title, scanning titles in list order
// (longest first) and occurrences left to right; a token once tagged is
// never retagged, so the longest title wins wherever titles overlap.
inline std::vector<TaggedToken> label_tokens(const std::vector<Token>& tokens,
                                             const JobTitleList& titles,
                                             const TokenizerConfig& tokenizer_config = {}) {
  const std::size_t n = tokens.size();
  std::vector<std::string> folded;
  folded.reserve(n);
  for (const Token& t : tokens) folded.push_back(unicode::fold_utf8(t.surface));

  std::vector<bool> consumed(n, false);
  // span heads: consumed alone cannot distinguish B from I afterwards
  std::vector<bool> head(n, false);

  for (const std::string& title : titles.titles) {
    std::vector<std::string> title_tokens;
    for (const Token& t : tokenize(title, tokenizer_config))
      title_tokens.push_back(unicode::fold_utf8(t.surface));
    if (title_tokens.empty() || title_tokens.size() > n) continue;
    for (std::size_t p = 0; p + title_tokens.size() <= n; ++p) {
      bool fits = true;
      for (std::size_t k = 0; k < title_tokens.size() && fits; ++k)
        fits = !consumed[p + k] && folded[p + k] == title_tokens[k];
      if (!fits) continue;
      head[p] = true;
      for (std::size_t k = 0; k < title_tokens.size(); ++k) consumed[p + k] = true;
      p += title_tokens.size() - 1;
    }
  }

  std::vector<TaggedToken> tagged;
  tagged.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    IOB2Tag tag = IOB2Tag::o();
    if (consumed[i])
      tag = head[i] ? IOB2Tag::b(Label::JobTitle) : IOB2Tag::i(Label::JobTitle);
    tagged.push_back({tokens[i], tag});
  }
  return tagged;
}

inline std::vector<std::pair<Document, std::vector<TaggedToken>>> label_texts(
    const std::vector<Document>& texts, const JobTitleList& titles,
    const TokenizerConfig& tokenizer_config = {}) {
  std::vector<std::pair<Document, std::vector<TaggedToken>>> out;
  out.reserve(texts.size());
  for (const Document& doc : texts)
    out.emplace_back(doc,
                     label_tokens(tokenize_document(doc, tokenizer_config), titles,
                                  tokenizer_config));
  return out;
}

struct SurfaceCount {
  std::string surface;  // case-folded, tokens joined by single spaces
  std::size_t count = 0;
};

struct DatasetStats {
  std::size_t token_count = 0;
  std::size_t entity_count = 0;
  std::size_t distinct_surface_count = 0;
  std::vector<SurfaceCount> top;  // most frequent tagged surfaces
};

inline DatasetStats dataset_stats(
    const std::vector<std::pair<Document, std::vector<TaggedToken>>>& labeled,
    std::size_t top_k = 5) {
  DatasetStats stats;
  std::map<std::string, std::size_t> frequency;
  for (const auto& [doc, tagged] : labeled) {
    stats.token_count += tagged.size();
    std::size_t i = 0;
    while (i < tagged.size()) {
      if (tagged[i].tag.kind != IOB2Tag::Kind::B) {
        ++i;
        continue;
      }
      std::string surface = unicode::fold_utf8(tagged[i].token.surface);
      std::size_t j = i + 1;
      while (j < tagged.size() && tagged[j].tag.kind == IOB2Tag::Kind::I) {
        surface += ' ';
        surface += unicode::fold_utf8(tagged[j].token.surface);
        ++j;
      }
      ++stats.entity_count;
      ++frequency[surface];
      i = j;
    }
  }
  stats.distinct_surface_count = frequency.size();

  std::vector<SurfaceCount> ranked;
  ranked.reserve(frequency.size());
  for (const auto& [surface, count] : frequency) ranked.push_back({surface, count});
  std::sort(ranked.begin(), ranked.end(), [](const SurfaceCount& a, const SurfaceCount& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.surface < b.surface;
  });
  if (ranked.size() > top_k) ranked.resize(top_k);
  stats.top = std::move(ranked);
  return stats;
}

}  // namespace deid

#endif  // DEID_DATASET_HPP
