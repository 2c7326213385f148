#ifndef DEID_RECOGNIZERS_HPP
#define DEID_RECOGNIZERS_HPP

#include <array>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "deid/lexicon.hpp"
#include "deid/patterns.hpp"
#include "deid/spans.hpp"
#include "deid/unicode.hpp"

// Rule-based candidate producers: regular-expression style recognizers for
// dates, numbers, e-mails, websites and account codes, plus the
// prefix-triggered person rule. Gazetteer classes (person, organisation,
// location, job title, gender) go through lexicon_match. All recognizers
// are pure functions of the token list; every span they emit starts at a
// token start and ends at a token end.

namespace deid {

namespace dates {

inline std::optional<int> month_number(std::string_view folded) {
  static constexpr std::array<std::string_view, 12> full = {
      "januari", "februari", "maart",     "april",   "mei",      "juni",
      "juli",    "augustus", "september", "oktober", "november", "december"};
  static constexpr std::array<std::string_view, 12> abbrev = {
      "jan", "feb", "mrt", "apr", "mei", "jun", "jul", "aug", "sep", "okt", "nov", "dec"};
  for (std::size_t m = 0; m < 12; ++m)
    if (folded == full[m] || folded == abbrev[m]) return static_cast<int>(m) + 1;
  return std::nullopt;
}

// "5", "5e", "5de", "31ste" -> day of month.
inline std::optional<int> parse_day(std::string_view s) {
  std::size_t i = 0;
  int value = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
    value = value * 10 + (s[i] - '0');
    ++i;
    if (i > 2) return std::nullopt;
  }
  if (i == 0 || value < 1 || value > 31) return std::nullopt;
  const std::string_view suffix = s.substr(i);
  if (suffix.empty() || suffix == "e" || suffix == "de" || suffix == "ste") return value;
  return std::nullopt;
}

inline std::optional<int> parse_plain_day(std::string_view s) {
  if (s.empty() || s.size() > 2) return std::nullopt;
  int value = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + (c - '0');
  }
  return (value >= 1 && value <= 31) ? std::optional<int>(value) : std::nullopt;
}

inline std::optional<int> parse_month_numeric(std::string_view s) {
  if (s.empty() || s.size() > 2) return std::nullopt;
  int value = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + (c - '0');
  }
  return (value >= 1 && value <= 12) ? std::optional<int>(value) : std::nullopt;
}

// Standalone years are restricted to 1900-2099 so that arbitrary
// four-digit numbers stay in the Num class.
inline bool is_year4(std::string_view s) {
  if (s.size() != 4) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return (s[0] == '1' && s[1] == '9') || (s[0] == '2' && s[1] == '0');
}

inline bool is_year_flex(std::string_view s) {
  if (s.size() == 2) return s[0] >= '0' && s[0] <= '9' && s[1] >= '0' && s[1] <= '9';
  return is_year4(s);
}

inline bool is_separator(std::string_view s) {
  return s == "-" || s == "/" || s == ".";
}

// d<sep>m<sep>y inside one token, e.g. "03-11-2016".
inline bool is_numeric_date_token(std::string_view s) {
  for (char sep : {'-', '/', '.'}) {
    const std::size_t p1 = s.find(sep);
    if (p1 == std::string_view::npos) continue;
    const std::size_t p2 = s.find(sep, p1 + 1);
    if (p2 == std::string_view::npos) continue;
    if (s.find(sep, p2 + 1) != std::string_view::npos) continue;
    if (parse_plain_day(s.substr(0, p1)) && parse_month_numeric(s.substr(p1 + 1, p2 - p1 - 1)) &&
        is_year_flex(s.substr(p2 + 1)))
      return true;
  }
  return false;
}

}  // namespace dates

// Every token that is a maximal run of two or more digits becomes a Num
// span; single digits are too generic to flag.
inline std::vector<CandidateSpan> recognize_numbers(const std::vector<Token>& tokens) {
  std::vector<CandidateSpan> out;
  for (const Token& tok : tokens)
    if (patterns::is_number_run(tok.surface))
      out.push_back(make_candidate(tok.start, tok.end, Label::Num, "numbers"));
  return out;
}

// Day-month(-year) with Dutch month names, numeric d-m-y dates, month+year,
// and standalone years. Weekday names alone are never flagged.
inline std::vector<CandidateSpan> recognize_dates(const std::vector<Token>& tokens) {
  std::vector<CandidateSpan> out;
  const std::size_t n = tokens.size();
  std::vector<std::string> folded;
  folded.reserve(n);
  for (const Token& t : tokens) folded.push_back(unicode::fold_utf8(t.surface));

  auto emit = [&](std::size_t first, std::size_t last) {
    out.push_back(make_candidate(tokens[first].start, tokens[last].end, Label::Date, "dates"));
    return last + 1;
  };

  std::size_t i = 0;
  while (i < n) {
    // d <sep> m <sep> y spread over five tokens ("03 / 11 / 2016")
    if (i + 4 < n && dates::parse_plain_day(tokens[i].surface) &&
        dates::is_separator(tokens[i + 1].surface) &&
        dates::parse_month_numeric(tokens[i + 2].surface) &&
        tokens[i + 3].surface == tokens[i + 1].surface &&
        dates::is_year_flex(tokens[i + 4].surface)) {
      i = emit(i, i + 4);
      continue;
    }
    if (const auto day = dates::parse_day(tokens[i].surface)) {
      (void)day;
      if (i + 1 < n && dates::month_number(folded[i + 1])) {
        const std::size_t last = (i + 2 < n && dates::is_year4(tokens[i + 2].surface)) ? i + 2
                                                                                       : i + 1;
        i = emit(i, last);
        continue;
      }
    }
    if (dates::month_number(folded[i]) && i + 1 < n && dates::is_year4(tokens[i + 1].surface)) {
      i = emit(i, i + 1);
      continue;
    }
    if (dates::is_numeric_date_token(tokens[i].surface)) {
      i = emit(i, i);
      continue;
    }
    if (dates::is_year4(tokens[i].surface)) {
      i = emit(i, i);
      continue;
    }
    ++i;
  }
  return out;
}

// E-mail detection over token runs. A single e-mail may arrive as one
// token (email-aware tokenizer), as a run of adjacent fragments (unaware
// tokenizer splits on '@' and '.'), or with one stray space inside it, the
// mistake real correspondence contains. Fragments joined across a space
// are flagged with the "emails+repair" source; at most one space is
// bridged, and only next to the '@' side of the address.
inline std::vector<CandidateSpan> recognize_emails(const std::vector<Token>& tokens) {
  constexpr std::size_t max_parts = 12;
  std::vector<CandidateSpan> out;
  const std::size_t n = tokens.size();
  std::size_t i = 0;
  while (i < n) {
    const std::string& first = tokens[i].surface;
    const char f0 = first.empty() ? ' ' : first[0];
    if (!patterns::detail::is_alnum(f0) || !patterns::is_email_material(first)) {
      ++i;
      continue;
    }
    std::string assembled;
    bool space_used = false;
    std::size_t best_end = 0;
    bool best_repaired = false;
    bool found = false;
    for (std::size_t j = i; j < n && j < i + max_parts; ++j) {
      if (j > i) {
        const std::size_t gap = tokens[j].start - tokens[j - 1].end;
        if (gap == 1) {
          const bool at_boundary = assembled.find('@') != std::string::npos ||
                                   (!tokens[j].surface.empty() && tokens[j].surface[0] == '@');
          if (space_used || !at_boundary) break;
          // The bridge exists to complete a damaged address, never to
          // extend one that is already whole.
          if (patterns::is_email(assembled)) break;
          space_used = true;
        } else if (gap != 0) {
          break;
        }
      }
      if (!patterns::is_email_material(tokens[j].surface)) break;
      assembled += tokens[j].surface;
      if (patterns::is_email(assembled)) {
        found = true;
        best_end = j;
        best_repaired = space_used;
      }
    }
    if (found) {
      out.push_back(make_candidate(tokens[i].start, tokens[best_end].end, Label::Mail,
                                   best_repaired ? "emails+repair" : "emails"));
      i = best_end + 1;
    } else {
      ++i;
    }
  }
  return out;
}

// Website span per URL-shaped token. E-mails never double-report here:
// the website patterns reject anything containing '@'.
inline std::vector<CandidateSpan> recognize_websites(const std::vector<Token>& tokens) {
  std::vector<CandidateSpan> out;
  for (const Token& tok : tokens) {
    if (patterns::is_email(tok.surface)) continue;
    if (patterns::is_website(tok.surface))
      out.push_back(make_candidate(tok.start, tok.end, Label::Website, "websites"));
  }
  return out;
}

// IBANs plus user-configured code patterns (compiled at config load).
struct CodePattern {
  std::string text;
  std::regex regex;
};

inline std::vector<CandidateSpan> recognize_codes(const std::vector<Token>& tokens,
                                                  const std::vector<CodePattern>& user_patterns = {}) {
  std::vector<CandidateSpan> out;
  for (const Token& tok : tokens) {
    if (patterns::is_iban(tok.surface)) {
      out.push_back(make_candidate(tok.start, tok.end, Label::Code, "codes"));
      continue;
    }
    for (const CodePattern& p : user_patterns) {
      if (std::regex_match(tok.surface, p.regex)) {
        out.push_back(make_candidate(tok.start, tok.end, Label::Code, "codes"));
        break;
      }
    }
  }
  return out;
}

namespace detail {

inline bool is_tussenvoegsel(std::string_view surface) {
  return surface == "van" || surface == "de" || surface == "der" || surface == "den" ||
         surface == "ter";
}

inline bool is_capitalized_word(std::string_view surface) {
  const std::u32string cps = unicode::decode_utf8(surface);
  if (cps.empty() || !unicode::is_upper(cps[0])) return false;
  for (std::size_t k = 1; k < cps.size(); ++k)
    if (!unicode::is_letter(cps[k])) return false;
  return true;
}

}  // namespace detail

// Prefix-triggered person detection: every title match becomes a Title
// span, and up to three following capitalized words (with lowercase
// tussenvoegsels allowed in between) become one Per span.
inline std::vector<CandidateSpan> recognize_prefixed_person(const std::vector<Token>& tokens,
                                                            const Lexicon& title_lexicon) {
  std::vector<CandidateSpan> out;
  if (title_lexicon.empty() || tokens.empty()) return out;
  const std::vector<std::string> folded = title_lexicon.fold_tokens(tokens);
  const std::size_t n = tokens.size();
  std::size_t pos = 0;
  while (pos < n) {
    const std::size_t consumed = title_lexicon.match_at(folded, pos);
    if (consumed == 0) {
      ++pos;
      continue;
    }
    out.push_back(make_candidate(tokens[pos].start, tokens[pos + consumed - 1].end, Label::Title,
                                 "titles"));
    std::size_t k = pos + consumed;
    if (k < n && tokens[k].surface == ".") ++k;  // "dhr."
    const std::size_t name_start = k;
    std::size_t caps = 0;
    std::size_t last_cap = 0;
    bool have_cap = false;
    while (k < n) {
      if (detail::is_tussenvoegsel(tokens[k].surface)) {
        ++k;
        continue;
      }
      if (caps < 3 && detail::is_capitalized_word(tokens[k].surface)) {
        ++caps;
        last_cap = k;
        have_cap = true;
        ++k;
        continue;
      }
      break;
    }
    if (have_cap)
      out.push_back(make_candidate(tokens[name_start].start, tokens[last_cap].end, Label::Per,
                                   "prefix-person"));
    pos += consumed;
  }
  return out;
}

// Gender words are plain whole-token lexicon hits.
inline std::vector<CandidateSpan> recognize_gender(const std::vector<Token>& tokens,
                                                   const Lexicon& gender_lexicon) {
  return lexicon_match(tokens, gender_lexicon, "gender");
}

// Default lexicon contents. Users normally extend these from files; the
// built-ins keep the pipeline usable with no configuration at all.
inline Lexicon default_gender_lexicon() {
  return Lexicon(Label::Gender,
                 {"hij", "zij", "hem", "haar", "zijn", "meneer", "mevrouw", "de heer", "dhr",
                  "mevr", "zoon", "dochter"});
}

inline Lexicon default_title_lexicon() {
  Lexicon lex;
  lex.set_label(Label::Title);
  for (const char* s : {"dhr", "mevr", "mw", "de heer", "mevrouw", "meneer"})
    lex.add(s, "salutation");
  for (const char* s : {"dr", "drs", "prof", "mr", "ir", "ing", "msc", "bsc", "phd"})
    lex.add(s, "degree");
  for (const char* s : {"hertog", "graaf", "baron", "jonkheer"})
    lex.add(s, "nobiliary");
  return lex;
}

}  // namespace deid

#endif  // DEID_RECOGNIZERS_HPP
