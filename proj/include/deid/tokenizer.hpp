#ifndef DEID_TOKENIZER_HPP
#define DEID_TOKENIZER_HPP

#include <string>
#include <string_view>
#include <vector>

#include "deid/corpus.hpp"
#include "deid/patterns.hpp"
#include "deid/unicode.hpp"

// Deterministic, offset-preserving tokenizer.
//
// Rules: split on Unicode whitespace; peel leading and trailing punctuation
// of each chunk into single-character tokens; hyphens and apostrophes stay
// attached between two non-punctuation characters, every other interior
// punctuation character becomes its own token. With email_aware (the
// default) a chunk core that forms an e-mail survives as one token, which
// avoids the classic failure where j.doe@minfin.nl is shredded into five
// pieces; url_aware does the same for URLs and bare domains. The tokenizer
// never merges across whitespace, so no token ever contains a space --
// whitespace-damaged e-mails are reassembled later at the recognizer level.

namespace deid {

struct TokenizerConfig {
  bool email_aware = true;
  bool url_aware = true;
};

namespace detail {

inline bool attaches_inside_token(char32_t cp) {
  return cp == U'-' || cp == U'\'' || cp == 0x2019;  // hyphen, ', ’
}

}  // namespace detail

inline std::vector<Token> tokenize(std::string_view text, TokenizerConfig config = {}) {
  const std::u32string cps = unicode::decode_utf8(text);
  std::vector<Token> tokens;

  auto emit = [&](std::size_t start, std::size_t end) {
    Token tok;
    tok.start = start;
    tok.end = end;
    tok.surface = unicode::encode_utf8(std::u32string_view(cps).substr(start, end - start));
    tokens.push_back(std::move(tok));
  };

  // Splits a core (no leading/trailing punctuation) into runs, keeping
  // hyphens/apostrophes that sit between two non-punctuation characters.
  auto emit_core_pieces = [&](std::size_t a, std::size_t b) {
    std::size_t run_start = a;
    for (std::size_t i = a; i < b; ++i) {
      const char32_t cp = cps[i];
      if (!unicode::is_punct(cp)) continue;
      const bool attached = detail::attaches_inside_token(cp) && i > a && i + 1 < b &&
                            !unicode::is_punct(cps[i - 1]) && !unicode::is_punct(cps[i + 1]);
      if (attached) continue;
      if (i > run_start) emit(run_start, i);
      emit(i, i + 1);
      run_start = i + 1;
    }
    if (b > run_start) emit(run_start, b);
  };

  std::size_t i = 0;
  const std::size_t n = cps.size();
  while (i < n) {
    if (unicode::is_space(cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && !unicode::is_space(cps[j])) ++j;

    std::size_t a = i;
    std::size_t b = j;
    while (a < b && unicode::is_punct(cps[a])) {
      emit(a, a + 1);
      ++a;
    }
    std::size_t trail_begin = b;
    while (trail_begin > a && unicode::is_punct(cps[trail_begin - 1])) --trail_begin;

    if (a < trail_begin) {
      const std::string core = unicode::encode_utf8(
          std::u32string_view(cps).substr(a, trail_begin - a));
      if (config.email_aware && patterns::is_email(core)) {
        emit(a, trail_begin);
      } else if (config.url_aware && patterns::is_website(core)) {
        emit(a, trail_begin);
      } else {
        emit_core_pieces(a, trail_begin);
      }
    }
    for (std::size_t k = trail_begin; k < b; ++k) emit(k, k + 1);
    i = j;
  }
  return tokens;
}

inline std::vector<Token> tokenize_document(const Document& doc, TokenizerConfig config = {}) {
  return tokenize(doc.text, config);
}

}  // namespace deid

#endif  // DEID_TOKENIZER_HPP
