#ifndef DEID_PATTERNS_HPP
#define DEID_PATTERNS_HPP

#include <cstddef>
#include <string_view>

// Hand-rolled full-string matchers for the token shapes the pipeline cares
// about. They run per token, so they are written as cheap character scans
// instead of std::regex. All matching is case-insensitive.
//
// The e-mail and website sets are disjoint by construction: an e-mail
// requires exactly one '@' and every website form rejects '@' outright.

namespace deid::patterns {

namespace detail {

inline bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_alnum(char c) { return is_alpha(c) || is_digit(c); }

inline bool is_local_char(char c) {
  return is_alnum(c) || c == '.' || c == '_' || c == '%' || c == '+' || c == '-';
}

// One or more dot-separated labels of [alnum-], the last label being a TLD
// of two or more letters.
inline bool is_domain(std::string_view s) {
  if (s.empty()) return false;
  std::size_t label_start = 0;
  std::size_t last_label_start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '.') {
      if (i == label_start) return false;  // empty label
      last_label_start = label_start;
      label_start = i + 1;
    } else if (!is_alnum(s[i]) && s[i] != '-') {
      return false;
    }
  }
  const std::string_view tld = s.substr(last_label_start);
  if (tld.size() < 2) return false;
  for (char c : tld)
    if (!is_alpha(c)) return false;
  return last_label_start > 0;  // at least one dot
}

}  // namespace detail

// local@domain.tld with local in [A-Za-z0-9._%+-]+.
inline bool is_email(std::string_view s) {
  const std::size_t at = s.find('@');
  if (at == std::string_view::npos || at == 0) return false;
  if (s.find('@', at + 1) != std::string_view::npos) return false;
  for (char c : s.substr(0, at))
    if (!detail::is_local_char(c)) return false;
  return detail::is_domain(s.substr(at + 1));
}

// True when every character could appear in an e-mail; used to pre-filter
// tokens that may take part in a whitespace-split e-mail.
inline bool is_email_material(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!detail::is_local_char(c) && c != '@') return false;
  return true;
}

// scheme://..., www.-prefixed, or a bare domain.tld; never contains '@'.
inline bool is_website(std::string_view s) {
  if (s.empty() || s.find('@') != std::string_view::npos) return false;

  const std::size_t scheme_end = s.find("://");
  if (scheme_end != std::string_view::npos) {
    if (scheme_end == 0 || !detail::is_alpha(s[0])) return false;
    for (char c : s.substr(0, scheme_end))
      if (!detail::is_alnum(c) && c != '+' && c != '.' && c != '-') return false;
    return scheme_end + 3 < s.size();  // something after ://
  }

  if (s.size() >= 4 && (s.substr(0, 4) == "www." || s.substr(0, 4) == "WWW." ||
                        s.substr(0, 4) == "Www."))
    return s.size() > 4;

  // bare domain, optionally followed by a path
  const std::size_t slash = s.find('/');
  const std::string_view host = slash == std::string_view::npos ? s : s.substr(0, slash);
  return detail::is_domain(host);
}

// Structural IBAN: two letters, two digits, then 10 to 30 alphanumerics.
// No checksum validation.
inline bool is_iban(std::string_view s) {
  if (s.size() < 14 || s.size() > 34) return false;
  if (!detail::is_alpha(s[0]) || !detail::is_alpha(s[1])) return false;
  if (!detail::is_digit(s[2]) || !detail::is_digit(s[3])) return false;
  for (char c : s.substr(4))
    if (!detail::is_alnum(c)) return false;
  return true;
}

// A token that is nothing but digits, length >= 2. Single digits are
// deliberately never flagged.
inline bool is_number_run(std::string_view s) {
  if (s.size() < 2) return false;
  for (char c : s)
    if (!detail::is_digit(c)) return false;
  return true;
}

}  // namespace deid::patterns

#endif  // DEID_PATTERNS_HPP
