#ifndef DEID_UNICODE_HPP
#define DEID_UNICODE_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

// Minimal UTF-8 and code point helpers. All character offsets in this
// library count Unicode scalar values, not bytes, so every module that
// slices text goes through these functions.
//
// Classification covers Basic Latin, Latin-1 Supplement, Latin Extended-A
// and the General Punctuation block, which is sufficient for Dutch text.

namespace deid::unicode {

inline constexpr char32_t replacement_char = 0xFFFD;

class Utf8Error : public std::runtime_error {
public:
  explicit Utf8Error(std::size_t byte_offset)
      : std::runtime_error("invalid UTF-8 at byte offset " + std::to_string(byte_offset)),
        offset(byte_offset) {}
  std::size_t offset;
};

// Decodes UTF-8 into code points. Throws Utf8Error on malformed input
// (overlong forms, surrogates and out-of-range values included).
inline std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      throw Utf8Error(i);
    }
    if (i + len > s.size()) throw Utf8Error(i);
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char bk = static_cast<unsigned char>(s[i + k]);
      if ((bk & 0xC0) != 0x80) throw Utf8Error(i);
      cp = (cp << 6) | (bk & 0x3F);
    }
    static constexpr char32_t min_for_len[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < min_for_len[len]) throw Utf8Error(i);            // overlong
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) throw Utf8Error(i);
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) append_utf8(out, cp);
  return out;
}

// Number of code points in a UTF-8 string.
inline std::size_t length(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size();) {
    const unsigned char b = static_cast<unsigned char>(s[i]);
    if (b < 0x80) i += 1;
    else if ((b & 0xE0) == 0xC0) i += 2;
    else if ((b & 0xF0) == 0xE0) i += 3;
    else if ((b & 0xF8) == 0xF0) i += 4;
    else throw Utf8Error(i);
    ++n;
  }
  return n;
}

inline bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

inline bool is_space(char32_t cp) {
  switch (cp) {
    case U'\t': case U'\n': case U'\v': case U'\f': case U'\r': case U' ':
    case 0x85:    // NEL
    case 0xA0:    // no-break space
    case 0x1680:  // ogham space mark
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return (cp >= 0x2000 && cp <= 0x200A);
  }
}

// Unicode category P over the ranges we support.
inline bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    switch (cp) {
      case U'!': case U'"': case U'#': case U'%': case U'&': case U'\'':
      case U'(': case U')': case U'*': case U',': case U'-': case U'.':
      case U'/': case U':': case U';': case U'?': case U'@': case U'[':
      case U'\\': case U']': case U'_': case U'{': case U'}':
        return true;
      default:
        return false;
    }
  }
  switch (cp) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
      return true;
    default:
      break;
  }
  // General Punctuation, minus the space characters at the start of the block.
  if (cp >= 0x2010 && cp <= 0x2027) return true;
  if (cp >= 0x2030 && cp <= 0x205E) return true;
  return false;
}

inline bool is_letter(char32_t cp) {
  if ((cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z')) return true;
  if (cp >= 0xC0 && cp <= 0xFF && cp != 0xD7 && cp != 0xF7) return true;  // Latin-1 letters
  if (cp >= 0x100 && cp <= 0x17F) return true;                           // Latin Extended-A
  return false;
}

// Latin Extended-A pairs upper/lower alternately, but the parity flips
// around the two unpaired lowercase letters kra (U+0138) and 'n (U+0149):
// U+0100..U+0137 and U+014A..U+0177 put uppercase on even code points,
// U+0139..U+0148 and U+0179..U+017E on odd ones.
inline bool is_upper(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return true;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return true;
  if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) return (cp % 2) == 0;
  if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) return (cp % 2) == 1;
  return cp == 0x178;  // Ÿ
}

inline char32_t to_lower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp == 0x178) return 0xFF;
  return is_upper(cp) ? cp + 1 : cp;
}

inline std::u32string fold(std::u32string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (char32_t cp : s) out.push_back(to_lower(cp));
  return out;
}

// Case-folded copy of a UTF-8 string, still UTF-8.
inline std::string fold_utf8(std::string_view s) {
  return encode_utf8(fold(decode_utf8(s)));
}

}  // namespace deid::unicode

#endif  // DEID_UNICODE_HPP
