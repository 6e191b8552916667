#pragma once

// Tokenization shared by retrieval, centrality and ROUGE.
//
// Tokens are lowercase. Runs of word characters form one token; every
// punctuation code point is a token of its own; whitespace separates.

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "qsum/porter.hpp"
#include "qsum/stopwords_data.hpp"

namespace qsum {

using Token = std::string;
using Tokens = std::vector<Token>;

namespace utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes the code point starting at `pos` and advances `pos` past it.
/// Malformed sequences decode as U+FFFD and consume a single byte.
inline char32_t next(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int extra = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return kReplacement;
  }
  if (pos + extra >= s.size()) {
    ++pos;
    return kReplacement;
  }
  for (int i = 1; i <= extra; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return kReplacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  pos += extra + 1;
  return cp;
}

inline void append(std::string& out, char32_t cp) {
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

}  // namespace utf8

inline bool is_space(char32_t cp) {
  switch (cp) {
    case ' ': case '\t': case '\n': case '\r': case '\f': case '\v':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000: case 0xFEFF:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200B;
  }
}

inline bool is_punctuation(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  // Latin-1 punctuation and symbols, General Punctuation, CJK punctuation.
  return (cp >= 0xA1 && cp <= 0xBF && cp != 0xAA && cp != 0xB2 && cp != 0xB3 && cp != 0xB5 &&
          cp != 0xB9 && cp != 0xBA && cp != 0xBC && cp != 0xBD && cp != 0xBE) ||
         cp == 0xD7 || cp == 0xF7 || (cp >= 0x2010 && cp <= 0x2027) ||
         (cp >= 0x2030 && cp <= 0x205E) || (cp >= 0x3001 && cp <= 0x3003) ||
         (cp >= 0x3008 && cp <= 0x3011);
}

inline char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;  // Greek
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;                  // Cyrillic
  return cp;
}

/// Lowercases and splits `text` on whitespace and punctuation boundaries.
inline Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string cur;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = utf8::next(text, pos);
    if (is_space(cp)) {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else if (is_punctuation(cp)) {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
      std::string p;
      utf8::append(p, cp);
      out.push_back(std::move(p));
    } else {
      utf8::append(cur, to_lower(cp));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// True for the single-code-point tokens the tokenizer emits for punctuation.
inline bool is_punctuation_token(std::string_view token) {
  if (token.empty()) return false;
  std::size_t pos = 0;
  const char32_t cp = utf8::next(token, pos);
  return pos == token.size() && is_punctuation(cp);
}

/// Number of word (non-punctuation) tokens; the unit of every length budget.
inline std::size_t word_count(const Tokens& tokens) {
  std::size_t n = 0;
  for (const auto& t : tokens)
    if (!is_punctuation_token(t)) ++n;
  return n;
}

inline bool is_stopword(std::string_view word) {
  static const std::unordered_set<std::string_view> set(std::begin(detail::kStopwordList),
                                                        std::end(detail::kStopwordList));
  return set.contains(word);
}

/// Porter stems of the word tokens, punctuation dropped.
inline Tokens stemmed_words(const Tokens& tokens) {
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& t : tokens)
    if (!is_punctuation_token(t)) out.push_back(porter_stem(t));
  return out;
}

/// Joins tokens with single spaces.
inline std::string join(const Tokens& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

}  // namespace qsum
