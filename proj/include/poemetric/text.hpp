#pragma once

// Plain-text helpers shared by every stage: line splitting, word
// tokenization and the normalization rules used for dictionary lookup and
// refrain comparison.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace poemetric::text {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
         c == '\v';
}

inline bool is_alpha(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0;
}

inline bool is_alnum(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string to_upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool contains_alpha(std::string_view s) {
  return std::any_of(s.begin(), s.end(), is_alpha);
}

// Splits on LF, tolerating CRLF. A trailing newline does not produce an
// extra empty line.
inline std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < s.size()) {
        std::string_view line = s.substr(start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
      }
      break;
    }
    std::string_view line = s.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

// Rewrites the typographic characters common in published poems into their
// ASCII counterparts: curly quotes become straight quotes, em/en dashes and
// "--" become word separators.
inline std::string ascii_fold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c == 0xE2 && i + 2 < s.size() &&
        static_cast<unsigned char>(s[i + 1]) == 0x80) {
      const auto c3 = static_cast<unsigned char>(s[i + 2]);
      if (c3 == 0x98 || c3 == 0x99) {  // U+2018, U+2019
        out += '\'';
        i += 2;
        continue;
      }
      if (c3 == 0x9C || c3 == 0x9D) {  // U+201C, U+201D
        out += '"';
        i += 2;
        continue;
      }
      if (c3 == 0x93 || c3 == 0x94) {  // U+2013, U+2014
        out += ' ';
        i += 2;
        continue;
      }
    }
    if (c == '-' && i + 1 < s.size() && s[i + 1] == '-') {
      out += ' ';
      ++i;
      continue;
    }
    out += static_cast<char>(c);
  }
  return out;
}

// Whitespace-delimited raw tokens after ascii_fold.
inline std::vector<std::string> split_words(std::string_view line) {
  const std::string folded = ascii_fold(line);
  std::vector<std::string> words;
  std::string current;
  for (char c : folded) {
    if (is_space(c)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

// Dictionary-key normalization for one raw token: strips surrounding
// punctuation (anything not a letter or digit), upper-cases, and drops a
// trailing possessive 's. Internal apostrophes and hyphens are kept. Returns
// an empty string when nothing word-like remains.
inline std::string normalize_word(std::string_view raw) {
  std::string folded = ascii_fold(raw);
  std::string_view s = folded;
  while (!s.empty() && !is_alnum(s.front())) s.remove_prefix(1);
  while (!s.empty() && !is_alnum(s.back())) s.remove_suffix(1);
  std::string out = to_upper(s);
  if (out.size() > 2 && out.ends_with("'S")) out.resize(out.size() - 2);
  // A hyphen run inside a token counts as a single hyphen.
  out.erase(std::unique(out.begin(), out.end(),
                        [](char a, char b) { return a == '-' && b == '-'; }),
            out.end());
  return out;
}

// Normalized word tokens of a line; tokens without any letter are dropped.
inline std::vector<std::string> word_tokens(std::string_view line) {
  std::vector<std::string> out;
  for (const auto& raw : split_words(line)) {
    std::string word = normalize_word(raw);
    if (!word.empty() && contains_alpha(word)) out.push_back(std::move(word));
  }
  return out;
}

// Refrain-comparison key: case-folded, punctuation stripped, whitespace
// collapsed.
inline std::string normalize_line(std::string_view line) {
  std::string out;
  for (const auto& token : word_tokens(line)) {
    if (!out.empty()) out += ' ';
    out += to_lower(token);
  }
  return out;
}

inline std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t end = s.find(sep, start);
    parts.emplace_back(s.substr(start, end == std::string_view::npos
                                           ? std::string_view::npos
                                           : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

// 64-bit FNV-1a, used to fingerprint input files in reports.
inline std::uint64_t fnv1a(std::string_view data,
                           std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace poemetric::text
