#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace gg::text {

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

/// Lowercase, trim, and collapse internal whitespace runs to one space.
inline std::string normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

inline bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  }
  return true;
}

/// Removes a leading speaker marker such as "Guesser said:" (case-insensitive).
inline std::string_view strip_marker(std::string_view s, std::string_view marker) {
  s = trim(s);
  if (starts_with_ci(s, marker)) s = trim(s.substr(marker.size()));
  return s;
}

/// Lowercased alphanumeric word tokens; apostrophes inside words are kept.
inline std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || (c == '\'' && !cur.empty())) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  for (auto& w : out) {
    while (!w.empty() && w.back() == '\'') w.pop_back();
  }
  std::erase_if(out, [](const std::string& w) { return w.empty(); });
  return out;
}

/// Words joined by single spaces: punctuation and case are dropped.
inline std::string canonical_words(std::string_view s) {
  std::string out;
  for (const auto& w : words(s)) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

inline const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> kStop = {
      "a",     "an",   "the",  "is",   "are",  "was",  "were", "be",   "been", "it",
      "its",   "it's", "this", "that", "of",   "in",   "on",   "at",   "to",   "for",
      "and",   "or",   "but",  "with", "as",   "by",   "from", "do",   "does", "did",
      "can",   "could", "would", "will", "should", "has", "have", "had", "what", "which",
      "who",   "how",  "i",    "you",  "your", "my",   "me",   "we",   "they", "them",
      "object", "thing", "yes", "no", "not", "very", "so", "there", "their", "some"};
  return kStop;
}

inline std::vector<std::string> content_words(std::string_view s) {
  auto ws = words(s);
  std::erase_if(ws, [](const std::string& w) { return stopwords().contains(w); });
  return ws;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace gg::text
