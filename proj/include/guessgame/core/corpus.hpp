#pragma once

#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>

#include "guessgame/core/errors.hpp"
#include "guessgame/core/text.hpp"
#include "guessgame/core/types.hpp"

namespace gg {

inline std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string file_sha256(const std::filesystem::path& path) {
  return sha256_hex(read_file(path));
}

/// Normalizes and de-duplicates object names, preserving first occurrence.
inline ObjectCorpus corpus_from_lines(std::string_view content) {
  ObjectCorpus corpus;
  std::unordered_set<std::string> seen;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    auto name = text::normalize(line);
    if (name.empty()) continue;
    if (seen.insert(name).second) corpus.objects.push_back(std::move(name));
  }
  if (corpus.objects.empty()) throw DataError("object corpus is empty after normalization");
  corpus.sha256 = sha256_hex(content);
  return corpus;
}

inline ObjectCorpus load_corpus(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("corpus file not found: " + path.string());
  return corpus_from_lines(read_file(path));
}

}  // namespace gg
