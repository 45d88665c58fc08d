#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "guessgame/core/errors.hpp"
#include "guessgame/core/text.hpp"

namespace gg {

class EmbedderError : public Error {
 public:
  using Error::Error;
};

/// Fixed-dimension vector with its Euclidean norm cached at construction.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    double s = 0;
    for (double v : values_) s += v * v;
    norm_ = std::sqrt(s);
  }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t dim() const noexcept { return values_.size(); }
  double norm() const noexcept { return norm_; }

 private:
  std::vector<double> values_;
  double norm_ = 0;
};

inline double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim()) throw EmbedderError("embedding dimension mismatch");
  if (u.norm() == 0 || v.norm() == 0) throw EmbedderError("zero-norm embedding");
  double dot = 0;
  auto a = u.values();
  auto b = v.values();
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  double c = dot / (u.norm() * v.norm());
  return std::clamp(c, -1.0, 1.0);
}

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const = 0;
  virtual std::size_t dimension() const = 0;

  EmbeddingVector embed_one(const std::string& s) const {
    auto v = embed(std::span<const std::string>(&s, 1));
    return std::move(v.front());
  }
};

/// Offline feature-hashing bag-of-words embedder: each content word adds +1 or
/// -1 to one of `dim` buckets chosen by FNV-1a. Deterministic across platforms.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dim = 384) : dim_(dim) {}

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      std::vector<double> v(dim_, 0.0);
      for (const auto& w : text::content_words(t)) {
        auto h = text::fnv1a64(w);
        v[h % dim_] += (h >> 63) ? -1.0 : 1.0;
      }
      out.emplace_back(std::move(v));
    }
    return out;
  }
  std::size_t dimension() const override { return dim_; }

 private:
  std::size_t dim_;
};

/// Precomputed table "label \t v1,v2,..."; lookups are by normalized label.
/// Unknown texts go to the fallback embedder, or fail when there is none.
class TableEmbedder final : public Embedder {
 public:
  TableEmbedder() = default;

  static TableEmbedder from_tsv(std::istream& in, std::shared_ptr<const Embedder> fallback = nullptr) {
    TableEmbedder t;
    t.fallback_ = std::move(fallback);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (text::trim(line).empty() || line.front() == '#') continue;
      auto tab = line.find('\t');
      if (tab == std::string::npos)
        throw DataError("embedding table line " + std::to_string(line_no) + ": missing tab");
      std::vector<double> values;
      for (const auto& f : text::split(std::string_view(line).substr(tab + 1), ',')) {
        char* end = nullptr;
        std::string s(text::trim(f));
        double v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size())
          throw DataError("embedding table line " + std::to_string(line_no) + ": bad number");
        values.push_back(v);
      }
      if (t.dim_ == 0) t.dim_ = values.size();
      if (values.size() != t.dim_)
        throw DataError("embedding table line " + std::to_string(line_no) + ": dimension mismatch");
      t.table_.insert_or_assign(text::normalize(line.substr(0, tab)), EmbeddingVector(std::move(values)));
    }
    if (t.fallback_ && t.dim_ != 0 && t.fallback_->dimension() != t.dim_)
      throw DataError("fallback embedder dimension differs from table");
    if (t.dim_ == 0 && t.fallback_) t.dim_ = t.fallback_->dimension();
    return t;
  }

  static TableEmbedder load(const std::filesystem::path& p, std::shared_ptr<const Embedder> fallback = nullptr) {
    std::ifstream in(p);
    if (!in) throw DataError("cannot open embedding table " + p.string());
    return from_tsv(in, std::move(fallback));
  }

  void insert(const std::string& label, std::vector<double> values) {
    if (dim_ == 0) dim_ = values.size();
    if (values.size() != dim_) throw DataError("dimension mismatch for " + label);
    table_.insert_or_assign(text::normalize(label), EmbeddingVector(std::move(values)));
  }

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      auto it = table_.find(text::normalize(t));
      if (it != table_.end()) {
        out.push_back(it->second);
      } else if (fallback_) {
        out.push_back(fallback_->embed_one(t));
      } else {
        throw EmbedderError("no embedding for text: " + t);
      }
    }
    return out;
  }
  std::size_t dimension() const override { return dim_; }

 private:
  std::unordered_map<std::string, EmbeddingVector> table_;
  std::shared_ptr<const Embedder> fallback_;
  std::size_t dim_ = 0;
};

/// Content-keyed cache in front of another embedder; concurrent readers,
/// exclusive insertion.
class CachingEmbedder final : public Embedder {
 public:
  explicit CachingEmbedder(std::shared_ptr<const Embedder> inner) : inner_(std::move(inner)) {}

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override {
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<std::string> missing;
    std::vector<std::size_t> missing_at;
    {
      std::shared_lock lock(mu_);
      for (std::size_t i = 0; i < texts.size(); ++i) {
        auto it = cache_.find(texts[i]);
        if (it != cache_.end()) {
          out[i] = it->second;
        } else {
          missing.push_back(texts[i]);
          missing_at.push_back(i);
        }
      }
    }
    if (!missing.empty()) {
      auto fresh = inner_->embed(missing);
      std::unique_lock lock(mu_);
      for (std::size_t k = 0; k < missing.size(); ++k) {
        cache_.insert_or_assign(missing[k], fresh[k]);
        out[missing_at[k]] = std::move(fresh[k]);
      }
    }
    return out;
  }
  std::size_t dimension() const override { return inner_->dimension(); }
  std::size_t cached() const {
    std::shared_lock lock(mu_);
    return cache_.size();
  }

 private:
  std::shared_ptr<const Embedder> inner_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::string, EmbeddingVector> cache_;
};

}  // namespace gg
