#pragma once

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "guessgame/core/corpus.hpp"
#include "guessgame/core/errors.hpp"
#include "guessgame/core/json_io.hpp"
#include "guessgame/core/text.hpp"
#include "guessgame/entropy/embedding.hpp"

namespace gg {

using ObjectId = std::uint32_t;

inline std::set<std::string> default_relation_whitelist() {
  return {"IsA", "MadeOf", "UsedFor", "HasProperty", "AtLocation", "PartOf", "CapableOf"};
}

struct Assertion {
  std::string relation;
  std::string object;
  std::string concept_name;
  friend auto operator<=>(const Assertion&, const Assertion&) = default;
};

struct IngestDiagnostic {
  int line = 0;
  std::string message;
};

struct IngestStats {
  std::int64_t rows = 0;
  std::int64_t kept = 0;
  std::int64_t filtered = 0;    // valid rows outside the whitelist or not English
  std::int64_t duplicates = 0;
  std::int64_t malformed = 0;
  std::map<std::string, std::int64_t> per_relation;
  std::vector<IngestDiagnostic> diagnostics;
};

namespace conceptnet {

/// "/c/en/knife/n/wn/artifact" -> "knife"; "/c/en/ice_cream" -> "ice cream".
/// Returns nullopt for non-English or malformed node URIs.
inline std::optional<std::string> english_label(std::string_view uri) {
  constexpr std::string_view kPrefix = "/c/en/";
  if (!uri.starts_with(kPrefix)) return std::nullopt;
  uri.remove_prefix(kPrefix.size());
  auto slash = uri.find('/');
  if (slash != std::string_view::npos) uri = uri.substr(0, slash);
  std::string label = text::to_lower(uri);
  std::replace(label.begin(), label.end(), '_', ' ');
  label = text::normalize(label);
  if (label.empty()) return std::nullopt;
  return label;
}

/// Parses one assertion row. Sets `error` for malformed rows; returns nullopt
/// for malformed or filtered rows.
inline std::optional<Assertion> parse_row(std::string_view line, const std::set<std::string>& whitelist,
                                          std::string& error) {
  error.clear();
  auto fields = text::split(line, '\t');
  if (fields.size() != 5) {
    error = "expected 5 tab-separated fields, got " + std::to_string(fields.size());
    return std::nullopt;
  }
  std::string_view rel = fields[1];
  if (!rel.starts_with("/r/") || rel.size() <= 3) {
    error = "relation field is not a /r/ URI";
    return std::nullopt;
  }
  if (!fields[2].starts_with("/c/") || !fields[3].starts_with("/c/")) {
    error = "node field is not a /c/ URI";
    return std::nullopt;
  }
  std::string relation(rel.substr(3));
  if (auto slash = relation.find('/'); slash != std::string::npos) relation.resize(slash);
  if (!whitelist.contains(relation)) return std::nullopt;
  auto object = english_label(fields[2]);
  auto concept_label = english_label(fields[3]);
  if (!object || !concept_label) return std::nullopt;
  return Assertion{relation, *object, *concept_label};
}

/// Reads a plain or gzip-compressed file line by line.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& p) : file_(gzopen(p.string().c_str(), "rb")) {
    if (!file_) throw DataError("cannot open " + p.string());
    gzbuffer(file_, 1 << 17);
  }
  ~LineReader() {
    if (file_) gzclose(file_);
  }
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  bool next(std::string& line) {
    line.clear();
    char buf[8192];
    while (true) {
      char* got = gzgets(file_, buf, sizeof buf);
      if (!got) {
        int err = 0;
        const char* msg = gzerror(file_, &err);
        if (err != Z_OK && err != Z_STREAM_END) throw DataError(std::string("gzip read error: ") + msg);
        return !line.empty();
      }
      line += got;
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
      }
    }
  }

 private:
  gzFile file_;
};

}  // namespace conceptnet

struct Edge {
  std::string relation;
  ObjectId object = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Immutable index: concept -> (relation, object id) edges, with a dense
/// object table. Object ids follow the sorted order of object names.
class AssertionIndex {
 public:
  AssertionIndex() = default;

  static AssertionIndex build(std::vector<Assertion> assertions) {
    std::sort(assertions.begin(), assertions.end());
    assertions.erase(std::unique(assertions.begin(), assertions.end()), assertions.end());
    AssertionIndex idx;
    std::set<std::string> objects;
    for (const auto& a : assertions) objects.insert(a.object);
    idx.objects_.assign(objects.begin(), objects.end());
    for (ObjectId i = 0; i < idx.objects_.size(); ++i) idx.object_ids_.emplace(idx.objects_[i], i);
    for (const auto& a : assertions) idx.by_concept_[a.concept_name].push_back({a.relation, idx.object_ids_.at(a.object)});
    for (auto& [c, edges] : idx.by_concept_) {
      std::sort(edges.begin(), edges.end());
      idx.concepts_.push_back(c);
    }
    idx.assertions_ = std::move(assertions);
    return idx;
  }

  std::size_t object_count() const noexcept { return objects_.size(); }
  const std::vector<std::string>& objects() const noexcept { return objects_; }
  const std::vector<std::string>& concept_labels() const noexcept { return concepts_; }
  const std::vector<Assertion>& assertions() const noexcept { return assertions_; }

  const std::string& object_name(ObjectId id) const { return objects_.at(id); }
  std::optional<ObjectId> object_id(const std::string& name) const {
    auto it = object_ids_.find(name);
    if (it == object_ids_.end()) return std::nullopt;
    return it->second;
  }

  std::span<const Edge> edges_into(const std::string& concept_label) const {
    auto it = by_concept_.find(concept_label);
    if (it == by_concept_.end()) return {};
    return it->second;
  }

  bool has(const std::string& relation, ObjectId object, const std::string& concept_label) const {
    auto edges = edges_into(concept_label);
    return std::binary_search(edges.begin(), edges.end(), Edge{relation, object});
  }

 private:
  std::vector<std::string> objects_;
  std::unordered_map<std::string, ObjectId> object_ids_;
  std::map<std::string, std::vector<Edge>> by_concept_;
  std::vector<std::string> concepts_;
  std::vector<Assertion> assertions_;
};

struct IngestResult {
  AssertionIndex index;
  IngestStats stats;
};

/// Ingests assertion rows. Malformed rows are reported and skipped.
template <typename NextLine>
IngestResult ingest_lines(NextLine&& next_line, const std::set<std::string>& whitelist) {
  IngestResult r;
  std::vector<Assertion> kept;
  std::set<Assertion> seen;
  std::string line, error;
  int line_no = 0;
  while (next_line(line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    ++r.stats.rows;
    auto a = conceptnet::parse_row(line, whitelist, error);
    if (!error.empty()) {
      ++r.stats.malformed;
      r.stats.diagnostics.push_back({line_no, error});
      continue;
    }
    if (!a) {
      ++r.stats.filtered;
      continue;
    }
    if (!seen.insert(*a).second) {
      ++r.stats.duplicates;
      continue;
    }
    ++r.stats.kept;
    ++r.stats.per_relation[a->relation];
    kept.push_back(std::move(*a));
  }
  r.index = AssertionIndex::build(std::move(kept));
  return r;
}

inline IngestResult ingest(std::istream& in, const std::set<std::string>& whitelist = default_relation_whitelist()) {
  return ingest_lines(
      [&](std::string& line) {
        if (!std::getline(in, line)) return false;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
      },
      whitelist);
}

inline IngestResult ingest_file(const std::filesystem::path& p,
                                const std::set<std::string>& whitelist = default_relation_whitelist()) {
  conceptnet::LineReader reader(p);
  return ingest_lines([&](std::string& line) { return reader.next(line); }, whitelist);
}

/// Versioned JSONL index: a header line then one {"r","o","c"} line per triple.
inline void save_index(const AssertionIndex& idx, const std::filesystem::path& p,
                       const std::set<std::string>& whitelist, const std::string& source_hash) {
  auto out = detail::open_out(p);
  Json header;
  header["schema_version"] = 1;
  header["kind"] = "assertion_index";
  header["whitelist"] = whitelist;
  header["source_sha256"] = source_hash;
  header["assertions"] = idx.assertions().size();
  header["objects"] = idx.object_count();
  out << header.dump() << '\n';
  for (const auto& a : idx.assertions()) {
    Json j;
    j["r"] = a.relation;
    j["o"] = a.object;
    j["c"] = a.concept_name;
    out << j.dump() << '\n';
  }
}

inline AssertionIndex load_index(const std::filesystem::path& p) {
  auto in = detail::open_in(p);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty index file " + p.string());
  auto header = Json::parse(line);
  if (header.value("kind", "") != "assertion_index" || header.value("schema_version", 0) != 1)
    throw DataError("unsupported index file " + p.string());
  std::vector<Assertion> as;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = Json::parse(line);
      as.push_back({j.at("r").get<std::string>(), j.at("o").get<std::string>(), j.at("c").get<std::string>()});
    } catch (const std::exception& e) {
      throw DataError("index line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return AssertionIndex::build(std::move(as));
}

/// Sorted set of object ids: the remaining candidates D_t.
class CandidateSet {
 public:
  CandidateSet() = default;
  explicit CandidateSet(std::vector<ObjectId> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  }

  static CandidateSet all(const AssertionIndex& idx) {
    std::vector<ObjectId> ids(idx.object_count());
    for (ObjectId i = 0; i < ids.size(); ++i) ids[i] = i;
    return CandidateSet(std::move(ids));
  }

  /// Restricts to the named objects that exist in the index.
  static CandidateSet restricted(const AssertionIndex& idx, const std::vector<std::string>& vocabulary) {
    std::vector<ObjectId> ids;
    for (const auto& name : vocabulary)
      if (auto id = idx.object_id(text::normalize(name))) ids.push_back(*id);
    return CandidateSet(std::move(ids));
  }

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  bool contains(ObjectId id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }
  const std::vector<ObjectId>& members() const noexcept { return ids_; }
  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;

 private:
  std::vector<ObjectId> ids_;
};

struct RelationConcept {
  std::string relation;
  std::string concept_name;
  friend auto operator<=>(const RelationConcept&, const RelationConcept&) = default;
};

struct FilterResult {
  CandidateSet candidates;
  bool skipped = false;
};

/// Union of yes-sets over the matched (relation, concept) pairs. An empty match
/// list or an empty union keeps the current set and flags the turn as skipped.
inline FilterResult filter_candidates(const CandidateSet& d, const std::vector<RelationConcept>& matched,
                                      const AssertionIndex& index) {
  if (d.empty()) throw InvariantError("candidate set must be non-empty");
  if (matched.empty()) return {d, true};
  std::vector<ObjectId> kept;
  for (const auto& m : matched) {
    for (const auto& e : index.edges_into(m.concept_name)) {
      if (e.relation == m.relation && d.contains(e.object)) kept.push_back(e.object);
    }
  }
  CandidateSet next(std::move(kept));
  if (next.empty()) return {d, true};
  return {std::move(next), false};
}

/// log2(before / after) in bits.
inline double entropy_ig(std::int64_t before, std::int64_t after) {
  if (after < 1 || before < 1) throw InvariantError("entropy_ig counts must be >= 1");
  if (after > before) throw InvariantError("entropy_ig requires after <= before");
  return std::log2(static_cast<double>(before) / static_cast<double>(after));
}

/// Embeds answers and returns the (relation, concept) pairs of every concept
/// label within cosine tau of the answer. Label embeddings are computed once.
class AssertionMatcher {
 public:
  AssertionMatcher(std::shared_ptr<const AssertionIndex> index, std::shared_ptr<const Embedder> embedder)
      : index_(std::move(index)), embedder_(std::move(embedder)) {}

  const AssertionIndex& index() const { return *index_; }

  std::vector<RelationConcept> match(const std::string& answer, double tau) const {
    if (text::trim(answer).empty()) throw InvariantError("answer must be non-empty");
    if (!(tau >= 0)) throw InvariantError("tau must be >= 0");
    ensure_labels();
    auto v = embedder_->embed_one(answer);
    std::set<RelationConcept> out;
    const auto& labels = index_->concept_labels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (label_vectors_[i].norm() == 0) continue;
      if (cosine(v, label_vectors_[i]) >= tau) {
        for (const auto& e : index_->edges_into(labels[i])) out.insert({e.relation, labels[i]});
      }
    }
    return {out.begin(), out.end()};
  }

 private:
  void ensure_labels() const {
    std::call_once(labels_once_, [this] {
      const auto& labels = index_->concept_labels();
      label_vectors_ = embedder_->embed(labels);
    });
  }

  std::shared_ptr<const AssertionIndex> index_;
  std::shared_ptr<const Embedder> embedder_;
  mutable std::once_flag labels_once_;
  mutable std::vector<EmbeddingVector> label_vectors_;
};

inline std::vector<RelationConcept> match_assertions(const std::string& answer, const AssertionMatcher& matcher,
                                                     double tau) {
  return matcher.match(answer, tau);
}

}  // namespace gg
