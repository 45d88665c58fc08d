#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "guessgame/agents/agents.hpp"
#include "guessgame/agents/http_backend.hpp"
#include "guessgame/agents/mock_world.hpp"
#include "guessgame/core/corpus.hpp"
#include "guessgame/core/json_io.hpp"
#include "guessgame/engine/scorers.hpp"
#include "guessgame/entropy/conceptnet.hpp"
#include "guessgame/entropy/embedding.hpp"

namespace gg {

inline constexpr int kManifestSchemaVersion = 1;

/// A file input pinned by its hash. An empty sha256 means "not pinned".
struct PinnedFile {
  std::filesystem::path path;
  std::string sha256;
};

struct EndpointSpec {
  std::string endpoint;  // "mock:guesser", "mock:chaos", "mock:oracle", "mock:interpreter", "rules", or a URL
  std::string model;
};

struct EmbedderSpec {
  std::string kind = "hashing";  // hashing | table | http
  std::size_t dim = 384;
  std::optional<std::filesystem::path> table;
  std::string url;
};

/// Everything needed to reproduce a batch run.
struct RunManifest {
  int schema_version = kManifestSchemaVersion;
  GameConfig config;
  PinnedFile corpus;
  std::optional<PinnedFile> index;    // ConceptNet index (JSONL) for the entropy metric
  std::optional<PinnedFile> objects;  // object table for mock agents
  EmbedderSpec embedder;
  std::map<std::string, EndpointSpec> agents;  // guesser, oracle, checker, interpreter
  bool restrict_candidates_to_corpus = true;
  std::string created_at;
  std::filesystem::path output_dir = "out";
  std::filesystem::path base_dir;  // directory of the manifest file; relative paths resolve here

  std::filesystem::path resolve(const std::filesystem::path& p) const {
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  }
  const EndpointSpec& agent(const std::string& role) const {
    auto it = agents.find(role);
    if (it == agents.end()) throw DataError("manifest has no agent for role '" + role + "'");
    return it->second;
  }
};

namespace manifest_detail {

inline PinnedFile pinned(const Json& j, const char* what) {
  if (j.is_string()) return {j.get<std::string>(), ""};
  if (!j.is_object() || !j.contains("path")) throw DataError(std::string("manifest ") + what + " needs a path");
  return {j.at("path").get<std::string>(), j.value("sha256", std::string())};
}

inline Json pinned_json(const PinnedFile& f) { return {{"path", f.path.generic_string()}, {"sha256", f.sha256}}; }

}  // namespace manifest_detail

inline RunManifest manifest_from_json(const Json& j) {
  using namespace manifest_detail;
  try {
    RunManifest m;
    if (!j.is_object()) throw DataError("manifest must be a JSON object");
    m.schema_version = j.value("schema_version", kManifestSchemaVersion);
    if (m.schema_version != kManifestSchemaVersion)
      throw DataError("unsupported manifest schema_version " + std::to_string(m.schema_version));
    if (j.contains("config")) m.config = game_config_from_json(j.at("config"));
    if (j.contains("seed")) m.config.seed = j.at("seed").get<std::uint64_t>();
    if (!j.contains("corpus")) throw DataError("manifest needs a corpus");
    m.corpus = pinned(j.at("corpus"), "corpus");
    if (j.contains("index") && !j.at("index").is_null()) m.index = pinned(j.at("index"), "index");
    if (j.contains("objects") && !j.at("objects").is_null()) m.objects = pinned(j.at("objects"), "objects");
    if (j.contains("embedder")) {
      const auto& e = j.at("embedder");
      m.embedder.kind = e.value("kind", m.embedder.kind);
      m.embedder.dim = e.value("dim", m.embedder.dim);
      if (e.contains("table")) m.embedder.table = e.at("table").get<std::string>();
      m.embedder.url = e.value("url", std::string());
    }
    if (j.contains("agents")) {
      for (const auto& [role, spec] : j.at("agents").items()) {
        m.agents[role] = {spec.value("endpoint", std::string()), spec.value("model", std::string())};
      }
    }
    m.restrict_candidates_to_corpus = j.value("restrict_candidates_to_corpus", true);
    m.created_at = j.value("created_at", std::string());
    m.output_dir = j.value("output_dir", std::string("out"));
    m.config.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
}

inline Json to_json(const RunManifest& m) {
  using namespace manifest_detail;
  Json j;
  j["schema_version"] = m.schema_version;
  j["config"] = to_json(m.config);
  j["corpus"] = pinned_json(m.corpus);
  j["index"] = m.index ? pinned_json(*m.index) : Json(nullptr);
  j["objects"] = m.objects ? pinned_json(*m.objects) : Json(nullptr);
  Json e = {{"kind", m.embedder.kind}, {"dim", m.embedder.dim}};
  if (m.embedder.table) e["table"] = m.embedder.table->generic_string();
  if (!m.embedder.url.empty()) e["url"] = m.embedder.url;
  j["embedder"] = e;
  j["agents"] = Json::object();
  for (const auto& [role, spec] : m.agents) j["agents"][role] = {{"endpoint", spec.endpoint}, {"model", spec.model}};
  j["restrict_candidates_to_corpus"] = m.restrict_candidates_to_corpus;
  j["created_at"] = m.created_at;
  j["output_dir"] = m.output_dir.generic_string();
  return j;
}

/// Environment overrides: GG_CORPUS, GG_INDEX, GG_EMBED_URL, GG_CHAT_URL (all
/// URL agents) and GG_<ROLE>_URL. Overridden files are no longer hash-pinned.
inline void apply_env_overrides(RunManifest& m) {
  if (auto v = env_or("GG_CORPUS"); !v.empty()) m.corpus = {v, ""};
  if (auto v = env_or("GG_INDEX"); !v.empty()) m.index = PinnedFile{v, ""};
  if (auto v = env_or("GG_EMBED_URL"); !v.empty()) {
    m.embedder.kind = "http";
    m.embedder.url = v;
  }
  auto chat_url = env_or("GG_CHAT_URL");
  for (auto& [role, spec] : m.agents) {
    std::string upper;
    for (char c : role) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    auto v = env_or(("GG_" + upper + "_URL").c_str());
    if (!v.empty()) {
      spec.endpoint = v;
    } else if (!chat_url.empty() && spec.endpoint.find("://") != std::string::npos) {
      spec.endpoint = chat_url;
    }
  }
}

inline RunManifest load_manifest(const std::filesystem::path& p, bool env_overrides = true) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open manifest " + p.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest " + p.string() + " is not valid JSON: " + e.what());
  }
  auto m = manifest_from_json(j);
  m.base_dir = p.parent_path();
  if (env_overrides) apply_env_overrides(m);
  return m;
}

inline void verify_pin(const RunManifest& m, const PinnedFile& f, const char* what) {
  auto path = m.resolve(f.path);
  if (!std::filesystem::exists(path)) throw DataError(std::string(what) + " not found: " + path.string());
  if (f.sha256.empty()) return;
  auto actual = file_sha256(path);
  if (actual != f.sha256)
    throw DataError(std::string(what) + " hash mismatch for " + path.string() + ": manifest " + f.sha256 +
                    ", file " + actual);
}

/// Shared, immutable inputs for a run or a server.
struct World {
  RunManifest manifest;
  ObjectCorpus corpus;
  std::shared_ptr<const mock::ObjectTable> objects;
  std::shared_ptr<const AssertionMatcher> matcher;

  bool uses_mock() const {
    for (const auto& [_, spec] : manifest.agents)
      if (spec.endpoint.starts_with("mock:")) return true;
    return false;
  }

  std::shared_ptr<const Embedder> make_embedder() const {
    const auto& e = manifest.embedder;
    if (e.kind == "hashing") return std::make_shared<HashingEmbedder>(e.dim);
    if (e.kind == "table") {
      if (!e.table) throw DataError("table embedder needs a table path");
      auto fallback = std::make_shared<HashingEmbedder>(e.dim);
      return std::make_shared<TableEmbedder>(TableEmbedder::load(manifest.resolve(*e.table), fallback));
    }
    if (e.kind == "http") {
      if (e.url.empty()) throw DataError("http embedder needs a url");
      return std::make_shared<CachingEmbedder>(std::make_shared<HttpEmbedder>(e.url, e.dim));
    }
    throw DataError("unknown embedder kind '" + e.kind + "'");
  }

  static World build(RunManifest m) {
    World w;
    verify_pin(m, m.corpus, "corpus");
    w.corpus = load_corpus(m.resolve(m.corpus.path));
    if (m.objects) {
      verify_pin(m, *m.objects, "objects table");
      w.objects = std::make_shared<mock::ObjectTable>(mock::ObjectTable::load(m.resolve(m.objects->path)));
    }
    if (m.index) {
      verify_pin(m, *m.index, "index");
      auto idx = std::make_shared<AssertionIndex>(load_index(m.resolve(m.index->path)));
      w.manifest = m;  // make_embedder reads the embedder spec
      w.matcher = std::make_shared<AssertionMatcher>(idx, w.make_embedder());
    }
    w.manifest = std::move(m);
    if (w.uses_mock() && !w.objects) throw DataError("mock agents need an objects table");
    return w;
  }

  ScoringContext scoring_context(std::shared_ptr<const InterpreterAgent> interpreter) const {
    ScoringContext ctx;
    if (interpreter) ctx.evidence = evidence_from(std::move(interpreter));
    ctx.matcher = matcher;
    if (matcher && manifest.restrict_candidates_to_corpus) ctx.vocabulary = corpus.objects;
    return ctx;
  }

  /// Backend for a role. Mock guessers take the per-game seed.
  std::shared_ptr<ChatBackend> backend(const std::string& role, std::uint64_t game_seed) const {
    const auto& ep = manifest.agent(role).endpoint;
    if (ep == "mock:oracle") return mock::oracle_backend(objects);
    if (ep == "mock:guesser") return mock::guesser_backend(objects, mock::profile_for(game_seed), game_seed);
    if (ep == "mock:chaos") return mock::chaos_guesser_backend(objects, game_seed);
    if (ep == "mock:interpreter") return mock::interpreter_backend();
    if (ep.find("://") != std::string::npos) return std::make_shared<HttpChatBackend>(ep);
    throw DataError("unsupported endpoint '" + ep + "' for role " + role);
  }

  AgentConfig agent_config(AgentRole role) const {
    auto c = AgentConfig::defaults_for(role);
    const auto& spec = manifest.agent(text::to_lower(to_string(role)));
    c.endpoint = spec.endpoint;
    c.model_name = spec.model;
    if (role == AgentRole::Guesser || role == AgentRole::Oracle) c.temperature = manifest.config.temperature;
    return c;
  }
};

/// Per-game seed derived from the run seed and the object name.
inline std::uint64_t game_seed(std::uint64_t run_seed, const std::string& object) {
  return run_seed ^ text::fnv1a64(object);
}

}  // namespace gg
