#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "guessgame/cli/batch.hpp"
#include "guessgame/cli/manifest.hpp"
#include "guessgame/engine/game.hpp"
#include "httplib.h"

#ifdef _res
#undef _res
#endif

namespace gg {

enum class SessionMode { AutoGame, HumanGuesser };

inline std::string_view to_string(SessionMode m) { return m == SessionMode::AutoGame ? "auto" : "human"; }

inline std::string_view to_string(GameStatus s) {
  switch (s) {
    case GameStatus::InProgress: return "InProgress";
    case GameStatus::Success: return "Success";
    case GameStatus::Failure: return "Failure";
  }
  return "?";
}

inline std::string utc_timestamp() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// A handler result: HTTP status plus JSON body.
struct Reply {
  int status = 200;
  Json body;
};

inline Reply error_reply(int status, const std::string& message) { return {status, {{"error", message}}}; }

struct ServerEvent {
  int id = 0;
  std::string type;  // turn | violation | outcome
  Json data;
};

class Session {
 public:
  Session(std::string id, SessionMode mode, GameConfig config, std::string secret, GameAgentSet agents,
          const ScoringContext& ctx)
      : id_(std::move(id)),
        mode_(mode),
        created_at_(utc_timestamp()),
        state_(std::move(config), std::move(secret)),
        agents_(std::move(agents)),
        scorer_(ctx, state_.config, id_) {}

  ~Session() { stop(); }

  const std::string& id() const noexcept { return id_; }
  SessionMode mode() const noexcept { return mode_; }

  /// Human turn. Returns 409 when another turn holds the session.
  Reply post_question(const std::string& question) {
    std::unique_lock turn(turn_mu_, std::try_to_lock);
    if (!turn.owns_lock()) return error_reply(409, "a turn is already in flight for this session");
    if (mode_ != SessionMode::HumanGuesser) return error_reply(409, "session is an automatic game");
    if (state_.status != GameStatus::InProgress) return error_reply(410, "session has finished");
    if (text::trim(question).empty()) return error_reply(422, "question must be non-empty");

    auto v = validate_question(question, state_, *agents_.classifier);
    if (!v.verdict.is_valid()) {
      Json body = {{"accepted", false},
                   {"violation", std::string(to_string(v.verdict.reason()))},
                   {"question", question},
                   {"remaining_turns", state_.remaining_turns()},
                   {"status", std::string(to_string(state_.status))}};
      push_event("violation", body);
      return {200, body};
    }
    std::string reply;
    try {
      reply = agents_.oracle->respond(state_.secret, state_.history, question);
    } catch (const TransportError& e) {
      std::lock_guard lk(data_mu_);
      state_.status = GameStatus::Failure;
      state_.error = std::string("agent transport error: ") + e.what();
      push_outcome_locked();
      return error_reply(502, *state_.error);
    }
    TurnRecord t;
    t.index = static_cast<int>(state_.history.size()) + 1;
    t.question = std::string(text::strip_marker(question, kGuesserMarker));
    t.q_type = v.type;
    t.q_format = v.format;
    t.answer = std::string(text::strip_marker(reply, kOracleMarker));
    t.is_direct_guess = v.type == QuestionType::Direct;
    t.verdict = t.is_direct_guess ? judge_oracle_reply(reply) : TurnVerdict::Continue;
    auto ig = scorer_.score(t);
    Json body;
    {
      std::lock_guard lk(data_mu_);
      accept_turn(state_, t);
      trace_.push_back(ig);
      body = turn_event_locked(t, ig);
      push_event_locked("turn", body);
      if (state_.status != GameStatus::InProgress) push_outcome_locked();
    }
    body["accepted"] = true;
    if (state_.status != GameStatus::InProgress) {
      body["outcome"] = std::string(to_string(state_.status));
      body["secret_object"] = state_.secret;
    }
    return {200, body};
  }

  /// Starts the background loop for an automatic game.
  void start_auto() {
    worker_ = std::thread([this] {
      std::lock_guard turn(turn_mu_);
      while (!stopping_ && state_.status == GameStatus::InProgress) {
        // Only this thread writes state_, so it can step on a copy and
        // publish the result under the data lock.
        GameState work = state_;
        std::optional<StepResult> r;
        std::optional<std::string> failure;
        try {
          r = step(work, agents_.view(), &scorer_);
        } catch (const std::exception& e) {
          failure = std::string("game aborted: ") + e.what();
        }
        std::lock_guard lk(data_mu_);
        if (failure) {
          state_.status = GameStatus::Failure;
          state_.error = failure;
        } else {
          state_ = std::move(work);
        }
        if (r) {
          trace_.push_back(r->ig);
          push_event_locked("turn", turn_event_locked(r->turn, r->ig));
        }
        if (state_.status != GameStatus::InProgress) push_outcome_locked();
      }
    });
  }

  void stop() {
    stopping_ = true;
    if (worker_.joinable()) worker_.join();
    cv_.notify_all();
  }

  Json descriptor() const {
    std::lock_guard lk(data_mu_);
    return descriptor_locked();
  }

  Json snapshot() const {
    std::lock_guard lk(data_mu_);
    Json j = descriptor_locked();
    j["turns"] = Json::array();
    for (const auto& t : state_.history) j["turns"].push_back(to_json(t));
    if (state_.error) j["error"] = *state_.error;
    return j;
  }

  Json belief(std::size_t k) const {
    std::lock_guard lk(data_mu_);
    Json top = Json::array();
    for (const auto& [c, m] : scorer_.belief().top(k)) top.push_back({{"concept", c}, {"mass", m}});
    Json trace = Json::array();
    for (const auto& r : trace_) trace.push_back(to_json(r));
    return {{"session_id", id_}, {"top_k", top}, {"ig_trace", trace}};
  }

  /// Events with id > after, blocking up to `wait` for new ones. Sets `closed`
  /// once the outcome event has been returned.
  std::vector<ServerEvent> events_after(int after, std::chrono::milliseconds wait, bool& closed) const {
    std::unique_lock lk(data_mu_);
    cv_.wait_for(lk, wait, [&] { return stopping_ || (!events_.empty() && events_.back().id > after); });
    std::vector<ServerEvent> out;
    for (const auto& e : events_)
      if (e.id > after) out.push_back(e);
    closed = stopping_ || (!events_.empty() && events_.back().type == "outcome");
    return out;
  }

  bool finished() const {
    std::lock_guard lk(data_mu_);
    return state_.status != GameStatus::InProgress;
  }

  std::pair<Transcript, std::vector<IGRecord>> record() const {
    std::lock_guard lk(data_mu_);
    return {to_transcript(state_, id_), trace_};
  }

 private:
  Json descriptor_locked() const {
    const auto& c = state_.config;
    Json types = Json::array();
    for (auto t : c.allowed_types.members()) types.push_back(std::string(to_string(t)));
    Json j = {{"session_id", id_},
              {"mode", std::string(to_string(mode_))},
              {"created_at", created_at_},
              {"t_max", c.t_max},
              {"constraints",
               {{"allowed_types", types},
                {"repeat_limit_k", c.repeat_limit_k ? Json(*c.repeat_limit_k) : Json(nullptr)},
                {"forced_open", c.forced_open}}},
              {"status", std::string(to_string(state_.status))},
              {"turn_count", state_.history.size()},
              {"remaining_turns", state_.remaining_turns()}};
    if (mode_ == SessionMode::AutoGame || state_.status != GameStatus::InProgress) j["secret_object"] = state_.secret;
    return j;
  }

  Json turn_event_locked(const TurnRecord& t, const IGRecord& ig) const {
    return {{"turn", t.index},
            {"question", t.question},
            {"type", std::string(to_string(t.q_type))},
            {"format", std::string(to_string(t.q_format))},
            {"answer", t.answer},
            {"verdict", std::string(to_string(t.verdict))},
            {"ig", {{"bayes", ig.bayes_ig}, {"entropy", ig.entropy_ig}}},
            {"remaining_turns", state_.remaining_turns()},
            {"status", std::string(to_string(state_.status))}};
  }

  void push_event(const std::string& type, Json data) {
    std::lock_guard lk(data_mu_);
    push_event_locked(type, std::move(data));
  }

  void push_event_locked(const std::string& type, Json data) {
    events_.push_back({static_cast<int>(events_.size()) + 1, type, std::move(data)});
    cv_.notify_all();
  }

  void push_outcome_locked() {
    Json data = {{"outcome", std::string(to_string(state_.status))},
                 {"turn_count", state_.history.size()},
                 {"secret_object", state_.secret}};
    if (state_.error) data["error"] = *state_.error;
    push_event_locked("outcome", std::move(data));
    if (on_finish) on_finish(to_transcript(state_, id_), trace_);
  }

 public:
  /// Called once when the game ends, with the data lock held.
  std::function<void(const Transcript&, const std::vector<IGRecord>&)> on_finish;

 private:
  std::string id_;
  SessionMode mode_;
  std::string created_at_;
  GameState state_;
  GameAgentSet agents_;
  GameScorer scorer_;
  std::vector<IGRecord> trace_;
  std::vector<ServerEvent> events_;
  std::mutex turn_mu_;
  mutable std::mutex data_mu_;
  mutable std::condition_variable cv_;
  std::atomic<bool> stopping_{false};
  std::thread worker_;
};

/// Session registry and request handlers, independent of the HTTP layer.
class GameService {
 public:
  using AgentFactory = std::function<GameAgentSet(std::uint64_t seed)>;

  explicit GameService(std::shared_ptr<const World> world, AgentFactory factory = {})
      : world_(std::move(world)), factory_(std::move(factory)), rng_(world_->manifest.config.seed) {
    if (!factory_) factory_ = [w = world_](std::uint64_t seed) { return make_agents(*w, seed); };
  }

  ~GameService() {
    std::lock_guard lk(mu_);
    for (auto& [_, s] : sessions_) s->stop();
  }

  /// Finished sessions are appended to <dir>/sessions.jsonl and ig_trace.jsonl.
  void set_flush_dir(std::filesystem::path dir) { flush_dir_ = std::move(dir); }

  Reply create_session(const Json& body) {
    GameConfig config = world_->manifest.config;
    SessionMode mode = SessionMode::HumanGuesser;
    std::string secret;
    try {
      if (!body.is_object()) return error_reply(422, "request body must be a JSON object");
      if (body.contains("config")) {
        Json merged = to_json(config);
        for (const auto& [k, v] : body.at("config").items()) merged[k] = v;
        config = game_config_from_json(merged);
      }
      config.validate();
      auto m = body.value("mode", std::string("human"));
      if (m == "auto") {
        mode = SessionMode::AutoGame;
      } else if (m != "human") {
        return error_reply(422, "mode must be 'human' or 'auto'");
      }
      std::string selector = body.value("secret", std::string("random"));
      if (body.contains("object")) selector = body.at("object").get<std::string>();
      if (selector == "random") {
        std::lock_guard lk(mu_);
        secret = world_->corpus.objects[rng_() % world_->corpus.objects.size()];
      } else {
        auto name = text::normalize(selector);
        const auto& objs = world_->corpus.objects;
        if (std::find(objs.begin(), objs.end(), name) == objs.end())
          return error_reply(404, "unknown object '" + selector + "'");
        secret = name;
      }
    } catch (const Error& e) {
      return error_reply(422, e.what());
    } catch (const nlohmann::json::exception& e) {
      return error_reply(422, std::string("malformed request: ") + e.what());
    }

    std::shared_ptr<Session> s;
    {
      std::lock_guard lk(mu_);
      auto id = "s" + std::to_string(++counter_);
      auto agents = factory_(game_seed(config.seed, secret) ^ counter_);
      auto ctx = world_->scoring_context(agents.interpreter);
      s = std::make_shared<Session>(id, mode, config, secret, std::move(agents), ctx);
      sessions_[id] = s;
    }
    if (flush_dir_) s->on_finish = [this](const Transcript& t, const std::vector<IGRecord>& trace) { flush(t, trace); };
    auto desc = s->descriptor();
    if (mode == SessionMode::AutoGame) s->start_auto();
    return {201, desc};
  }

  Reply post_question(const std::string& id, const Json& body) {
    auto s = find(id);
    if (!s) return error_reply(404, "unknown session " + id);
    if (!body.is_object() || !body.contains("question") || !body.at("question").is_string())
      return error_reply(422, "body must be {\"question\": \"...\"}");
    try {
      return s->post_question(body.at("question").get<std::string>());
    } catch (const Error& e) {
      return error_reply(500, e.what());
    }
  }

  Reply get_session(const std::string& id) const {
    auto s = find(id);
    if (!s) return error_reply(404, "unknown session " + id);
    return {200, s->snapshot()};
  }

  Reply get_belief(const std::string& id, long k) const {
    auto s = find(id);
    if (!s) return error_reply(404, "unknown session " + id);
    if (k < 0) return error_reply(422, "k must be >= 0");
    return {200, s->belief(static_cast<std::size_t>(k))};
  }

  /// Post hoc scoring of uploaded JSONL transcripts. No Guesser/Oracle calls.
  Reply score(const std::string& jsonl, std::shared_ptr<const InterpreterAgent> interpreter = nullptr) const {
    std::vector<Transcript> transcripts;
    try {
      std::istringstream in(jsonl);
      transcripts = parse_transcripts(in);
    } catch (const Error& e) {
      return error_reply(422, e.what());
    }
    if (transcripts.empty()) return error_reply(422, "no transcripts in upload");
    if (!interpreter) interpreter = default_interpreter();
    auto ctx = world_->scoring_context(interpreter);
    Json records = Json::array();
    Json games = Json::array();
    for (const auto& t : transcripts) {
      auto trace = score_transcript(t, ctx);
      double bayes = 0, entropy = 0;
      for (const auto& r : trace) {
        records.push_back(to_json(r));
        bayes += r.bayes_ig;
        entropy += r.entropy_ig;
      }
      double n = std::max<double>(1, static_cast<double>(trace.size()));
      games.push_back({{"game_id", t.game_id},
                       {"turn_count", t.turn_count},
                       {"outcome", std::string(to_string(t.outcome))},
                       {"mean_bayes_ig", bayes / n},
                       {"mean_entropy_ig", entropy / n}});
    }
    return {200, {{"records", records}, {"games", games}}};
  }

  std::shared_ptr<Session> find(const std::string& id) const {
    std::lock_guard lk(mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  const World& world() const { return *world_; }

 private:
  std::shared_ptr<const InterpreterAgent> default_interpreter() const {
    if (!world_->manifest.agents.count("interpreter")) return nullptr;
    return std::make_shared<InterpreterAgent>(world_->agent_config(AgentRole::Interpreter),
                                              world_->backend("interpreter", world_->manifest.config.seed));
  }

  void flush(const Transcript& t, const std::vector<IGRecord>& trace) {
    std::lock_guard lk(flush_mu_);
    std::filesystem::create_directories(*flush_dir_);
    std::ofstream tr(*flush_dir_ / "sessions.jsonl", std::ios::app);
    tr << to_json(t).dump() << "\n";
    std::ofstream ig(*flush_dir_ / "ig_trace.jsonl", std::ios::app);
    for (const auto& r : trace) ig << to_json(r).dump() << "\n";
  }

  std::shared_ptr<const World> world_;
  AgentFactory factory_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
  std::mt19937_64 rng_;
  std::optional<std::filesystem::path> flush_dir_;
  std::mutex flush_mu_;
};

namespace service_detail {

inline void send(httplib::Response& res, const Reply& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

inline Json parse_body(const httplib::Request& req, Reply& error) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    error = error_reply(422, std::string("body is not valid JSON: ") + e.what());
    return nullptr;
  }
}

inline std::string sse_frame(const ServerEvent& e) {
  return "id: " + std::to_string(e.id) + "\nevent: " + e.type + "\ndata: " + e.data.dump() + "\n\n";
}

}  // namespace service_detail

/// HTTP+JSON binding of GameService, with server-sent events per session.
class HttpServer {
 public:
  explicit HttpServer(GameService& service) : service_(service) { routes(); }
  ~HttpServer() { stop(); }

  /// Binds and serves on a background thread; port 0 picks a free port.
  int start(const std::string& host, int port) {
    int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw DataError("cannot listen on " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return bound;
  }

  /// Serves on the calling thread until stop().
  void run(const std::string& host, int port) {
    if (!server_.listen(host, port)) throw DataError("cannot listen on " + host + ":" + std::to_string(port));
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  httplib::Server& raw() { return server_; }

 private:
  void routes() {
    using namespace service_detail;
    server_.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      Reply err;
      auto body = parse_body(req, err);
      send(res, body.is_null() ? err : service_.create_session(body));
    });
    server_.Post(R"(/sessions/([^/]+)/question)", [this](const httplib::Request& req, httplib::Response& res) {
      Reply err;
      auto body = parse_body(req, err);
      send(res, body.is_null() ? err : service_.post_question(req.matches[1], body));
    });
    server_.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, service_.get_session(req.matches[1]));
    });
    server_.Get(R"(/sessions/([^/]+)/belief)", [this](const httplib::Request& req, httplib::Response& res) {
      long k = 10;
      if (req.has_param("k")) {
        try {
          k = std::stol(req.get_param_value("k"));
        } catch (const std::exception&) {
          send(res, error_reply(422, "k must be an integer"));
          return;
        }
      }
      send(res, service_.get_belief(req.matches[1], k));
    });
    server_.Get(R"(/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
      auto session = service_.find(req.matches[1]);
      if (!session) {
        send(res, error_reply(404, "unknown session " + std::string(req.matches[1])));
        return;
      }
      int last = 0;
      if (req.has_header("Last-Event-ID")) {
        try {
          last = std::stoi(req.get_header_value("Last-Event-ID"));
        } catch (const std::exception&) {
          last = 0;
        }
      }
      auto cursor = std::make_shared<int>(last);
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider("text/event-stream", [session, cursor](size_t, httplib::DataSink& sink) {
        bool closed = false;
        auto events = session->events_after(*cursor, std::chrono::milliseconds(250), closed);
        for (const auto& e : events) {
          auto frame = sse_frame(e);
          if (!sink.write(frame.data(), frame.size())) return false;
          *cursor = e.id;
        }
        if (closed) sink.done();
        return true;
      });
    });
    server_.Post("/score", [this](const httplib::Request& req, httplib::Response& res) {
      std::shared_ptr<const InterpreterAgent> interpreter;
      if (req.has_param("interpreter")) {
        try {
          auto cfg = AgentConfig::defaults_for(AgentRole::Interpreter);
          cfg.endpoint = req.get_param_value("interpreter");
          if (req.has_param("model")) cfg.model_name = req.get_param_value("model");
          if (req.has_param("temperature")) cfg.temperature = std::stod(req.get_param_value("temperature"));
          std::shared_ptr<ChatBackend> backend;
          if (cfg.endpoint == "mock:interpreter") {
            backend = mock::interpreter_backend();
          } else if (cfg.endpoint.find("://") != std::string::npos) {
            backend = std::make_shared<HttpChatBackend>(cfg.endpoint);
          } else {
            send(res, error_reply(422, "unsupported interpreter endpoint"));
            return;
          }
          interpreter = std::make_shared<InterpreterAgent>(cfg, backend);
        } catch (const std::exception& e) {
          send(res, error_reply(422, e.what()));
          return;
        }
      }
      send(res, service_.score(req.body, interpreter));
    });
  }

  GameService& service_;
  httplib::Server server_;
  std::thread thread_;
};

inline std::pair<std::string, int> parse_listen(const std::string& v) {
  auto colon = v.rfind(':');
  if (colon == std::string::npos) throw DataError("listen address must be host:port, got '" + v + "'");
  try {
    return {v.substr(0, colon), std::stoi(v.substr(colon + 1))};
  } catch (const std::exception&) {
    throw DataError("bad port in listen address '" + v + "'");
  }
}

/// "host:port" from GG_LISTEN or the given default.
inline std::pair<std::string, int> listen_address(const std::string& fallback = "127.0.0.1:8080") {
  return parse_listen(env_or("GG_LISTEN", fallback));
}

}  // namespace gg
