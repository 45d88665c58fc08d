#pragma once

#include <cstdlib>
#include <memory>
#include <string>
#include <utility>

#include "guessgame/agents/backend.hpp"
#include "guessgame/core/errors.hpp"
#include "guessgame/core/json_io.hpp"
#include "guessgame/entropy/embedding.hpp"
#include "httplib.h"

// <resolv.h> defines _res as a macro, which breaks Eigen parameter names.
#ifdef _res
#undef _res
#endif

namespace gg {

struct HttpUrl {
  std::string base;  // scheme://host[:port]
  std::string path;  // begins with '/'
};

inline HttpUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw DataError("endpoint is not a URL: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

inline bool transient_status(int status) { return status == 429 || status == 408 || status >= 500; }

/// Posts JSON and returns the parsed JSON reply, mapping failures onto
/// TransportError (transient for timeouts, connection errors, 429 and 5xx).
inline Json post_json(const std::string& url, const Json& body, double timeout_seconds,
                      const std::string& bearer_token) {
  auto [base, path] = split_url(url);
  httplib::Client client(base);
  auto secs = static_cast<time_t>(timeout_seconds);
  auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw TransportError("request to " + url + " failed: " + httplib::to_string(res.error()), 0, true);
  if (res->status != 200 && res->status != 201) {
    throw TransportError("HTTP " + std::to_string(res->status) + " from " + url, res->status,
                         transient_status(res->status));
  }
  try {
    return Json::parse(res->body);
  } catch (const std::exception& e) {
    throw TransportError("invalid JSON from " + url + ": " + e.what());
  }
}

inline std::string env_or(const char* name, std::string fallback = {}) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::move(fallback);
}

/// Chat backend speaking {model, messages[{role, content}], temperature, top_p} -> {text}.
/// The bearer token comes from GG_API_TOKEN unless given explicitly.
class HttpChatBackend final : public ChatBackend {
 public:
  explicit HttpChatBackend(std::string url, std::string token = env_or("GG_API_TOKEN"))
      : url_(std::move(url)), token_(std::move(token)) {}

  std::string complete(const ChatRequest& request) override {
    Json body;
    body["model"] = request.model;
    Json msgs = Json::array();
    for (const auto& m : request.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    body["messages"] = std::move(msgs);
    body["temperature"] = request.temperature;
    body["top_p"] = request.top_p;
    auto reply = post_json(url_, body, request.timeout_seconds, token_);
    if (!reply.contains("text") || !reply.at("text").is_string())
      throw TransportError("chat reply from " + url_ + " lacks a 'text' field");
    return reply.at("text").get<std::string>();
  }

 private:
  std::string url_;
  std::string token_;
};

/// Embedding endpoint: POST {texts: [...]} -> {vectors: [[...]]}.
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(std::string url, std::size_t dim, double timeout_seconds = 60,
               std::string token = env_or("GG_API_TOKEN"))
      : url_(std::move(url)), dim_(dim), timeout_(timeout_seconds), token_(std::move(token)) {}

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override {
    std::vector<EmbeddingVector> out;
    constexpr std::size_t kBatch = 256;
    for (std::size_t start = 0; start < texts.size(); start += kBatch) {
      Json body;
      body["texts"] = Json::array();
      for (std::size_t i = start; i < std::min(texts.size(), start + kBatch); ++i) body["texts"].push_back(texts[i]);
      Json reply;
      try {
        reply = post_json(url_, body, timeout_, token_);
      } catch (const TransportError& e) {
        throw EmbedderError(e.what());
      }
      const auto& vectors = reply.at("vectors");
      if (vectors.size() != body["texts"].size()) throw EmbedderError("embedding count mismatch from " + url_);
      for (const auto& v : vectors) {
        auto values = v.get<std::vector<double>>();
        if (values.size() != dim_) throw EmbedderError("embedding dimension mismatch from " + url_);
        out.emplace_back(std::move(values));
      }
    }
    return out;
  }
  std::size_t dimension() const override { return dim_; }

 private:
  std::string url_;
  std::size_t dim_;
  double timeout_;
  std::string token_;
};

}  // namespace gg
