#pragma once

// Chat-completion HTTP adapter for JudgeTransport. Link poemetric_http (adds
// OpenSSL for https endpoints when available).

#include <chrono>
#include <cstdlib>
#include <string>
#include <utility>

#include "httplib.h"
#include "json.hpp"

#include "poemetric/judge_client.hpp"

namespace poemetric {

struct HttpJudgeConfig {
  // Full URL of the chat-completion resource, e.g.
  // "https://api.example.com/v1/chat/completions".
  std::string endpoint;
  std::string model;
  // Name of the environment variable holding the bearer token. The key
  // itself is never part of the configuration.
  std::string api_key_env = "POEMETRIC_API_KEY";
  std::chrono::seconds timeout{120};
};

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline ParsedUrl parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw InvalidArgument("endpoint must be an http(s) URL: " + url);
  const std::string scheme = text::to_lower(url.substr(0, scheme_end));
  if (scheme != "http" && scheme != "https") throw InvalidArgument("unsupported endpoint scheme: " + scheme);
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl p;
  p.origin = url.substr(0, path_start);
  p.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (p.origin.size() <= scheme_end + 3) throw InvalidArgument("endpoint has no host: " + url);
  return p;
}

class HttpJudgeTransport : public JudgeTransport {
 public:
  explicit HttpJudgeTransport(HttpJudgeConfig config)
      : config_(std::move(config)), url_(parse_endpoint(config_.endpoint)) {
    if (config_.model.empty()) throw InvalidArgument("judge model name is empty");
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  }

  std::string judge_name() const override { return config_.model; }

  std::string complete(const std::string& prompt) override {
    // One client per call keeps concurrent callers independent.
    httplib::Client client(url_.origin);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    const json body = {{"model", config_.model},
                       {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
    auto res = client.Post(url_.path, headers, body.dump(), "application/json");
    if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()), true);
    if (res->status == 429 || res->status >= 500)
      throw TransportError("endpoint returned HTTP " + std::to_string(res->status), true);
    if (res->status != 200)
      throw TransportError("endpoint returned HTTP " + std::to_string(res->status) + ": " +
                               res->body.substr(0, 200),
                           false);
    try {
      const auto reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw TransportError(std::string("unexpected response body: ") + e.what(), false);
    }
  }

 private:
  HttpJudgeConfig config_;
  ParsedUrl url_;
  std::string api_key_;
};

}  // namespace poemetric
