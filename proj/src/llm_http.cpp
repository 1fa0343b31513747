#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <cstdlib>
#include <thread>

#include "json.hpp"
#include "pathsql/llm.hpp"

namespace pathsql {

using json = nlohmann::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error("endpoint '" + url + "' has no scheme");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool transient(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpLlm::HttpLlm(HttpLlmConfig config) : config_(std::move(config)) {
  if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

std::string HttpLlm::request_body(const HttpLlmConfig& config, const CompletionRequest& req) {
  json body;
  body["model"] = config.model;
  body["messages"] = json::array({{{"role", "user"}, {"content", req.prompt}}});
  body["n"] = req.n_samples;
  body["temperature"] = req.temperature;
  return body.dump();
}

std::vector<std::string> HttpLlm::parse_choices(const std::string& body) {
  const auto j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array())
    throw Error("response has no \"choices\" array");
  std::vector<std::string> out;
  for (const auto& c : j["choices"]) {
    const auto& content = c.at("message").at("content");
    out.push_back(content.is_string() ? content.get<std::string>() : std::string());
  }
  return out;
}

std::vector<std::string> HttpLlm::complete(const CompletionRequest& req) {
  check_request(req);
  const auto digest = prompt_digest(req.prompt);
  if (api_key_.empty())
    throw LlmError("auth", digest, "environment variable " + config_.api_key_env + " is not set");

  const auto ep = split_url(config_.endpoint);
  httplib::Client client(ep.origin);
  client.set_read_timeout(config_.timeout);
  client.set_connection_timeout(std::chrono::seconds(30));
  const httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};

  std::vector<std::string> out;
  while (static_cast<int>(out.size()) < req.n_samples) {
    CompletionRequest part = req;
    part.n_samples = req.n_samples - static_cast<int>(out.size());
    const auto body = request_body(config_, part);
    auto delay = config_.backoff;
    for (int attempt = 0;; ++attempt) {
      auto res = client.Post(ep.path, headers, body, "application/json");
      if (res && res->status == 200) {
        std::vector<std::string> got;
        try {
          got = parse_choices(res->body);
        } catch (const std::exception& e) {
          throw LlmError("transport", digest, std::string("malformed completion response: ") + e.what());
        }
        if (got.empty()) throw LlmError("transport", digest, "completion returned no choices");
        for (auto& g : got)
          if (static_cast<int>(out.size()) < req.n_samples) out.push_back(std::move(g));
        break;
      }
      if (res && (res->status == 401 || res->status == 403))
        throw LlmError("auth", digest, "provider rejected credentials (HTTP " + std::to_string(res->status) + ")");
      const bool retry = !res || transient(res->status);
      if (!retry || attempt >= config_.max_retries) {
        const std::string why = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
        throw LlmError("transport", digest, "completion request failed: " + why);
      }
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
  return out;
}

}  // namespace pathsql
