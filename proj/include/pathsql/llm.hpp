#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "pathsql/error.hpp"

namespace pathsql {

struct CompletionRequest {
  std::string prompt;
  int n_samples = 1;
  double temperature = 0.2;
};

// kind: "script_exhausted", "replay_mismatch", "transport", "auth", "bad_request".
class LlmError : public Error {
 public:
  LlmError(std::string kind, std::string digest, const std::string& message)
      : Error(message + " [prompt " + digest + "]"), kind_(std::move(kind)), digest_(std::move(digest)), message_(message) {}
  const std::string& kind() const { return kind_; }
  const std::string& digest() const { return digest_; }
  LlmError with_context(const std::string& context) const { return {kind_, digest_, context + ": " + message_}; }

 private:
  std::string kind_;
  std::string digest_;
  std::string message_;
};

// Collapses whitespace runs to one space and trims.
std::string normalize_prompt(std::string_view prompt);
// FNV-1a 64 over the normalized prompt, 16 lowercase hex digits.
std::string prompt_digest(std::string_view prompt);

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  // Exactly req.n_samples texts.
  virtual std::vector<std::string> complete(const CompletionRequest& req) = 0;
};

void check_request(const CompletionRequest& req);

// Each call consumes the next script entry. An entry shorter than n_samples is
// cycled, a longer one truncated. Never touches the network.
class ScriptedLlm : public LlmClient {
 public:
  explicit ScriptedLlm(std::vector<std::vector<std::string>> script);

  std::vector<std::string> complete(const CompletionRequest& req) override;

  std::vector<CompletionRequest> ledger() const;
  std::size_t calls() const;
  std::size_t remaining() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::vector<std::string>> script_;
  std::size_t next_ = 0;
  std::vector<CompletionRequest> ledger_;
};

// Scripts are a JSON array of arrays of strings.
std::vector<std::vector<std::string>> parse_script(const std::string& json_text);

struct Transcript {
  enum class Mode { ordered, digest };
  enum class Exhaustion { error, repeat_last };

  struct Entry {
    std::string digest;
    std::string prompt;  // informational; may be empty
    std::vector<std::string> responses;

    bool operator==(const Entry&) const = default;
  };

  Mode mode = Mode::digest;
  Exhaustion exhaustion = Exhaustion::error;
  std::vector<Entry> entries;

  std::string to_json() const;
  static Transcript from_json(const std::string& text);
  static Transcript load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  bool operator==(const Transcript&) const = default;
};

// Ordered mode consumes entries in sequence and requires matching digests;
// digest mode serves each digest's entries in order, independent of the order
// prompts arrive in.
class ReplayLlm : public LlmClient {
 public:
  explicit ReplayLlm(Transcript transcript);
  std::vector<std::string> complete(const CompletionRequest& req) override;
  std::size_t calls() const;

 private:
  mutable std::mutex mu_;
  Transcript t_;
  std::size_t next_ = 0;
  std::map<std::string, std::vector<std::size_t>> by_digest_;
  std::map<std::string, std::size_t> used_;
  std::size_t calls_ = 0;
};

// Passes requests through and records every exchange.
class RecordingLlm : public LlmClient {
 public:
  RecordingLlm(LlmClient& inner, Transcript::Mode mode = Transcript::Mode::digest);
  std::vector<std::string> complete(const CompletionRequest& req) override;
  Transcript transcript() const;

 private:
  LlmClient& inner_;
  mutable std::mutex mu_;
  Transcript t_;
};

struct HttpLlmConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o";
  std::string api_key_env = "OPENAI_API_KEY";
  int max_retries = 4;
  std::chrono::milliseconds backoff{500};
  std::chrono::seconds timeout{120};
};

// Chat-completion adapter: one request for n choices, retried with
// exponential backoff on 429 and 5xx.
class HttpLlm : public LlmClient {
 public:
  explicit HttpLlm(HttpLlmConfig config);
  std::vector<std::string> complete(const CompletionRequest& req) override;

  // Body and response handling, exposed for tests.
  static std::string request_body(const HttpLlmConfig& config, const CompletionRequest& req);
  static std::vector<std::string> parse_choices(const std::string& body);

 private:
  HttpLlmConfig config_;
  std::string api_key_;
};

// Picks ScriptedLlm for a JSON array, ReplayLlm for a transcript object.
std::unique_ptr<LlmClient> load_mock(const std::filesystem::path& path);

}  // namespace pathsql
