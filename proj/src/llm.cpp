#include "pathsql/llm.hpp"

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "pathsql/dbm_json.hpp"

namespace pathsql {

using json = nlohmann::ordered_json;

std::string normalize_prompt(std::string_view prompt) {
  std::string out;
  out.reserve(prompt.size());
  bool pending_space = false;
  for (char c : prompt) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string prompt_digest(std::string_view prompt) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : normalize_prompt(prompt)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void check_request(const CompletionRequest& req) {
  if (req.n_samples < 1)
    throw LlmError("bad_request", prompt_digest(req.prompt), "n_samples must be at least 1");
  if (!(req.temperature >= 0.0 && req.temperature <= 2.0))
    throw LlmError("bad_request", prompt_digest(req.prompt), "temperature must be in [0, 2]");
}

namespace {

std::vector<std::string> fit(const std::vector<std::string>& texts, int n) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(texts[static_cast<std::size_t>(i) % texts.size()]);
  return out;
}

}  // namespace

// --- scripted -----------------------------------------------------------

ScriptedLlm::ScriptedLlm(std::vector<std::vector<std::string>> script) : script_(std::move(script)) {}

std::vector<std::string> ScriptedLlm::complete(const CompletionRequest& req) {
  check_request(req);
  std::lock_guard lock(mu_);
  ledger_.push_back(req);
  if (next_ >= script_.size())
    throw LlmError("script_exhausted", prompt_digest(req.prompt),
                   "mock script exhausted after " + std::to_string(next_) + " calls");
  const auto& entry = script_[next_++];
  if (entry.empty())
    throw LlmError("script_exhausted", prompt_digest(req.prompt),
                   "mock script entry " + std::to_string(next_) + " is empty");
  return fit(entry, req.n_samples);
}

std::vector<CompletionRequest> ScriptedLlm::ledger() const {
  std::lock_guard lock(mu_);
  return ledger_;
}

std::size_t ScriptedLlm::calls() const {
  std::lock_guard lock(mu_);
  return ledger_.size();
}

std::size_t ScriptedLlm::remaining() const {
  std::lock_guard lock(mu_);
  return script_.size() - next_;
}

std::vector<std::vector<std::string>> parse_script(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("mock script: invalid JSON: ") + e.what());
  }
  if (!j.is_array()) throw Error("mock script: expected an array of response lists");
  std::vector<std::vector<std::string>> out;
  for (const auto& entry : j) {
    std::vector<std::string> texts;
    if (entry.is_string()) {
      texts.push_back(entry.get<std::string>());
    } else if (entry.is_array()) {
      for (const auto& t : entry) {
        if (!t.is_string()) throw Error("mock script: responses must be strings");
        texts.push_back(t.get<std::string>());
      }
    } else {
      throw Error("mock script: entries must be strings or arrays of strings");
    }
    out.push_back(std::move(texts));
  }
  return out;
}

// --- transcripts -------------------------------------------------------

std::string Transcript::to_json() const {
  json j;
  j["mode"] = mode == Mode::ordered ? "ordered" : "digest";
  j["exhaustion"] = exhaustion == Exhaustion::error ? "error" : "repeat_last";
  j["entries"] = json::array();
  for (const auto& e : entries) {
    json je;
    je["digest"] = e.digest;
    if (!e.prompt.empty()) je["prompt"] = e.prompt;
    je["responses"] = e.responses;
    j["entries"].push_back(std::move(je));
  }
  return j.dump(2) + "\n";
}

Transcript Transcript::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("transcript: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array())
    throw Error("transcript: expected an object with an \"entries\" array");
  Transcript t;
  const auto mode = j.value("mode", std::string("digest"));
  if (mode == "ordered") t.mode = Mode::ordered;
  else if (mode == "digest") t.mode = Mode::digest;
  else throw Error("transcript: unknown mode '" + mode + "'");
  const auto ex = j.value("exhaustion", std::string("error"));
  if (ex == "error") t.exhaustion = Exhaustion::error;
  else if (ex == "repeat_last") t.exhaustion = Exhaustion::repeat_last;
  else throw Error("transcript: unknown exhaustion policy '" + ex + "'");
  for (const auto& je : j["entries"]) {
    Entry e;
    e.prompt = je.value("prompt", std::string());
    e.digest = je.value("digest", std::string());
    if (e.digest.empty()) {
      if (e.prompt.empty()) throw Error("transcript: entry needs a digest or a prompt");
      e.digest = prompt_digest(e.prompt);
    }
    if (!je.contains("responses") || !je["responses"].is_array() || je["responses"].empty())
      throw Error("transcript: entry " + e.digest + " has no responses");
    for (const auto& r : je["responses"]) e.responses.push_back(r.get<std::string>());
    t.entries.push_back(std::move(e));
  }
  return t;
}

Transcript Transcript::load(const std::filesystem::path& path) { return from_json(read_text_file(path)); }

void Transcript::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << to_json();
}

// --- replay -------------------------------------------------------------

ReplayLlm::ReplayLlm(Transcript transcript) : t_(std::move(transcript)) {
  for (std::size_t i = 0; i < t_.entries.size(); ++i) by_digest_[t_.entries[i].digest].push_back(i);
}

std::vector<std::string> ReplayLlm::complete(const CompletionRequest& req) {
  check_request(req);
  const auto digest = prompt_digest(req.prompt);
  std::lock_guard lock(mu_);
  ++calls_;
  const bool repeat = t_.exhaustion == Transcript::Exhaustion::repeat_last;
  if (t_.mode == Transcript::Mode::ordered) {
    if (next_ >= t_.entries.size()) {
      if (!repeat || t_.entries.empty())
        throw LlmError("script_exhausted", digest, "transcript exhausted after " + std::to_string(next_) + " entries");
      const auto& last = t_.entries.back();
      if (last.digest != digest) throw LlmError("replay_mismatch", digest, "prompt differs from last transcript entry");
      return fit(last.responses, req.n_samples);
    }
    const auto& e = t_.entries[next_];
    if (e.digest != digest)
      throw LlmError("replay_mismatch", digest,
                     "transcript entry " + std::to_string(next_) + " expects prompt " + e.digest);
    ++next_;
    return fit(e.responses, req.n_samples);
  }
  auto it = by_digest_.find(digest);
  if (it == by_digest_.end()) throw LlmError("replay_mismatch", digest, "no transcript entry for prompt");
  auto& used = used_[digest];
  if (used >= it->second.size()) {
    if (!repeat) throw LlmError("script_exhausted", digest, "transcript entries for prompt exhausted");
    return fit(t_.entries[it->second.back()].responses, req.n_samples);
  }
  return fit(t_.entries[it->second[used++]].responses, req.n_samples);
}

std::size_t ReplayLlm::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

// --- recording ------------------------------------------------------------

RecordingLlm::RecordingLlm(LlmClient& inner, Transcript::Mode mode) : inner_(inner) { t_.mode = mode; }

std::vector<std::string> RecordingLlm::complete(const CompletionRequest& req) {
  auto out = inner_.complete(req);
  std::lock_guard lock(mu_);
  t_.entries.push_back({prompt_digest(req.prompt), req.prompt, out});
  return out;
}

Transcript RecordingLlm::transcript() const {
  std::lock_guard lock(mu_);
  return t_;
}

std::unique_ptr<LlmClient> load_mock(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') return std::make_unique<ScriptedLlm>(parse_script(text));
  return std::make_unique<ReplayLlm>(Transcript::from_json(text));
}

}  // namespace pathsql
