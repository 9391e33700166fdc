#pragma once

// The single boundary to language models: request contract, providers,
// and transcripts for deterministic replay.

#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace tqprep::llm {

class LlmError : public std::runtime_error {
 public:
  enum class Kind { InvalidRequest, TokenBudgetExceeded, Transport, ReplayExhausted, ReplayTagMismatch, Config };
  LlmError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Message {
  std::string role;  // system | user | assistant
  std::string content;
  friend bool operator==(const Message&, const Message&) = default;
};

struct ChatRequest {
  std::vector<Message> messages;
  double temperature = 0.01;
  std::size_t max_input_tokens = 8192;
  std::string tag;
};

// Same estimator as table token_estimate, over contents joined by newlines.
std::size_t estimate_tokens(const std::vector<Message>& messages);

// sha256 over tag + "\n" + contents joined by "\n", prefixed "sha256:".
std::string request_digest(const ChatRequest& req);

struct TranscriptEntry {
  std::string tag;
  std::string request_digest;
  std::string response;
  friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

nlohmann::json to_json(const TranscriptEntry& e);
TranscriptEntry entry_from_json(const nlohmann::json& j);

// JSON-lines; throws LlmError::Config on malformed lines or missing files.
std::vector<TranscriptEntry> parse_transcript(std::string_view jsonl);
std::vector<TranscriptEntry> load_transcript(const std::string& path);
std::string dump_transcript(const std::vector<TranscriptEntry>& entries);

class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string respond(const ChatRequest& req) = 0;
  virtual std::string name() const = 0;
  // Non-fatal notes such as digest drift; drained by the caller.
  virtual std::vector<std::string> take_warnings() { return {}; }
};

// Serves recorded responses in order. A tag mismatch is an error; digest drift only warns.
class ReplayProvider : public Provider {
 public:
  explicit ReplayProvider(std::vector<TranscriptEntry> entries) : entries_(std::move(entries)) {}
  std::string respond(const ChatRequest& req) override;
  std::string name() const override { return "scripted"; }
  std::vector<std::string> take_warnings() override;
  std::size_t consumed() const;
  std::size_t size() const { return entries_.size(); }

 private:
  mutable std::mutex mu_;
  std::vector<TranscriptEntry> entries_;
  std::size_t next_ = 0;
  std::vector<std::string> warnings_;
};

// Wraps a function; handy for tests and tools.
class CallbackProvider : public Provider {
 public:
  using Fn = std::function<std::string(const ChatRequest&)>;
  explicit CallbackProvider(Fn fn) : fn_(std::move(fn)) {}
  std::string respond(const ChatRequest& req) override { return fn_(req); }
  std::string name() const override { return "callback"; }

 private:
  Fn fn_;
};

struct HttpConfig {
  std::string endpoint;  // full URL of the chat completions route
  std::string api_key;
  std::string model;
  int timeout_seconds = 120;

  // Reads TQPREP_LLM_ENDPOINT, TQPREP_LLM_API_KEY, TQPREP_LLM_MODEL.
  static HttpConfig from_env();
};

// Chat-completions style JSON POST with one retry on transient failure.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(HttpConfig cfg);
  std::string respond(const ChatRequest& req) override;
  std::string name() const override { return "http"; }

  // Exposed for tests.
  static nlohmann::json request_body(const ChatRequest& req, const std::string& model);
  static std::string parse_response(const std::string& body);

 private:
  HttpConfig cfg_;
};

// One pipeline run's view of a provider: validates requests and records the exchange.
class Session {
 public:
  explicit Session(Provider& provider) : provider_(provider) {}

  // Throws LlmError.
  std::string complete(const ChatRequest& req);

  const std::vector<TranscriptEntry>& recording() const { return recording_; }
  std::size_t calls() const { return recording_.size(); }
  std::size_t input_tokens() const { return input_tokens_; }
  std::vector<std::string> take_warnings();

 private:
  Provider& provider_;
  std::vector<TranscriptEntry> recording_;
  std::size_t input_tokens_ = 0;
  std::vector<std::string> warnings_;
};

}  // namespace tqprep::llm
