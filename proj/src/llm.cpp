#include "tqprep/llm.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tqprep/digest.hpp"
#include "tqprep/table.hpp"
#include "tqprep/text.hpp"

namespace tqprep::llm {

using nlohmann::json;

namespace {
std::string joined_contents(const std::vector<Message>& messages) {
  std::string out;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (i) out.push_back('\n');
    out += messages[i].content;
  }
  return out;
}
}  // namespace

std::size_t estimate_tokens(const std::vector<Message>& messages) { return count_tokens(joined_contents(messages)); }

std::string request_digest(const ChatRequest& req) {
  return "sha256:" + sha256_hex(req.tag + "\n" + joined_contents(req.messages));
}

json to_json(const TranscriptEntry& e) {
  return json{{"tag", e.tag}, {"request_digest", e.request_digest}, {"response", e.response}};
}

TranscriptEntry entry_from_json(const json& j) {
  TranscriptEntry e;
  e.tag = j.at("tag").get<std::string>();
  e.request_digest = j.value("request_digest", "");
  e.response = j.at("response").get<std::string>();
  return e;
}

std::vector<TranscriptEntry> parse_transcript(std::string_view jsonl) {
  std::vector<TranscriptEntry> out;
  std::size_t lineno = 0;
  for (const auto& line : text::split_lines(jsonl)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(entry_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw LlmError(LlmError::Kind::Config, "transcript line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TranscriptEntry> load_transcript(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LlmError(LlmError::Kind::Config, "cannot open transcript " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_transcript(ss.str());
}

std::string dump_transcript(const std::vector<TranscriptEntry>& entries) {
  std::string out;
  for (const auto& e : entries) out += to_json(e).dump() + "\n";
  return out;
}

std::string ReplayProvider::respond(const ChatRequest& req) {
  std::lock_guard lock(mu_);
  if (next_ >= entries_.size()) {
    throw LlmError(LlmError::Kind::ReplayExhausted,
                   "transcript exhausted after " + std::to_string(entries_.size()) + " entries (request " + req.tag +
                       ")");
  }
  const auto& e = entries_[next_];
  if (e.tag != req.tag) {
    throw LlmError(LlmError::Kind::ReplayTagMismatch, "transcript entry " + std::to_string(next_) + " has tag '" +
                                                          e.tag + "' but the request is '" + req.tag + "'");
  }
  std::string digest = request_digest(req);
  if (!e.request_digest.empty() && e.request_digest != digest) {
    warnings_.push_back("digest drift at transcript entry " + std::to_string(next_) + " (" + req.tag + ")");
  }
  ++next_;
  return e.response;
}

std::vector<std::string> ReplayProvider::take_warnings() {
  std::lock_guard lock(mu_);
  return std::exchange(warnings_, {});
}

std::size_t ReplayProvider::consumed() const {
  std::lock_guard lock(mu_);
  return next_;
}

HttpConfig HttpConfig::from_env() {
  auto get = [](const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
  };
  HttpConfig cfg;
  cfg.endpoint = get("TQPREP_LLM_ENDPOINT");
  cfg.api_key = get("TQPREP_LLM_API_KEY");
  cfg.model = get("TQPREP_LLM_MODEL");
  return cfg;
}

std::string Session::complete(const ChatRequest& req) {
  if (req.messages.empty()) throw LlmError(LlmError::Kind::InvalidRequest, "request has no messages");
  if (!(req.temperature >= 0.0)) throw LlmError(LlmError::Kind::InvalidRequest, "temperature must be >= 0");
  for (const auto& m : req.messages) {
    if (m.role != "system" && m.role != "user" && m.role != "assistant") {
      throw LlmError(LlmError::Kind::InvalidRequest, "unknown message role '" + m.role + "'");
    }
  }
  std::size_t estimate = estimate_tokens(req.messages);
  if (estimate > req.max_input_tokens) {
    throw LlmError(LlmError::Kind::TokenBudgetExceeded, "request " + req.tag + " estimates " +
                                                            std::to_string(estimate) + " input tokens, limit " +
                                                            std::to_string(req.max_input_tokens));
  }
  std::string response = provider_.respond(req);
  for (auto& w : provider_.take_warnings()) warnings_.push_back(std::move(w));
  input_tokens_ += estimate;
  recording_.push_back({req.tag, request_digest(req), response});
  return response;
}

std::vector<std::string> Session::take_warnings() { return std::exchange(warnings_, {}); }

}  // namespace tqprep::llm
