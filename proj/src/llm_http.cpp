#include <httplib.h>

#include "tqprep/llm.hpp"

namespace tqprep::llm {

using nlohmann::json;

HttpProvider::HttpProvider(HttpConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.endpoint.empty()) throw LlmError(LlmError::Kind::Config, "no LLM endpoint configured");
  if (cfg_.model.empty()) throw LlmError(LlmError::Kind::Config, "no LLM model configured");
}

json HttpProvider::request_body(const ChatRequest& req, const std::string& model) {
  json messages = json::array();
  for (const auto& m : req.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  return json{{"model", model}, {"messages", messages}, {"temperature", req.temperature}};
}

std::string HttpProvider::parse_response(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw LlmError(LlmError::Kind::Transport, "response is not JSON");
  try {
    const json& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw LlmError(LlmError::Kind::Transport, "response content is not a string");
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw LlmError(LlmError::Kind::Transport, std::string("unexpected response shape: ") + e.what());
  }
}

std::string HttpProvider::respond(const ChatRequest& req) {
  // Split "scheme://host[:port]/path" for httplib.
  auto scheme_end = cfg_.endpoint.find("://");
  if (scheme_end == std::string::npos) throw LlmError(LlmError::Kind::Config, "endpoint must be a URL");
  auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
  std::string origin = cfg_.endpoint.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);

  httplib::Client client(origin);
  client.set_connection_timeout(cfg_.timeout_seconds, 0);
  client.set_read_timeout(cfg_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
  std::string body = request_body(req, cfg_.model).dump();

  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw LlmError(LlmError::Kind::Transport, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300));
    }
    return parse_response(res->body);
  }
  throw LlmError(LlmError::Kind::Transport, last_error);
}

}  // namespace tqprep::llm
