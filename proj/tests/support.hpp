#pragma once

#include <deque>
#include <map>
#include <stdexcept>
#include <string>

#include "tqprep/assets.hpp"
#include "tqprep/llm.hpp"

namespace tqtest {

inline std::string source_dir() { return TQPREP_SOURCE_DIR; }
inline std::string data_dir() { return source_dir() + "/data"; }

inline const tqprep::Assets& assets() {
  static const tqprep::Assets a = tqprep::Assets::load(source_dir() + "/assets/prompts");
  return a;
}

// Answers by tag; each tag may be scripted with several responses in order.
class TagScript : public tqprep::llm::Provider {
 public:
  TagScript& on(const std::string& tag, std::string response) {
    script_[tag].push_back(std::move(response));
    return *this;
  }
  std::string respond(const tqprep::llm::ChatRequest& req) override {
    seen_.push_back(req.tag);
    last_[req.tag] = req;
    auto it = script_.find(req.tag);
    if (it == script_.end() || it->second.empty()) throw std::runtime_error("unscripted tag " + req.tag);
    std::string r = it->second.front();
    it->second.pop_front();
    return r;
  }
  std::string name() const override { return "tagscript"; }

  const std::vector<std::string>& seen() const { return seen_; }
  const tqprep::llm::ChatRequest& last(const std::string& tag) const { return last_.at(tag); }

 private:
  std::map<std::string, std::deque<std::string>> script_;
  std::vector<std::string> seen_;
  std::map<std::string, tqprep::llm::ChatRequest> last_;
};

inline std::string call(const std::string& fn, const std::string& args_json) {
  return "function: " + fn + "\nargs: " + args_json;
}

}  // namespace tqtest
