#pragma once

// Prompt templates and few-shot exemplars loaded from a plain-text directory.
//
// Exemplar files hold blocks introduced by a line "=== exemplar". Inside a
// block, "name: value" starts a field; "name:" alone starts a multi-line field
// that runs until the next field line or block. Only known field names count.

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tqprep {

class AssetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Exemplar {
  std::map<std::string, std::string> fields;
  const std::string& at(const std::string& name) const;
};

std::vector<Exemplar> parse_exemplars(std::string_view text, const std::string& origin = "<text>");

// Replaces {{name}} placeholders; an unknown placeholder is an AssetError.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars);

class Assets {
 public:
  // Reads every known file under dir and validates exemplars. Throws AssetError.
  static Assets load(const std::string& dir);

  const std::string& prompt(const std::string& name) const;
  const std::vector<Exemplar>& exemplars(const std::string& name) const;
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::map<std::string, std::string> prompts_;
  std::map<std::string, std::vector<Exemplar>> exemplars_;
};

}  // namespace tqprep
