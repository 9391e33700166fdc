#include "tqprep/assets.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "tqprep/sql.hpp"
#include "tqprep/text.hpp"

namespace tqprep {

namespace {

const std::set<std::string>& known_fields() {
  static const std::set<std::string> f = {"question", "table", "sketch", "clause", "values", "ops", "sql", "note"};
  return f;
}

const std::vector<std::string>& prompt_names() {
  static const std::vector<std::string> n = {"sketch",       "clause", "direct",   "programmer",
                                             "repair",       "infer",  "analyzer", "reminder_sketch",
                                             "reminder_ops", "reminder_call", "reminder_sql"};
  return n;
}

const std::vector<std::string>& exemplar_names() {
  static const std::vector<std::string> n = {"sketch", "clause", "direct", "analyzer"};
  return n;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw AssetError("cannot read asset " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

const std::string& Exemplar::at(const std::string& name) const {
  auto it = fields.find(name);
  if (it == fields.end()) throw AssetError("exemplar lacks field '" + name + "'");
  return it->second;
}

std::vector<Exemplar> parse_exemplars(std::string_view src, const std::string& origin) {
  std::vector<Exemplar> out;
  std::string current;
  std::vector<std::string> buffer;
  auto flush = [&] {
    if (out.empty() || current.empty()) return;
    // Drop trailing blank lines of a multi-line field.
    while (!buffer.empty() && text::trim(buffer.back()).empty()) buffer.pop_back();
    out.back().fields[current] = text::join(buffer, "\n");
    buffer.clear();
    current.clear();
  };
  std::size_t lineno = 0;
  for (const auto& line : text::split_lines(src)) {
    ++lineno;
    if (text::starts_with(line, "=== exemplar")) {
      flush();
      out.emplace_back();
      continue;
    }
    auto colon = line.find(':');
    if (colon != std::string::npos && known_fields().count(line.substr(0, colon))) {
      flush();
      if (out.empty()) throw AssetError(origin + ":" + std::to_string(lineno) + ": field outside an exemplar block");
      current = line.substr(0, colon);
      std::string rest = text::trim(std::string_view(line).substr(colon + 1));
      if (!rest.empty()) buffer.push_back(rest);
      continue;
    }
    if (current.empty()) {
      if (text::trim(line).empty() || text::starts_with(line, "#")) continue;
      throw AssetError(origin + ":" + std::to_string(lineno) + ": text outside a field");
    }
    buffer.push_back(line);
  }
  flush();
  return out;
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    auto open = tmpl.find("{{", i);
    if (open == std::string_view::npos) {
      out += tmpl.substr(i);
      break;
    }
    auto close = tmpl.find("}}", open);
    if (close == std::string_view::npos) throw AssetError("unterminated placeholder in template");
    out += tmpl.substr(i, open - i);
    std::string key = text::trim(tmpl.substr(open + 2, close - open - 2));
    auto it = vars.find(key);
    if (it == vars.end()) throw AssetError("template placeholder {{" + key + "}} has no value");
    out += it->second;
    i = close + 2;
  }
  return out;
}

Assets Assets::load(const std::string& dir) {
  namespace fs = std::filesystem;
  Assets a;
  a.dir_ = dir;
  for (const auto& name : prompt_names()) {
    std::string body = read_file(fs::path(dir) / (name + ".txt"));
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    a.prompts_[name] = std::move(body);
  }
  for (const auto& name : exemplar_names()) {
    fs::path p = fs::path(dir) / ("exemplars_" + name + ".txt");
    a.exemplars_[name] = parse_exemplars(read_file(p), p.string());
  }
  for (const auto& ex : a.exemplars_["sketch"]) {
    try {
      sql::parse_sketch(ex.at("sketch"));
    } catch (const sql::ParseError& e) {
      throw AssetError("sketch exemplar does not parse: " + std::string(e.what()));
    }
  }
  for (const auto& ex : a.exemplars_["analyzer"]) {
    try {
      sql::parse_sql(ex.at("sql"));
    } catch (const sql::ParseError& e) {
      throw AssetError("analyzer exemplar does not parse: " + std::string(e.what()));
    }
  }
  return a;
}

const std::string& Assets::prompt(const std::string& name) const {
  auto it = prompts_.find(name);
  if (it == prompts_.end()) throw AssetError("no prompt named '" + name + "'");
  return it->second;
}

const std::vector<Exemplar>& Assets::exemplars(const std::string& name) const {
  auto it = exemplars_.find(name);
  if (it == exemplars_.end()) throw AssetError("no exemplar set named '" + name + "'");
  return it->second;
}

}  // namespace tqprep
