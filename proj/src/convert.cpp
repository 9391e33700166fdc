#include "tqprep/convert.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tqprep/text.hpp"

namespace tqprep::convert {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw harness::ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t b = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(b, i - b));
      b = i + 1;
    }
  }
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

Stats stats_of(const std::vector<harness::Instance>& instances) {
  Stats s;
  s.instances = instances.size();
  bool first = true;
  for (const auto& inst : instances) {
    std::size_t r = inst.table.row_count(), c = inst.table.column_count();
    if (first) {
      s.min_rows = s.max_rows = r;
      s.min_cols = s.max_cols = c;
      first = false;
      continue;
    }
    s.min_rows = std::min(s.min_rows, r);
    s.max_rows = std::max(s.max_rows, r);
    s.min_cols = std::min(s.min_cols, c);
    s.max_cols = std::max(s.max_cols, c);
  }
  return s;
}

std::string describe(const Stats& s) {
  return std::to_string(s.instances) + " instances, rows " + std::to_string(s.min_rows) + "-" +
         std::to_string(s.max_rows) + ", columns " + std::to_string(s.min_cols) + "-" + std::to_string(s.max_cols);
}

Stats expected_wikitq() { return {22033, 4, 753, 3, 25}; }
Stats expected_tabfact_small() { return {2024, 5, 47, 5, 14}; }

std::vector<std::string> check(const Stats& got, const Stats& expected, const std::string& label) {
  std::vector<std::string> out;
  if (got.instances != expected.instances) return out;
  if (got.min_rows != expected.min_rows || got.max_rows != expected.max_rows) {
    out.push_back(label + ": row range " + std::to_string(got.min_rows) + "-" + std::to_string(got.max_rows) +
                  " differs from the published " + std::to_string(expected.min_rows) + "-" +
                  std::to_string(expected.max_rows));
  }
  if (got.min_cols != expected.min_cols || got.max_cols != expected.max_cols) {
    out.push_back(label + ": column range " + std::to_string(got.min_cols) + "-" + std::to_string(got.max_cols) +
                  " differs from the published " + std::to_string(expected.min_cols) + "-" +
                  std::to_string(expected.max_cols));
  }
  return out;
}

std::string wikitq_unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      char n = s[i + 1];
      if (n == 'n') {
        out.push_back('\n');
        ++i;
        continue;
      }
      if (n == 'p') {
        out.push_back('|');
        ++i;
        continue;
      }
      if (n == '\\') {
        out.push_back('\\');
        ++i;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

Conversion wikitq_from_text(std::string_view tsv, const std::string& tables_root) {
  Conversion conv;
  auto lines = text::split_lines(tsv);
  if (lines.empty()) throw harness::ConfigError("empty WikiTQ file");
  auto header = split(strip_cr(lines.front()), '\t');
  auto col = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw harness::ConfigError("WikiTQ header lacks '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::size_t id_c = col("id"), q_c = col("utterance"), ctx_c = col("context"), tgt_c = col("targetValue");
  std::map<std::string, Table> cache;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string line = strip_cr(lines[i]);
    if (text::trim(line).empty()) continue;
    auto f = split(line, '\t');
    if (f.size() < header.size()) {
      conv.warnings.push_back("line " + std::to_string(i + 1) + ": too few fields, skipped");
      continue;
    }
    harness::Instance inst;
    inst.id = f[id_c];
    inst.question = wikitq_unescape(f[q_c]);
    const std::string& rel = f[ctx_c];
    auto it = cache.find(rel);
    if (it == cache.end()) it = cache.emplace(rel, read_csv_file((fs::path(tables_root) / rel).string())).first;
    inst.table = it->second;
    for (const auto& v : split(f[tgt_c], '|')) inst.gold.push_back(wikitq_unescape(v));
    inst.tags.push_back("wikitq");
    conv.instances.push_back(std::move(inst));
  }
  conv.stats = stats_of(conv.instances);
  for (auto& w : check(conv.stats, expected_wikitq(), "WikiTQ")) conv.warnings.push_back(std::move(w));
  return conv;
}

Conversion wikitq(const std::string& tsv_path, const std::string& tables_root) {
  return wikitq_from_text(slurp(tsv_path), tables_root);
}

namespace {

Table read_hash_table(const std::string& path) {
  auto lines = text::split_lines(slurp(path));
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  for (const auto& raw : lines) {
    std::string line = strip_cr(raw);
    if (line.empty()) continue;
    if (header.empty()) {
      header = split(line, '#');
    } else {
      rows.push_back(split(line, '#'));
    }
  }
  return from_rows(header, rows);
}

}  // namespace

Conversion tabfact_from_text(std::string_view json_text, const std::string& tables_root) {
  Conversion conv;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw harness::ConfigError(std::string("TabFact file: ") + e.what());
  }
  if (!j.is_object()) throw harness::ConfigError("TabFact file must be a JSON object");
  for (const auto& [table_id, entry] : j.items()) {
    if (!entry.is_array() || entry.size() < 2 || !entry[0].is_array() || !entry[1].is_array() ||
        entry[0].size() != entry[1].size()) {
      conv.warnings.push_back("entry " + table_id + ": unexpected layout, skipped");
      continue;
    }
    Table t = read_hash_table((fs::path(tables_root) / table_id).string());
    for (std::size_t k = 0; k < entry[0].size(); ++k) {
      harness::Instance inst;
      inst.id = table_id + "#" + std::to_string(k);
      inst.question = entry[0][k].get<std::string>();
      inst.table = t;
      inst.gold.push_back(entry[1][k].get<int>() ? "yes" : "no");
      inst.tags.push_back("tabfact");
      conv.instances.push_back(std::move(inst));
    }
  }
  conv.stats = stats_of(conv.instances);
  for (auto& w : check(conv.stats, expected_tabfact_small(), "TabFact")) conv.warnings.push_back(std::move(w));
  return conv;
}

Conversion tabfact(const std::string& json_path, const std::string& tables_root) {
  return tabfact_from_text(slurp(json_path), tables_root);
}

std::string to_jsonl(const std::vector<harness::Instance>& instances) {
  std::string out;
  for (const auto& inst : instances) out += harness::to_json(inst).dump() + "\n";
  return out;
}

}  // namespace tqprep::convert
