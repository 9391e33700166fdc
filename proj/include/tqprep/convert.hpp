#pragma once

// Adapters from the official WikiTableQuestions and TabFact layouts to the
// normalized JSONL dataset format.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tqprep/harness.hpp"

namespace tqprep::convert {

struct Stats {
  std::size_t instances = 0;
  std::size_t min_rows = 0, max_rows = 0;
  std::size_t min_cols = 0, max_cols = 0;
  friend bool operator==(const Stats&, const Stats&) = default;
};

Stats stats_of(const std::vector<harness::Instance>& instances);
std::string describe(const Stats& s);

// Published figures for the full files; used to sanity-check conversions.
Stats expected_wikitq();
Stats expected_tabfact_small();
// Mismatch messages when `got` has the expected instance count but other figures differ.
std::vector<std::string> check(const Stats& got, const Stats& expected, const std::string& label);

struct Conversion {
  std::vector<harness::Instance> instances;
  Stats stats;
  std::vector<std::string> warnings;
};

// WikiTQ field escapes: \n newline, \p pipe, \\ backslash.
std::string wikitq_unescape(std::string_view s);

// TSV with columns id, utterance, context, targetValue; context is a table path
// relative to tables_root. Target values are '|' separated.
Conversion wikitq(const std::string& tsv_path, const std::string& tables_root);
Conversion wikitq_from_text(std::string_view tsv, const std::string& tables_root);

// JSON object: table file -> [statements, labels, caption]; tables are '#'
// delimited under tables_root. Labels 1/0 become "yes"/"no".
Conversion tabfact(const std::string& json_path, const std::string& tables_root);
Conversion tabfact_from_text(std::string_view json_text, const std::string& tables_root);

std::string to_jsonl(const std::vector<harness::Instance>& instances);

}  // namespace tqprep::convert
