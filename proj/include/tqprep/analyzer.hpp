#pragma once

// Final question answering over the prepared table: one SQL query from the
// model, executed with the in-memory engine.

#include <stdexcept>
#include <string>
#include <vector>

#include "tqprep/assets.hpp"
#include "tqprep/llm.hpp"
#include "tqprep/sql.hpp"
#include "tqprep/table.hpp"

namespace tqprep::analyzer {

class SqlParseFailure : public std::runtime_error {
 public:
  SqlParseFailure(const std::string& message, std::string raw)
      : std::runtime_error(message), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

struct Context {
  llm::Session& llm;
  const Assets& assets;
  double temperature = 0.01;
  std::size_t max_input_tokens = 8192;
};

struct Answer {
  std::vector<std::string> values;
  Table raw_result;
};

// Row-major cell texts: Null -> "none", Int plain, Float shortest round-trip.
std::vector<std::string> render_values(const Table& result);
std::string render_cell(const Value& v);

sql::SqlQuery generate_sql(const std::string& question, const Table& prepared, Context& ctx);

// Throws SqlParseFailure and sql::SqlError.
Answer answer(const std::string& question, const Table& prepared, Context& ctx);

struct Answered {
  sql::SqlQuery query;
  Answer answer;
};
// Same as answer() but keeps the query for traces.
Answered answer_with_query(const std::string& question, const Table& prepared, Context& ctx);

}  // namespace tqprep::analyzer
