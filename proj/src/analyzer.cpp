#include "tqprep/analyzer.hpp"

#include "tqprep/planner.hpp"
#include "tqprep/text.hpp"

namespace tqprep::analyzer {

std::string render_cell(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Null: return "none";
    case Value::Kind::Bool: return v.as_bool() ? "true" : "false";
    case Value::Kind::Int: return std::to_string(v.as_int());
    case Value::Kind::Float: return format_double(v.as_float());
    case Value::Kind::Str: return v.as_str();
  }
  return "";
}

std::vector<std::string> render_values(const Table& result) {
  std::vector<std::string> out;
  for (std::size_t r = 0; r < result.row_count(); ++r) {
    for (std::size_t c = 0; c < result.column_count(); ++c) out.push_back(render_cell(result.cell(r, c)));
  }
  return out;
}

namespace {

bool has_udf(const sql::SqlQuery& q) {
  for (const auto& item : q.select) {
    if (std::holds_alternative<sql::Udf>(item)) return true;
  }
  return false;
}

std::optional<sql::SqlQuery> try_sql(const std::string& response, std::string& error) {
  error.clear();
  for (const auto& cand : planner::sql_candidates(response)) {
    try {
      auto q = sql::parse_sql(cand);
      if (has_udf(q)) {
        if (error.empty()) error = "the query uses a function that cannot be executed";
        continue;
      }
      return q;
    } catch (const sql::ParseError& e) {
      if (error.empty()) error = e.what();
    }
  }
  return std::nullopt;
}

}  // namespace

sql::SqlQuery generate_sql(const std::string& question, const Table& prepared, Context& ctx) {
  std::string user;
  for (const auto& ex : ctx.assets.exemplars("analyzer")) {
    user += "Table:\n" + ex.at("table") + "\nQuestion: " + ex.at("question") + "\nSQL:\n```sql\n" + ex.at("sql") +
            "\n```\n\n";
  }
  user += "Table:\n" + table_excerpt(prepared) + "\nQuestion: " + question + "\nSQL:";

  llm::ChatRequest req;
  req.tag = "analyzer.sql";
  req.temperature = ctx.temperature;
  req.max_input_tokens = ctx.max_input_tokens;
  req.messages.push_back({"system", ctx.assets.prompt("analyzer")});
  req.messages.push_back({"user", user});
  std::string response = ctx.llm.complete(req);
  std::string error;
  if (auto q = try_sql(response, error)) return *q;

  req.tag += ".retry";
  req.messages.push_back({"assistant", response});
  req.messages.push_back({"user", ctx.assets.prompt("reminder_sql") + "\nProblem: " + error});
  response = ctx.llm.complete(req);
  if (auto q = try_sql(response, error)) return *q;
  throw SqlParseFailure("no executable SQL after retry: " + error, response);
}

Answered answer_with_query(const std::string& question, const Table& prepared, Context& ctx) {
  Answered out;
  out.query = generate_sql(question, prepared, ctx);
  out.answer.raw_result = sql::execute(out.query, prepared);
  out.answer.values = render_values(out.answer.raw_result);
  return out;
}

Answer answer(const std::string& question, const Table& prepared, Context& ctx) {
  return answer_with_query(question, prepared, ctx).answer;
}

}  // namespace tqprep::analyzer
