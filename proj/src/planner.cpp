#include "tqprep/planner.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include <json.hpp>

#include "tqprep/text.hpp"

namespace tqprep::planner {

using plan::LogicalOp;
using plan::OpKind;

namespace {

llm::ChatRequest make_request(const Context& ctx, std::string tag, std::string system, std::string user) {
  llm::ChatRequest req;
  req.tag = std::move(tag);
  req.temperature = ctx.temperature;
  req.max_input_tokens = ctx.max_input_tokens;
  req.messages.push_back({"system", std::move(system)});
  req.messages.push_back({"user", std::move(user)});
  return req;
}

llm::ChatRequest retry_request(llm::ChatRequest req, const std::string& bad, const std::string& reminder) {
  req.tag += ".retry";
  req.messages.push_back({"assistant", bad});
  req.messages.push_back({"user", reminder});
  return req;
}

std::string values_line(const Table& t, const std::string& col) {
  if (!t.has_column(col)) return "Values of " + col + ": (not a column of the table)";
  return "Values of " + col + ": " + nlohmann::json(distinct_values(t, col, 20)).dump();
}

std::string sketch_exemplars(const Assets& assets) {
  std::string out;
  for (const auto& ex : assets.exemplars("sketch")) {
    out += "Table:\n" + ex.at("table") + "\nQuestion: " + ex.at("question") + "\nSketch:\n```sql\n" +
           ex.at("sketch") + "\n```\n\n";
  }
  return out;
}

// Base columns of the sketch must exist; aliases may not exist yet.
void check_columns(const sql::SqlQuery& s, const Table& t) {
  for (const auto& ref : sql::referenced_columns(s)) {
    if (!ref.derived && !t.has_column(ref.name)) {
      throw sql::ParseError(0, "a column of the table", "'" + ref.name + "'");
    }
  }
}

}  // namespace

std::vector<std::string> sql_candidates(const std::string& response) {
  std::vector<std::string> out;
  std::string body;
  if (text::fenced_block(response, "sql", body)) out.push_back(text::trim(body));
  out.push_back(text::trim(response));
  for (const auto& line : text::split_lines(response)) {
    std::string l = text::trim(line);
    if (l.size() >= 6 && text::iequals(l.substr(0, 6), "SELECT")) {
      out.push_back(l);
      break;
    }
  }
  return out;
}

namespace {
// First candidate that parses; otherwise the error of the first candidate.
std::optional<sql::SqlQuery> try_sketch(const std::string& response, const Table& t, std::string& error) {
  error.clear();
  for (const auto& cand : sql_candidates(response)) {
    try {
      auto s = sql::parse_sketch(cand);
      check_columns(s, t);
      return s;
    } catch (const sql::ParseError& e) {
      if (error.empty()) error = e.what();
    }
  }
  return std::nullopt;
}
}  // namespace

sql::SqlQuery generate_sketch(const std::string& question, const Table& t, Context& ctx) {
  std::string user = sketch_exemplars(ctx.assets) + "Table:\n" + table_excerpt(t) + "\nQuestion: " + question +
                     "\nSketch:";
  auto req = make_request(ctx, "planner.sketch", ctx.assets.prompt("sketch"), user);
  std::string response = ctx.llm.complete(req);
  std::string error;
  if (auto s = try_sketch(response, t, error)) return *s;
  req = retry_request(req, response, ctx.assets.prompt("reminder_sketch") + "\nProblem: " + error);
  response = ctx.llm.complete(req);
  if (auto s = try_sketch(response, t, error)) return *s;
  throw SketchParseFailure("no valid analysis sketch after retry: " + error, response);
}

bool parse_ops_response(const std::string& response, std::vector<LogicalOp>& ops, std::vector<std::string>& warnings) {
  bool recognised = false;
  for (const auto& line : text::split_lines(response)) {
    auto parsed = plan::parse_op_line(line);
    switch (parsed.status) {
      case plan::OpLine::Status::NotOp: break;
      case plan::OpLine::Status::None: recognised = true; break;
      case plan::OpLine::Status::Unknown:
        warnings.push_back("skipped unknown operation '" + parsed.name + "'");
        break;
      case plan::OpLine::Status::Malformed:
        warnings.push_back("skipped malformed " + parsed.name + " line: " + parsed.error);
        break;
      case plan::OpLine::Status::Ok:
        recognised = true;
        ops.push_back(std::move(parsed.op));
        break;
    }
  }
  return recognised;
}

std::vector<LogicalOp> suggest_ops_for_clause(const sql::SketchClause& clause, const Table& t, std::size_t tag_index,
                                              Context& ctx) {
  if (clause.kind == sql::SketchClause::Kind::Structural) return {};
  std::string user;
  for (const auto& ex : ctx.assets.exemplars("clause")) {
    user += "Clause: " + ex.at("clause") + "\n" + ex.at("values") + "\nOperations:\n" + ex.at("ops") + "\n\n";
  }
  user += "Clause: " + clause.text + "\n";
  for (const auto& col : clause.columns) user += values_line(t, col) + "\n";
  user += "Operations:";

  std::string tag = "planner.clause." + std::to_string(tag_index);
  auto req = make_request(ctx, tag, ctx.assets.prompt("clause"), user);
  std::string response;
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (attempt == 1) req = retry_request(req, response, ctx.assets.prompt("reminder_ops"));
    response = ctx.llm.complete(req);
    std::vector<LogicalOp> ops;
    std::vector<std::string> notes;
    bool ok = parse_ops_response(response, ops, notes);
    for (auto& n : notes) ctx.warnings.push_back(tag + ": " + n);
    if (ok) return ops;
  }
  ctx.warnings.push_back(tag + ": no operations could be read from the response; clause skipped");
  return {};
}

LogicalOp derive_filter(const sql::SqlQuery& sketch, const Table& t, bool strict) {
  auto refs = sql::referenced_columns(sketch);
  std::vector<std::string> base, derived;
  for (const auto& r : refs) (r.derived ? derived : base).push_back(r.name);
  std::vector<std::string> cols;
  for (const auto& name : t.column_names()) {
    if (std::find(base.begin(), base.end(), name) != base.end()) cols.push_back(name);
  }
  for (const auto& b : base) {
    if (std::find(cols.begin(), cols.end(), b) == cols.end()) cols.push_back(b);
  }
  if (!strict) {
    cols.insert(cols.end(), derived.begin(), derived.end());
    return LogicalOp::filter(cols);
  }

  // A source is consumed when its only mentions are as UDF inputs.
  std::set<std::string> other_uses;
  sql::SqlQuery without_udfs = sketch;
  without_udfs.select.clear();
  for (const auto& item : sketch.select) {
    if (!std::holds_alternative<sql::Udf>(item)) without_udfs.select.push_back(item);
  }
  for (const auto& r : sql::referenced_columns(without_udfs)) other_uses.insert(r.name);

  std::vector<std::string> out;
  std::set<std::string> placed;
  for (const auto& c : cols) {
    bool consumed = false;
    for (const auto& item : sketch.select) {
      const auto* u = std::get_if<sql::Udf>(&item);
      if (!u || std::find(u->inputs.begin(), u->inputs.end(), c) == u->inputs.end()) continue;
      if (other_uses.count(c)) continue;
      consumed = true;
      if (!placed.count(u->alias)) {
        out.push_back(u->alias);
        placed.insert(u->alias);
      }
    }
    if (!consumed && !placed.count(c)) {
      out.push_back(c);
      placed.insert(c);
    }
  }
  for (const auto& d : derived) {
    if (!placed.count(d)) {
      out.push_back(d);
      placed.insert(d);
    }
  }
  return LogicalOp::filter(out);
}

std::vector<LogicalOp> dedup_ops(const std::vector<LogicalOp>& ops) {
  std::vector<LogicalOp> out;
  std::set<std::tuple<int, std::string, std::string>> seen;
  for (const auto& op : ops) {
    if (seen.insert({static_cast<int>(op.kind), op.target_column(), op.description}).second) out.push_back(op);
  }
  return out;
}

plan::LogicalPlan plan_coc(const std::string& question, const Table& t, Context& ctx, bool strict_filter) {
  plan::LogicalPlan p;
  sql::SqlQuery sketch = generate_sketch(question, t, ctx);
  std::vector<LogicalOp> ops;
  std::size_t index = 0;
  for (const auto& clause : sql::clauses(sketch)) {
    if (clause.kind == sql::SketchClause::Kind::Structural) continue;
    ++index;
    for (auto& op : suggest_ops_for_clause(clause, t, index, ctx)) {
      if (op.kind == OpKind::Filter) {
        ctx.warnings.push_back("ignored a Filter suggested for clause " + std::to_string(index));
        continue;
      }
      ops.push_back(std::move(op));
    }
  }
  p.ops = dedup_ops(ops);
  p.ops.push_back(derive_filter(sketch, t, strict_filter));
  p.sketch = std::move(sketch);
  return p;
}

plan::LogicalPlan plan_direct(const std::string& question, const Table& t, Context& ctx) {
  std::string specs;
  for (const auto& s : plan::op_type_specs()) specs += "- " + std::string(plan::op_kind_name(s.kind)) + ": " + s.purpose + "\n";
  std::string system = render_template(ctx.assets.prompt("direct"), {{"specs", specs}});
  std::string user;
  for (const auto& ex : ctx.assets.exemplars("direct")) {
    user += "Table:\n" + ex.at("table") + "\nQuestion: " + ex.at("question") + "\nOperations:\n" + ex.at("ops") + "\n\n";
  }
  user += "Table:\n" + table_excerpt(t) + "\nQuestion: " + question + "\nOperations:";
  auto req = make_request(ctx, "planner.direct", system, user);
  std::string response;
  plan::LogicalPlan p;
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (attempt == 1) req = retry_request(req, response, ctx.assets.prompt("reminder_ops"));
    response = ctx.llm.complete(req);
    std::vector<LogicalOp> ops;
    std::vector<std::string> notes;
    bool ok = parse_ops_response(response, ops, notes);
    for (auto& n : notes) ctx.warnings.push_back(req.tag + ": " + n);
    if (!ok) continue;
    if (!plan::enforce_filter_last(ops)) ctx.warnings.push_back("planner.direct: dropped extra Filter operations");
    p.ops = dedup_ops(ops);
    return p;
  }
  ctx.warnings.push_back("planner.direct: no operations could be read from the response; empty plan");
  return p;
}

}  // namespace tqprep::planner
