#include "tqprep/programmer.hpp"

#include <cctype>

#include "tqprep/text.hpp"

namespace tqprep::programmer {

using nlohmann::json;
using plan::LogicalOp;
using plan::OpKind;
using plan::PhysicalOp;

ErrorReport from_precheck(const plan::PrecheckReport& r) {
  ErrorReport out;
  out.phase = ErrorReport::Phase::Precheck;
  for (const auto& i : r.issues) out.items.push_back({plan::issue_kind_name(i.kind), i.message, {}, 0});
  return out;
}

std::string render(const ErrorReport& r) {
  std::string out;
  for (const auto& item : r.items) {
    out += "- " + item.kind;
    if (item.count) out += " (" + std::to_string(item.count) + (item.count == 1 ? " cell" : " cells") + ")";
    out += ": " + item.message + "\n";
    for (const auto& [row, value] : item.samples) {
      out += "    row " + std::to_string(row) + ": " + json(value).dump() + "\n";
    }
  }
  return out;
}

json to_json(const ErrorReport& r) {
  json items = json::array();
  for (const auto& i : r.items) {
    json samples = json::array();
    for (const auto& [row, value] : i.samples) samples.push_back({{"row", row}, {"value", value}});
    items.push_back({{"kind", i.kind}, {"message", i.message}, {"count", i.count}, {"samples", samples}});
  }
  return json{{"phase", r.phase == ErrorReport::Phase::Precheck ? "precheck" : "runtime"}, {"items", items}};
}

namespace {

std::string kind_word(OpKind k) {
  switch (k) {
    case OpKind::Augment: return "augment";
    case OpKind::Normalize: return "normalize";
    case OpKind::Filter: return "filter";
  }
  return "op";
}

const std::string& key_column(const LogicalOp& op) {
  static const std::string none;
  if (op.kind == OpKind::Normalize) return op.column;
  if (op.kind == OpKind::Augment && !op.source_columns.empty()) return op.source_columns.front();
  return none;
}

std::string function_list(const LogicalOp& op) {
  std::string out;
  for (const auto& f : plan::pool_for(op)) out += "- " + f.signature() + ": " + f.summary + "\n";
  return out;
}

std::string system_prompt(const LogicalOp& op, const Context& ctx) {
  return render_template(ctx.assets.prompt("programmer"), {{"functions", function_list(op)}});
}

std::string op_context(const LogicalOp& op, const std::string& question, const Table& t) {
  std::string out = "Operation: " + plan::format_op(op) + "\nQuestion: " + question +
                    "\nTable columns: " + json(t.column_names()).dump() + "\n";
  std::vector<std::string> cols;
  if (op.kind == OpKind::Augment) cols = op.source_columns;
  if (op.kind == OpKind::Normalize) cols.push_back(op.column);
  for (const auto& c : cols) {
    if (!t.has_column(c)) continue;
    out += "Values of " + c + ": " + json(distinct_values(t, c, 20)).dump() + "\n";
  }
  return out;
}

llm::ChatRequest make_request(const Context& ctx, std::string tag, std::string system, std::string user) {
  llm::ChatRequest req;
  req.tag = std::move(tag);
  req.temperature = ctx.temperature;
  req.max_input_tokens = ctx.max_input_tokens;
  req.messages.push_back({"system", std::move(system)});
  req.messages.push_back({"user", std::move(user)});
  return req;
}

// Decodes and checks that every transform argument parses.
std::optional<PhysicalOp> try_decode(const std::string& response, const LogicalOp& op, std::string& error) {
  PhysicalOp p;
  try {
    p = plan::decode(response, op);
  } catch (const plan::WireError& e) {
    error = e.what();
    return std::nullopt;
  }
  if (const auto* fn = plan::find_function(p.pool, p.function)) {
    for (const auto& spec : fn->args) {
      bool is_transform = spec.kind == plan::ArgKind::ScalarTransform || spec.kind == plan::ArgKind::RowTransform;
      if (!is_transform || !p.args.contains(spec.name) || !p.args.at(spec.name).is_string()) continue;
      try {
        texpr::parse_transform(p.args.at(spec.name).get<std::string>());
      } catch (const std::exception& e) {
        error = "argument '" + spec.name + "': " + e.what();
        return std::nullopt;
      }
    }
  }
  return p;
}

PhysicalOp complete_call(llm::ChatRequest req, const LogicalOp& op, Context& ctx) {
  std::string response = ctx.llm.complete(req);
  std::string error;
  if (auto p = try_decode(response, op, error)) return *p;
  req.tag += ".retry";
  req.messages.push_back({"assistant", response});
  req.messages.push_back({"user", ctx.assets.prompt("reminder_call") + "\nProblem: " + error});
  response = ctx.llm.complete(req);
  if (auto p = try_decode(response, op, error)) return *p;
  throw PhysicalParseFailure("no valid function call after retry: " + error, response);
}

}  // namespace

std::string step_tag(const LogicalOp& op, std::size_t step) {
  return "programmer." + kind_word(op.kind) + ".step" + std::to_string(step);
}

std::string memory_key(const LogicalOp& op, const Table& t) {
  const std::string& col = key_column(op);
  std::vector<std::string> samples;
  if (!col.empty() && t.has_column(col)) samples = distinct_values(t, col, 3);
  return memory::make_key(op.description, col, samples);
}

std::string physical_prompt(const LogicalOp& op, const std::string& question, const Table& t, const Context& ctx) {
  std::string user;
  bool demos = op.kind != OpKind::Filter && ctx.memory && !ctx.memory->empty() && ctx.demonstrations > 0;
  if (demos) {
    auto hits = ctx.memory->retrieve(memory_key(op, t), ctx.demonstrations, ctx.retrieval);
    user += "Solved examples:\n";
    for (const auto& h : hits) user += "Step: " + h.key + "\n" + h.payload + "\n\n";
  }
  user += op_context(op, question, t) + "Call:";
  return user;
}

PhysicalOp generate_physical(const LogicalOp& op, const std::string& question, const Table& t, std::size_t step,
                             Context& ctx) {
  auto req = make_request(ctx, step_tag(op, step), system_prompt(op, ctx), physical_prompt(op, question, t, ctx));
  return complete_call(std::move(req), op, ctx);
}

PhysicalOp repair(const PhysicalOp& p, const ErrorReport& report, const std::string& question, const Table& t,
                  std::size_t step, int round, Context& ctx) {
  std::string user = op_context(p.implements, question, t) + "Previous call:\n" + plan::encode(p) +
                     "\nProblems found:\n" + render(report) + ctx.assets.prompt("repair") + "\nCall:";
  auto req = make_request(ctx, step_tag(p.implements, step) + ".repair" + std::to_string(round),
                          system_prompt(p.implements, ctx), user);
  PhysicalOp fixed = complete_call(std::move(req), p.implements, ctx);
  fixed.implements = p.implements;
  fixed.provenance = {round, false};
  return fixed;
}

std::optional<PhysicalOp> infer_op(const LogicalOp& op, int round) {
  PhysicalOp p;
  p.implements = op;
  p.pool = plan::pool_of(op.kind);
  p.function = "infer";
  p.provenance = {round, true};
  if (op.kind == OpKind::Augment) {
    p.args = json{{"source_columns", op.source_columns}, {"target_column", op.new_column}};
  } else if (op.kind == OpKind::Normalize) {
    p.args = json{{"column", op.column}};
  } else {
    return std::nullopt;
  }
  return p;
}

Value parse_inferred(const std::string& raw, bool numeric_target) {
  std::string s = text::trim(raw);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    s = s.substr(1, s.size() - 2);
  }
  if (s == "None" || s == "null" || s == "NULL") return Value::null();
  if (numeric_target) {
    std::string digits;
    for (char c : s) {
      if (c != ',') digits.push_back(c);
    }
    if (auto n = parse_number(digits)) return *n;
  }
  return Value::str(s);
}

InferResult infer_cells(const LogicalOp& op, const std::vector<InferExample>& examples,
                        const std::map<std::size_t, std::map<std::string, std::string>>& failed_rows,
                        bool numeric_target, const std::string& tag, Context& ctx) {
  if (failed_rows.empty()) throw std::invalid_argument("infer_cells needs at least one failed row");
  std::string user = "Operation: " + plan::format_op(op) + "\nTarget column: " + op.target_column() + "\n";
  user += "Solved examples:\n";
  if (examples.empty()) user += "(none)\n";
  for (std::size_t i = 0; i < examples.size() && i < 8; ++i) {
    user += json(examples[i].inputs).dump() + " -> " + examples[i].output + "\n";
  }
  user += "Rows to fill:\n";
  for (const auto& [row, inputs] : failed_rows) user += "row " + std::to_string(row) + ": " + json(inputs).dump() + "\n";
  user += "Answer:";
  auto req = make_request(ctx, tag, ctx.assets.prompt("infer"), user);
  std::string response = ctx.llm.complete(req);

  InferResult out;
  for (const auto& line : text::split_lines(response)) {
    std::string l = text::trim(line);
    if (l.size() < 4 || !text::iequals(l.substr(0, 3), "row")) continue;
    std::size_t i = 3;
    while (i < l.size() && l[i] == ' ') ++i;
    std::size_t b = i;
    while (i < l.size() && std::isdigit(static_cast<unsigned char>(l[i]))) ++i;
    if (i == b || i - b > 9) continue;
    std::size_t row = std::stoul(l.substr(b, i - b));
    while (i < l.size() && l[i] == ' ') ++i;
    if (i >= l.size() || l[i] != ':') continue;
    if (!failed_rows.count(row) || out.values.count(row)) continue;
    out.values.emplace(row, parse_inferred(l.substr(i + 1), numeric_target));
  }
  for (const auto& [row, _] : failed_rows) {
    if (!out.values.count(row)) out.unmatched.push_back(row);
  }
  return out;
}

}  // namespace tqprep::programmer
