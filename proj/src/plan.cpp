#include "tqprep/plan.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "tqprep/text.hpp"

namespace tqprep::plan {

using nlohmann::json;

const char* op_kind_name(OpKind k) {
  switch (k) {
    case OpKind::Augment: return "Augment";
    case OpKind::Normalize: return "Normalize";
    case OpKind::Filter: return "Filter";
  }
  return "?";
}

LogicalOp LogicalOp::augment(std::string description, std::vector<std::string> sources, std::string new_column) {
  LogicalOp op;
  op.kind = OpKind::Augment;
  op.description = std::move(description);
  op.source_columns = std::move(sources);
  op.new_column = std::move(new_column);
  return op;
}

LogicalOp LogicalOp::normalize(std::string description, std::string column) {
  LogicalOp op;
  op.kind = OpKind::Normalize;
  op.description = std::move(description);
  op.column = std::move(column);
  return op;
}

LogicalOp LogicalOp::filter(std::vector<std::string> columns) {
  LogicalOp op;
  op.kind = OpKind::Filter;
  op.columns = std::move(columns);
  return op;
}

void validate(const LogicalOp& op) {
  switch (op.kind) {
    case OpKind::Augment:
      if (op.new_column.empty()) throw std::invalid_argument("Augment needs a new column name");
      if (op.source_columns.empty()) throw std::invalid_argument("Augment needs at least one source column");
      break;
    case OpKind::Normalize:
      if (op.column.empty()) throw std::invalid_argument("Normalize needs a column");
      break;
    case OpKind::Filter:
      if (op.columns.empty()) throw std::invalid_argument("Filter needs at least one column");
      break;
  }
}

namespace {

std::string render_name(const std::string& name) {
  bool bare = !name.empty() && !std::isspace(static_cast<unsigned char>(name.front())) &&
              !std::isspace(static_cast<unsigned char>(name.back())) &&
              name.find_first_of(",[]()\"'") == std::string::npos && name.find("->") == std::string::npos;
  return bare ? name : json(name).dump();
}

std::string render_list(const std::vector<std::string>& names) {
  std::string out = "[";
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += render_name(names[i]);
  }
  return out + "]";
}

class LineCursor {
 public:
  explicit LineCursor(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(std::string_view tok) {
    skip_ws();
    if (s_.substr(i_, tok.size()) == tok) {
      i_ += tok.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view tok) {
    if (!eat(tok)) throw std::invalid_argument("expected '" + std::string(tok) + "' at column " + std::to_string(i_));
  }
  bool at_end() {
    skip_ws();
    return i_ >= s_.size();
  }
  std::string rest() {
    skip_ws();
    return std::string(s_.substr(i_));
  }

  std::string quoted() {
    skip_ws();
    if (i_ >= s_.size() || (s_[i_] != '"' && s_[i_] != '\'')) {
      throw std::invalid_argument("expected a quoted string at column " + std::to_string(i_));
    }
    char q = s_[i_++];
    std::string out;
    while (i_ < s_.size() && s_[i_] != q) {
      if (s_[i_] == '\\' && i_ + 1 < s_.size()) {
        char n = s_[i_ + 1];
        out.push_back(n == 'n' ? '\n' : (n == 't' ? '\t' : n));
        i_ += 2;
        continue;
      }
      out.push_back(s_[i_++]);
    }
    if (i_ >= s_.size()) throw std::invalid_argument("unterminated string");
    ++i_;
    return out;
  }

  // A column name: quoted, or bare text up to one of the stop characters.
  std::string name(std::string_view stops) {
    skip_ws();
    if (i_ < s_.size() && (s_[i_] == '"' || s_[i_] == '\'')) return quoted();
    std::size_t b = i_;
    while (i_ < s_.size() && stops.find(s_[i_]) == std::string_view::npos) ++i_;
    std::string out = text::trim(s_.substr(b, i_ - b));
    if (out.empty()) throw std::invalid_argument("expected a column name at column " + std::to_string(b));
    return out;
  }

  std::vector<std::string> list() {
    expect("[");
    std::vector<std::string> out;
    if (eat("]")) return out;
    for (;;) {
      out.push_back(name(",]"));
      if (eat("]")) return out;
      expect(",");
    }
  }

  // Bare name that may contain ')' only when it is not the final one.
  std::string name_before_final_paren() {
    skip_ws();
    if (i_ < s_.size() && (s_[i_] == '"' || s_[i_] == '\'')) return quoted();
    auto close = s_.rfind(')');
    if (close == std::string_view::npos || close < i_) throw std::invalid_argument("missing ')'");
    std::string out = text::trim(s_.substr(i_, close - i_));
    if (out.empty()) throw std::invalid_argument("expected a column name");
    i_ = close;
    return out;
  }

  std::size_t pos() const { return i_; }

 private:
  std::string_view s_;
  std::size_t i_ = 0;
};

std::string strip_decoration(std::string_view line) {
  std::string s = text::trim(line);
  // Leading list markers such as "- ", "* ", "1. ", "2) ".
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) {
    s = text::trim(std::string_view(s).substr(i + 1));
  } else if (!s.empty() && (s[0] == '-' || s[0] == '*') && s.size() > 1 && s[1] == ' ') {
    s = text::trim(std::string_view(s).substr(2));
  }
  while (!s.empty() && s.front() == '`') s.erase(s.begin());
  while (!s.empty() && s.back() == '`') s.pop_back();
  return text::trim(s);
}

}  // namespace

std::string format_op(const LogicalOp& op) {
  switch (op.kind) {
    case OpKind::Augment:
      return "Augment(" + json(op.description).dump() + ", " + render_list(op.source_columns) + ") -> " +
             render_name(op.new_column);
    case OpKind::Normalize: return "Normalize(" + json(op.description).dump() + ", " + render_name(op.column) + ")";
    case OpKind::Filter: return "Filter(" + render_list(op.columns) + ")";
  }
  return "";
}

OpLine parse_op_line(std::string_view raw) {
  OpLine out;
  std::string line = strip_decoration(raw);
  if (line == "None" || line == "None." || line == "none") {
    out.status = OpLine::Status::None;
    return out;
  }
  std::size_t i = 0;
  while (i < line.size() && (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_')) ++i;
  if (i == 0 || !std::isalpha(static_cast<unsigned char>(line[0]))) return out;
  std::size_t j = i;
  while (j < line.size() && line[j] == ' ') ++j;
  if (j >= line.size() || line[j] != '(') return out;
  out.name = line.substr(0, i);
  if (out.name != "Augment" && out.name != "Normalize" && out.name != "Filter") {
    out.status = OpLine::Status::Unknown;
    return out;
  }
  LineCursor c(std::string_view(line).substr(j + 1));
  try {
    if (out.name == "Augment") {
      std::string desc = c.quoted();
      c.expect(",");
      auto sources = c.list();
      c.expect(")");
      c.expect("->");
      std::string rest = c.rest();
      LineCursor r(rest);
      std::string target = (!rest.empty() && (rest[0] == '"' || rest[0] == '\'')) ? r.quoted() : text::trim(rest);
      out.op = LogicalOp::augment(std::move(desc), std::move(sources), std::move(target));
    } else if (out.name == "Normalize") {
      std::string desc = c.quoted();
      c.expect(",");
      std::string col = c.name_before_final_paren();
      c.expect(")");
      if (!c.at_end()) throw std::invalid_argument("trailing text after Normalize(...)");
      out.op = LogicalOp::normalize(std::move(desc), std::move(col));
    } else {
      auto cols = c.list();
      c.expect(")");
      if (!c.at_end()) throw std::invalid_argument("trailing text after Filter(...)");
      out.op = LogicalOp::filter(std::move(cols));
    }
    validate(out.op);
    out.status = OpLine::Status::Ok;
  } catch (const std::invalid_argument& e) {
    out.status = OpLine::Status::Malformed;
    out.error = e.what();
  }
  return out;
}

bool enforce_filter_last(std::vector<LogicalOp>& ops) {
  std::optional<LogicalOp> first;
  std::vector<LogicalOp> rest;
  bool clean = true;
  for (auto& op : ops) {
    if (op.kind != OpKind::Filter) {
      rest.push_back(std::move(op));
    } else if (!first) {
      first = std::move(op);
    } else {
      clean = false;
    }
  }
  if (first) rest.push_back(std::move(*first));
  ops = std::move(rest);
  return clean;
}

const char* pool_name(Pool p) {
  switch (p) {
    case Pool::Aug: return "aug";
    case Pool::Norm: return "norm";
    case Pool::Filter: return "filter";
  }
  return "?";
}

Pool pool_of(OpKind k) {
  switch (k) {
    case OpKind::Augment: return Pool::Aug;
    case OpKind::Normalize: return Pool::Norm;
    case OpKind::Filter: return Pool::Filter;
  }
  return Pool::Filter;
}

const char* arg_kind_name(ArgKind k) {
  switch (k) {
    case ArgKind::ColumnName: return "column name";
    case ArgKind::ColumnList: return "list of column names";
    case ArgKind::ScalarTransform: return "lambda over one cell";
    case ArgKind::RowTransform: return "lambda over a row";
    case ArgKind::FormatString: return "date format string";
    case ArgKind::TransDict: return "replacement mapping";
  }
  return "?";
}

std::string PoolFunction::signature() const {
  std::string out = name + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += args[i].name + ": " + arg_kind_name(args[i].kind);
  }
  return out + ")";
}

const std::vector<PoolFunction>& registry() {
  static const std::vector<PoolFunction> fns = {
      {Pool::Aug,
       "extract",
       {{"column", ArgKind::ColumnName}, {"func", ArgKind::ScalarTransform}},
       "apply func to each cell of column, e.g. pull a substring out with re.search"},
      {Pool::Aug,
       "calculate",
       {{"columns", ArgKind::ColumnList}, {"func", ArgKind::RowTransform}},
       "compute a number per row from other columns, read as x['Name']"},
      {Pool::Aug,
       "map_to_boolean",
       {{"columns", ArgKind::ColumnList}, {"func", ArgKind::RowTransform}},
       "compute True or False per row from other columns"},
      {Pool::Aug,
       "concatenate",
       {{"columns", ArgKind::ColumnList}, {"func", ArgKind::RowTransform}},
       "build a string per row from other columns"},
      {Pool::Aug,
       "infer",
       {{"source_columns", ArgKind::ColumnList}, {"target_column", ArgKind::ColumnName}},
       "let the model fill the new column when no lambda can compute it"},
      {Pool::Norm,
       "to_numerical",
       {{"column", ArgKind::ColumnName}, {"func", ArgKind::ScalarTransform}},
       "turn each cell into an int or float, e.g. after stripping symbols"},
      {Pool::Norm,
       "format_datetime",
       {{"column", ArgKind::ColumnName}, {"format", ArgKind::FormatString}},
       "rewrite dates in one layout using %Y %y %m %d %b %B %H %M"},
      {Pool::Norm,
       "clean_string",
       {{"column", ArgKind::ColumnName}, {"trans_dict", ArgKind::TransDict}},
       "replace substrings according to a {\"old\": \"new\"} mapping"},
      {Pool::Norm, "infer", {{"column", ArgKind::ColumnName}}, "let the model rewrite values the other tools cannot"},
      {Pool::Filter,
       "filter_columns",
       {{"rel_columns", ArgKind::ColumnList}},
       "keep only these columns, in this order"},
  };
  return fns;
}

std::vector<PoolFunction> pool_for(const LogicalOp& op) {
  std::vector<PoolFunction> out;
  Pool p = pool_of(op.kind);
  for (const auto& f : registry()) {
    if (f.pool == p) out.push_back(f);
  }
  return out;
}

const PoolFunction* find_function(Pool pool, std::string_view name) {
  for (const auto& f : registry()) {
    if (f.pool == pool && f.name == name) return &f;
  }
  return nullptr;
}

texpr::TransformExpr PhysicalOp::transform(const std::string& arg) const {
  return texpr::parse_transform(args.at(arg).get<std::string>());
}

std::string PhysicalOp::str_arg(const std::string& arg) const { return args.at(arg).get<std::string>(); }

std::vector<std::string> PhysicalOp::list_arg(const std::string& arg) const {
  return args.at(arg).get<std::vector<std::string>>();
}

std::string encode(const PhysicalOp& p) { return "function: " + p.function + "\nargs: " + p.args.dump(); }

PhysicalOp decode(std::string_view text_in, const LogicalOp& implements) {
  auto lines = text::split_lines(text_in);
  std::optional<std::string> fn;
  std::optional<json> args;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = strip_decoration(lines[i]);
    if (!fn && text::starts_with(line, "function:")) {
      std::string name = text::trim(std::string_view(line).substr(9));
      while (!name.empty() && (name.front() == '"' || name.front() == '\'' || name.front() == '`')) name.erase(0, 1);
      while (!name.empty() && (name.back() == '"' || name.back() == '\'' || name.back() == '`' || name.back() == ','))
        name.pop_back();
      fn = name;
      continue;
    }
    if (fn && !args && text::starts_with(line, "args:")) {
      std::string body = text::trim(std::string_view(line).substr(5));
      for (std::size_t k = i + 1;; ++k) {
        json parsed = json::parse(body, nullptr, false);
        if (!parsed.is_discarded()) {
          args = std::move(parsed);
          break;
        }
        if (k >= lines.size() || text::starts_with(text::trim(lines[k]), "```")) break;
        body += "\n" + lines[k];
      }
      if (!args) throw WireError("args line is not valid JSON");
    }
  }
  if (!fn || fn->empty()) throw WireError("missing 'function:' line");
  if (!args) throw WireError("missing 'args:' line");
  if (!args->is_object()) throw WireError("args must be a JSON object");
  PhysicalOp p;
  p.pool = pool_of(implements.kind);
  p.function = *fn;
  p.args = std::move(*args);
  p.implements = implements;
  return p;
}

const char* issue_kind_name(PrecheckIssue::Kind k) {
  switch (k) {
    case PrecheckIssue::Kind::NamingError: return "NamingError";
    case PrecheckIssue::Kind::TypeError: return "TypeError";
    case PrecheckIssue::Kind::ValueError: return "ValueError";
  }
  return "?";
}

bool PrecheckReport::has(PrecheckIssue::Kind k) const {
  return std::any_of(issues.begin(), issues.end(), [k](const PrecheckIssue& i) { return i.kind == k; });
}

bool supported_datetime_format(std::string_view fmt, std::string* bad) {
  bool any = false;
  for (std::size_t i = 0; i < fmt.size(); ++i) {
    if (fmt[i] != '%') continue;
    if (i + 1 >= fmt.size()) {
      if (bad) *bad = "%";
      return false;
    }
    char d = fmt[++i];
    if (std::string_view("YymdbBHM%").find(d) == std::string_view::npos) {
      if (bad) *bad = std::string("%") + d;
      return false;
    }
    if (d != '%') any = true;
  }
  if (!any && bad) *bad = "(no directive)";
  return any;
}

PrecheckReport precheck(const PhysicalOp& p, const Table& t) {
  using K = PrecheckIssue::Kind;
  PrecheckReport rep;
  auto issue = [&](K k, const std::string& arg, const std::string& msg) { rep.issues.push_back({k, arg, msg}); };

  const PoolFunction* fn = find_function(p.pool, p.function);
  if (!fn) {
    std::string names;
    for (const auto& f : registry()) {
      if (f.pool != p.pool) continue;
      names += (names.empty() ? "" : ", ") + f.name;
    }
    issue(K::NamingError, "", "function '" + p.function + "' is not in the " + pool_name(p.pool) +
                                  " pool (available: " + names + ")");
    return rep;
  }
  if (!p.args.is_object()) {
    issue(K::TypeError, "", "args must be a JSON object");
    return rep;
  }
  std::set<std::string> expected;
  for (const auto& a : fn->args) expected.insert(a.name);
  for (const auto& [key, _] : p.args.items()) {
    if (!expected.count(key)) issue(K::NamingError, key, "unexpected argument '" + key + "' for " + fn->signature());
  }
  for (const auto& spec : fn->args) {
    if (!p.args.contains(spec.name)) {
      issue(K::NamingError, spec.name, "missing argument '" + spec.name + "' for " + fn->signature());
    }
  }
  if (!rep.ok()) return rep;

  auto check_column = [&](const std::string& arg, const std::string& col) {
    if (!t.has_column(col)) issue(K::ValueError, arg, "column '" + col + "' does not exist in the table");
  };

  for (const auto& spec : fn->args) {
    const json& v = p.args.at(spec.name);
    switch (spec.kind) {
      case ArgKind::ColumnName:
        if (!v.is_string()) {
          issue(K::TypeError, spec.name, "'" + spec.name + "' must be a column name string");
        } else if (!(fn->name == "infer" && spec.name == "target_column")) {
          check_column(spec.name, v.get<std::string>());
        }
        break;
      case ArgKind::ColumnList: {
        bool ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); });
        if (!ok) {
          issue(K::TypeError, spec.name, "'" + spec.name + "' must be a list of column names");
        } else if (v.empty()) {
          issue(K::ValueError, spec.name, "'" + spec.name + "' must not be empty");
        } else {
          for (const auto& e : v) check_column(spec.name, e.get<std::string>());
        }
        break;
      }
      case ArgKind::ScalarTransform:
      case ArgKind::RowTransform: {
        if (!v.is_string()) {
          issue(K::TypeError, spec.name, "'" + spec.name + "' must be a lambda expression string");
          break;
        }
        try {
          auto e = texpr::parse_transform(v.get<std::string>());
          texpr::Mode want = spec.kind == ArgKind::ScalarTransform ? texpr::Mode::Scalar : texpr::Mode::Row;
          if (e.mode != want && !e.param_free) {
            issue(K::TypeError, spec.name,
                  std::string("'") + spec.name + "' must be a " + arg_kind_name(spec.kind) + ", got a " +
                      texpr::mode_name(e.mode) + " lambda");
          }
          for (const auto& key : texpr::referenced_keys(e)) check_column(spec.name, key);
        } catch (const texpr::ParseError& e) {
          issue(K::TypeError, spec.name, std::string("'") + spec.name + "' does not parse: " + e.what());
        } catch (const texpr::ModeError& e) {
          issue(K::TypeError, spec.name, std::string("'") + spec.name + "': " + e.what());
        }
        break;
      }
      case ArgKind::FormatString: {
        if (!v.is_string()) {
          issue(K::TypeError, spec.name, "'" + spec.name + "' must be a format string");
          break;
        }
        std::string bad;
        if (!supported_datetime_format(v.get<std::string>(), &bad)) {
          issue(K::ValueError, spec.name, "unsupported date format directive " + bad);
        }
        break;
      }
      case ArgKind::TransDict: {
        bool ok = v.is_object() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); });
        if (!ok) {
          issue(K::TypeError, spec.name, "'" + spec.name + "' must map strings to strings");
        } else if (v.empty()) {
          issue(K::ValueError, spec.name, "'" + spec.name + "' must not be empty");
        } else if (v.contains("")) {
          issue(K::ValueError, spec.name, "'" + spec.name + "' has an empty key");
        }
        break;
      }
    }
  }

  const LogicalOp& op = p.implements;
  if (op.kind == OpKind::Augment) {
    if (t.has_column(op.new_column)) {
      issue(K::ValueError, "", "new column '" + op.new_column + "' already exists in the table");
    }
    if (fn->name == "infer" && p.args.at("target_column").is_string() &&
        p.args.at("target_column").get<std::string>() != op.new_column) {
      issue(K::ValueError, "target_column", "target_column must be '" + op.new_column + "'");
    }
  } else if (op.kind == OpKind::Normalize) {
    const json& col = p.args.at("column");
    if (col.is_string() && col.get<std::string>() != op.column) {
      issue(K::ValueError, "column", "this step normalizes '" + op.column + "', not '" + col.get<std::string>() + "'");
    }
  }
  return rep;
}

const std::vector<OpTypeSpec>& op_type_specs() {
  static const std::vector<OpTypeSpec> specs = {
      {OpKind::Augment,
       "Augment adds one new column whose values are computed from existing columns. Use it when the question "
       "relies on a value that no column holds directly, such as a code inside a name or a ratio of two columns."},
      {OpKind::Normalize,
       "Normalize rewrites one existing column so every value has the same type or layout. Use it when a column "
       "mixes formats that would break comparison, sorting or arithmetic."},
      {OpKind::Filter,
       "Filter keeps only the listed columns. Use it last, naming every column the answer query will read."},
  };
  return specs;
}

json to_json(const LogicalOp& op) {
  json j{{"kind", op_kind_name(op.kind)}};
  switch (op.kind) {
    case OpKind::Augment:
      j["description"] = op.description;
      j["source_columns"] = op.source_columns;
      j["new_column"] = op.new_column;
      break;
    case OpKind::Normalize:
      j["description"] = op.description;
      j["column"] = op.column;
      break;
    case OpKind::Filter: j["columns"] = op.columns; break;
  }
  return j;
}

LogicalOp logical_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "Augment") {
    return LogicalOp::augment(j.at("description").get<std::string>(),
                              j.at("source_columns").get<std::vector<std::string>>(),
                              j.at("new_column").get<std::string>());
  }
  if (kind == "Normalize") {
    return LogicalOp::normalize(j.at("description").get<std::string>(), j.at("column").get<std::string>());
  }
  if (kind == "Filter") return LogicalOp::filter(j.at("columns").get<std::vector<std::string>>());
  throw std::invalid_argument("unknown operation kind '" + kind + "'");
}

json to_json(const PhysicalOp& p) {
  return json{{"pool", pool_name(p.pool)},
              {"function", p.function},
              {"args", p.args},
              {"implements", to_json(p.implements)},
              {"round", p.provenance.round},
              {"inferred", p.provenance.inferred}};
}

PhysicalOp physical_from_json(const json& j) {
  PhysicalOp p;
  p.implements = logical_from_json(j.at("implements"));
  p.pool = pool_of(p.implements.kind);
  p.function = j.at("function").get<std::string>();
  p.args = j.at("args");
  p.provenance.round = j.value("round", 0);
  p.provenance.inferred = j.value("inferred", false);
  return p;
}

}  // namespace tqprep::plan
