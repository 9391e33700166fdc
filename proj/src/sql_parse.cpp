#include <array>
#include <cctype>

#include "tqprep/sql.hpp"
#include "tqprep/text.hpp"

namespace tqprep::sql {

ParseError::ParseError(std::size_t position, std::string expected, const std::string& found)
    : std::runtime_error("SQL parse error at position " + std::to_string(position) + ": expected " + expected +
                         ", found " + found),
      position_(position),
      expected_(std::move(expected)) {}

const char* agg_name(AggKind k) {
  switch (k) {
    case AggKind::Sum: return "SUM";
    case AggKind::Count: return "COUNT";
    case AggKind::Avg: return "AVG";
    case AggKind::Min: return "MIN";
    case AggKind::Max: return "MAX";
  }
  return "?";
}

const char* cmp_text(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

namespace {

constexpr std::array<std::string_view, 13> kKeywords = {"SELECT", "FROM", "WHERE", "AND",  "GROUP", "BY",  "ORDER",
                                                        "ASC",    "DESC", "LIMIT", "LIKE", "IN",    "AS"};

bool is_keyword(std::string_view word) {
  std::string up = text::to_upper_ascii(word);
  for (auto k : kKeywords) {
    if (up == k) return true;
  }
  return false;
}

std::optional<AggKind> agg_from(std::string_view word) {
  std::string up = text::to_upper_ascii(word);
  if (up == "SUM") return AggKind::Sum;
  if (up == "COUNT") return AggKind::Count;
  if (up == "AVG") return AggKind::Avg;
  if (up == "MIN") return AggKind::Min;
  if (up == "MAX") return AggKind::Max;
  return std::nullopt;
}

struct Token {
  enum class Kind { Word, QuotedIdent, String, Number, Sym, End };
  Kind kind = Kind::End;
  std::string text;
  std::size_t pos = 0;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Token::Kind::End: return "end of input";
    case Token::Kind::String: return "string '" + t.text + "'";
    case Token::Kind::QuotedIdent: return "identifier \"" + t.text + "\"";
    default: return "'" + t.text + "'";
  }
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto ident_char = [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || u >= 0x80;
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token t;
    t.pos = i;
    if (c == '\'') {
      t.kind = Token::Kind::String;
      ++i;
      bool closed = false;
      while (i < s.size()) {
        if (s[i] == '\'') {
          if (i + 1 < s.size() && s[i + 1] == '\'') {
            t.text.push_back('\'');
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        t.text.push_back(s[i++]);
      }
      if (!closed) throw ParseError(t.pos, "closing quote", "end of input");
    } else if (c == '"' || c == '`') {
      t.kind = Token::Kind::QuotedIdent;
      char q = c;
      ++i;
      bool closed = false;
      while (i < s.size()) {
        if (s[i] == q) {
          if (i + 1 < s.size() && s[i + 1] == q) {
            t.text.push_back(q);
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        t.text.push_back(s[i++]);
      }
      if (!closed) throw ParseError(t.pos, "closing identifier quote", "end of input");
      if (t.text.empty()) throw ParseError(t.pos, "identifier", "empty quoted identifier");
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      t.kind = Token::Kind::Number;
      std::size_t b = i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      }
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t save = i;
        ++i;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
        if (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
          while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        } else {
          i = save;
        }
      }
      t.text = std::string(s.substr(b, i - b));
      if (i < s.size() && ident_char(s[i])) throw ParseError(i, "end of number", std::string(1, s[i]));
    } else if (ident_char(c)) {
      t.kind = Token::Kind::Word;
      std::size_t b = i;
      while (i < s.size() && ident_char(s[i])) ++i;
      t.text = std::string(s.substr(b, i - b));
    } else {
      t.kind = Token::Kind::Sym;
      static constexpr std::array<std::string_view, 4> two = {"<=", ">=", "!=", "<>"};
      bool matched = false;
      for (auto op : two) {
        if (s.substr(i, 2) == op) {
          t.text = std::string(op);
          i += 2;
          matched = true;
          break;
        }
      }
      if (!matched && s.substr(i, 2) == "==") {
        t.text = "=";
        i += 2;
        matched = true;
      }
      if (!matched) {
        if (std::string_view("=<>(),*;-").find(c) == std::string_view::npos) {
          throw ParseError(i, "SQL token", std::string("'") + c + "'");
        }
        t.text = std::string(1, c);
        ++i;
      }
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.pos = s.size();
  out.push_back(end);
  return out;
}

class Parser {
 public:
  Parser(std::string_view src, bool sketch) : toks_(lex(src)), sketch_(sketch) {}

  SqlQuery query() {
    SqlQuery q;
    q.sketch = sketch_;
    expect_kw("SELECT");
    q.select.push_back(select_item());
    while (accept_sym(",")) q.select.push_back(select_item());
    expect_kw("FROM");
    q.table = identifier("table name");
    if (accept_kw("WHERE")) {
      q.where.push_back(predicate());
      while (accept_kw("AND")) q.where.push_back(predicate());
    }
    if (accept_kw("GROUP")) {
      expect_kw("BY");
      q.group_by = identifier("column name");
    }
    if (accept_kw("ORDER")) {
      expect_kw("BY");
      OrderBy ob;
      if (peek().kind == Token::Kind::Word && peek(1).kind == Token::Kind::Sym && peek(1).text == "(") {
        ob.key = aggregate();
      } else {
        ob.key = identifier("column or aggregate");
      }
      if (accept_kw("DESC")) {
        ob.desc = true;
      } else {
        accept_kw("ASC");
      }
      q.order_by = ob;
    }
    if (accept_kw("LIMIT")) {
      const Token& t = peek();
      if (t.kind != Token::Kind::Number) fail("row count");
      auto v = parse_number(t.text);
      if (!v || !v->is_int() || v->as_int() < 0) fail("non-negative integer");
      q.limit = v->as_int();
      ++at_;
    }
    accept_sym(";");
    if (peek().kind != Token::Kind::End) fail("end of query");
    return q;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(at_ + ahead, toks_.size() - 1)]; }

  [[noreturn]] void fail(const std::string& expected) const { throw ParseError(peek().pos, expected, describe(peek())); }

  bool accept_kw(std::string_view kw) {
    if (peek().kind == Token::Kind::Word && text::iequals(peek().text, kw)) {
      ++at_;
      return true;
    }
    return false;
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail(std::string(kw));
  }
  bool accept_sym(std::string_view s) {
    if (peek().kind == Token::Kind::Sym && peek().text == s) {
      ++at_;
      return true;
    }
    return false;
  }
  void expect_sym(std::string_view s) {
    if (!accept_sym(s)) fail("'" + std::string(s) + "'");
  }

  std::string identifier(const std::string& what) {
    const Token& t = peek();
    if (t.kind == Token::Kind::QuotedIdent || (t.kind == Token::Kind::Word && !is_keyword(t.text))) {
      ++at_;
      return t.text;
    }
    fail(what);
  }

  Agg aggregate() {
    const Token& name = peek();
    auto kind = agg_from(name.text);
    if (!kind) fail("aggregate function");
    ++at_;
    expect_sym("(");
    Agg a;
    a.kind = *kind;
    if (accept_sym("*")) {
      if (a.kind != AggKind::Count) throw ParseError(toks_[at_ - 1].pos, "column name", "'*'");
    } else {
      a.column = identifier("column name or '*'");
    }
    expect_sym(")");
    return a;
  }

  SelectItem select_item() {
    const Token& t = peek();
    bool call = t.kind == Token::Kind::Word && peek(1).kind == Token::Kind::Sym && peek(1).text == "(";
    if (!call) return ColumnItem{identifier("column name")};
    if (agg_from(t.text)) return aggregate();
    if (!sketch_ || is_keyword(t.text)) fail("aggregate function");
    Udf u;
    u.description = t.text;
    ++at_;
    expect_sym("(");
    u.inputs.push_back(identifier("input column"));
    while (accept_sym(",")) u.inputs.push_back(identifier("input column"));
    expect_sym(")");
    expect_kw("AS");
    u.alias = identifier("alias");
    return u;
  }

  Value literal() {
    bool neg = accept_sym("-");
    const Token& t = peek();
    if (!neg && t.kind == Token::Kind::String) {
      ++at_;
      return Value::str(t.text);
    }
    if (t.kind != Token::Kind::Number) fail(neg ? "number" : "literal");
    auto v = parse_number(t.text);
    if (!v) fail("number");
    ++at_;
    if (!neg) return *v;
    if (v->is_int()) return Value::integer(-v->as_int());
    return Value::real(-v->as_float());
  }

  Predicate predicate() {
    Predicate p;
    p.column = identifier("column name");
    if (accept_kw("LIKE")) {
      p.kind = Predicate::Kind::Like;
      if (peek().kind != Token::Kind::String) fail("LIKE pattern string");
      p.literals.push_back(Value::str(peek().text));
      ++at_;
      return p;
    }
    if (accept_kw("IN")) {
      p.kind = Predicate::Kind::In;
      expect_sym("(");
      p.literals.push_back(literal());
      while (accept_sym(",")) p.literals.push_back(literal());
      expect_sym(")");
      return p;
    }
    const Token& op = peek();
    if (op.kind != Token::Kind::Sym) fail("comparison operator");
    if (op.text == "=") {
      p.op = CmpOp::Eq;
    } else if (op.text == "!=" || op.text == "<>") {
      p.op = CmpOp::Ne;
    } else if (op.text == "<") {
      p.op = CmpOp::Lt;
    } else if (op.text == "<=") {
      p.op = CmpOp::Le;
    } else if (op.text == ">") {
      p.op = CmpOp::Gt;
    } else if (op.text == ">=") {
      p.op = CmpOp::Ge;
    } else {
      fail("comparison operator");
    }
    ++at_;
    p.literals.push_back(literal());
    return p;
  }

  std::vector<Token> toks_;
  std::size_t at_ = 0;
  bool sketch_;
};

std::string print_literal(const Value& v) {
  if (v.is_str()) {
    std::string out = "'";
    for (char c : v.as_str()) {
      if (c == '\'') out += "''";
      else out.push_back(c);
    }
    return out + "'";
  }
  if (v.is_float()) return format_double(v.as_float());
  return v.to_text();
}

}  // namespace

SqlQuery parse_sql(std::string_view src) { return Parser(src, false).query(); }
SqlQuery parse_sketch(std::string_view src) { return Parser(src, true).query(); }

std::string quote_identifier(std::string_view name) {
  bool bare = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0])) && !is_keyword(name);
  for (char c : name) {
    auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || c == '_')) bare = false;
  }
  if (bare) return std::string(name);
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

std::string pretty_print(const Agg& a) {
  return std::string(agg_name(a.kind)) + "(" + (a.column ? quote_identifier(*a.column) : "*") + ")";
}

std::string pretty_print(const Predicate& p) {
  std::string out = quote_identifier(p.column);
  switch (p.kind) {
    case Predicate::Kind::Compare: return out + " " + cmp_text(p.op) + " " + print_literal(p.literals.at(0));
    case Predicate::Kind::Like: return out + " LIKE " + print_literal(p.literals.at(0));
    case Predicate::Kind::In: {
      out += " IN (";
      for (std::size_t i = 0; i < p.literals.size(); ++i) {
        if (i) out += ", ";
        out += print_literal(p.literals[i]);
      }
      return out + ")";
    }
  }
  return out;
}

namespace {
std::string print_item(const SelectItem& item) {
  if (auto c = std::get_if<ColumnItem>(&item)) return quote_identifier(c->name);
  if (auto a = std::get_if<Agg>(&item)) return pretty_print(*a);
  const auto& u = std::get<Udf>(item);
  std::string out = u.description + "(";
  for (std::size_t i = 0; i < u.inputs.size(); ++i) {
    if (i) out += ", ";
    out += quote_identifier(u.inputs[i]);
  }
  return out + ") AS " + quote_identifier(u.alias);
}
}  // namespace

std::string pretty_print(const SqlQuery& q) {
  std::string out = "SELECT ";
  for (std::size_t i = 0; i < q.select.size(); ++i) {
    if (i) out += ", ";
    out += print_item(q.select[i]);
  }
  out += " FROM " + quote_identifier(q.table);
  for (std::size_t i = 0; i < q.where.size(); ++i) {
    out += i ? " AND " : " WHERE ";
    out += pretty_print(q.where[i]);
  }
  if (q.group_by) out += " GROUP BY " + quote_identifier(*q.group_by);
  if (q.order_by) {
    out += " ORDER BY ";
    if (auto col = std::get_if<std::string>(&q.order_by->key)) {
      out += quote_identifier(*col);
    } else {
      out += pretty_print(std::get<Agg>(q.order_by->key));
    }
    if (q.order_by->desc) out += " DESC";
  }
  if (q.limit) out += " LIMIT " + std::to_string(*q.limit);
  return out;
}

const char* clause_kind_name(SketchClause::Kind k) {
  switch (k) {
    case SketchClause::Kind::Udf: return "udf";
    case SketchClause::Kind::Agg: return "agg";
    case SketchClause::Kind::Pred: return "pred";
    case SketchClause::Kind::Structural: return "structural";
  }
  return "?";
}

std::vector<SketchClause> clauses(const SqlQuery& s) {
  std::vector<std::string> aliases;
  for (const auto& item : s.select) {
    if (auto u = std::get_if<Udf>(&item)) aliases.push_back(u->alias);
  }
  auto is_alias = [&](const std::string& c) { return std::find(aliases.begin(), aliases.end(), c) != aliases.end(); };

  std::vector<SketchClause> udfs, aggs, preds, structural;
  for (const auto& item : s.select) {
    SketchClause c;
    c.text = print_item(item);
    if (auto u = std::get_if<Udf>(&item)) {
      c.kind = SketchClause::Kind::Udf;
      c.udf = *u;
      c.columns = u->inputs;
      udfs.push_back(std::move(c));
    } else if (auto a = std::get_if<Agg>(&item)) {
      c.agg = *a;
      if (a->column) c.columns.push_back(*a->column);
      // COUNT(*) and aggregates over derived columns need no data preparation.
      c.kind = (a->column && !is_alias(*a->column)) ? SketchClause::Kind::Agg : SketchClause::Kind::Structural;
      (c.kind == SketchClause::Kind::Agg ? aggs : structural).push_back(std::move(c));
    } else {
      c.columns.push_back(std::get<ColumnItem>(item).name);
      structural.push_back(std::move(c));
    }
  }
  for (const auto& p : s.where) {
    SketchClause c;
    c.pred = p;
    c.text = pretty_print(p);
    c.columns.push_back(p.column);
    c.kind = is_alias(p.column) ? SketchClause::Kind::Structural : SketchClause::Kind::Pred;
    (c.kind == SketchClause::Kind::Pred ? preds : structural).push_back(std::move(c));
  }
  if (s.group_by) {
    SketchClause c;
    c.text = "GROUP BY " + quote_identifier(*s.group_by);
    c.columns.push_back(*s.group_by);
    structural.push_back(std::move(c));
  }
  if (s.order_by) {
    SketchClause c;
    if (auto col = std::get_if<std::string>(&s.order_by->key)) {
      c.text = "ORDER BY " + quote_identifier(*col);
      c.columns.push_back(*col);
    } else {
      const auto& a = std::get<Agg>(s.order_by->key);
      c.text = "ORDER BY " + pretty_print(a);
      if (a.column) c.columns.push_back(*a.column);
      // An aggregate used only for ordering still needs its column prepared.
      bool listed = std::any_of(aggs.begin(), aggs.end(), [&](const SketchClause& x) { return x.agg == a; });
      if (a.column && !is_alias(*a.column) && !listed) {
        SketchClause ac;
        ac.kind = SketchClause::Kind::Agg;
        ac.agg = a;
        ac.text = pretty_print(a);
        ac.columns.push_back(*a.column);
        aggs.push_back(std::move(ac));
      }
    }
    if (s.order_by->desc) c.text += " DESC";
    structural.push_back(std::move(c));
  }
  if (s.limit) {
    SketchClause c;
    c.text = "LIMIT " + std::to_string(*s.limit);
    structural.push_back(std::move(c));
  }
  std::vector<SketchClause> out;
  for (auto* group : {&udfs, &aggs, &preds, &structural}) {
    for (auto& c : *group) out.push_back(std::move(c));
  }
  return out;
}

std::vector<ReferencedColumn> referenced_columns(const SqlQuery& q) {
  std::vector<std::string> aliases;
  for (const auto& item : q.select) {
    if (auto u = std::get_if<Udf>(&item)) aliases.push_back(u->alias);
  }
  std::vector<ReferencedColumn> out;
  auto add = [&](const std::string& name) {
    for (const auto& r : out) {
      if (r.name == name) return;
    }
    bool derived = std::find(aliases.begin(), aliases.end(), name) != aliases.end();
    out.push_back({name, derived});
  };
  for (const auto& item : q.select) {
    if (auto c = std::get_if<ColumnItem>(&item)) {
      add(c->name);
    } else if (auto a = std::get_if<Agg>(&item)) {
      if (a->column) add(*a->column);
    } else {
      const auto& u = std::get<Udf>(item);
      for (const auto& in : u.inputs) add(in);
      add(u.alias);
    }
  }
  for (const auto& p : q.where) add(p.column);
  if (q.group_by) add(*q.group_by);
  if (q.order_by) {
    if (auto col = std::get_if<std::string>(&q.order_by->key)) {
      add(*col);
    } else if (const auto& a = std::get<Agg>(q.order_by->key); a.column) {
      add(*a.column);
    }
  }
  return out;
}

}  // namespace tqprep::sql
