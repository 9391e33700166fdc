#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "tqprep/texpr.hpp"

namespace tqprep::texpr {

namespace {

constexpr std::array kKeywords = {"lambda", "if", "else", "and", "or", "not", "in", "True", "False", "None"};
constexpr std::array kBuiltins = {"int", "float", "str", "len", "abs", "round", "min", "max"};
constexpr std::array kStrMethods = {"replace", "split",      "strip",    "lstrip", "rstrip", "lower",
                                    "upper",   "startswith", "endswith", "find",   "zfill"};

template <std::size_t N>
bool contains(const std::array<const char*, N>& set, std::string_view s) {
  return std::any_of(set.begin(), set.end(), [&](const char* k) { return s == k; });
}

struct Token {
  enum class Kind { Ident, Keyword, Int, Float, Str, Op, End };
  Kind kind = Kind::End;
  std::string text;  // identifier/keyword/operator spelling, or decoded string body
  bool raw = false;
  std::size_t pos = 0;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Token::Kind::End: return "end of input";
    case Token::Kind::Str: return "string literal";
    default: return "'" + t.text + "'";
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.pos = i_;
      if (i_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      char c = src_[i_];
      if ((c == 'r' || c == 'R') && i_ + 1 < src_.size() && (src_[i_ + 1] == '\'' || src_[i_ + 1] == '"')) {
        ++i_;
        t.kind = Token::Kind::Str;
        t.raw = true;
        t.text = string_body(true, t.pos);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t b = i_;
        while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) ++i_;
        t.text = std::string(src_.substr(b, i_ - b));
        t.kind = contains(kKeywords, t.text) ? Token::Kind::Keyword : Token::Kind::Ident;
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && i_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
        number(t);
      } else if (c == '\'' || c == '"') {
        t.kind = Token::Kind::Str;
        t.text = string_body(false, t.pos);
      } else {
        t.kind = Token::Kind::Op;
        static constexpr std::array<std::string_view, 6> two = {"//", "==", "!=", "<=", ">=", "**"};
        std::string_view rest = src_.substr(i_);
        bool matched = false;
        for (auto op : two) {
          if (rest.substr(0, 2) == op) {
            if (op == "**") break;
            t.text = std::string(op);
            i_ += 2;
            matched = true;
            break;
          }
        }
        if (!matched) {
          static constexpr std::string_view singles = "+-*/%<>()[]:,.";
          if (singles.find(c) == std::string_view::npos) {
            throw ParseError(i_, "expression", std::string("'") + c + "'");
          }
          t.text = std::string(1, c);
          ++i_;
        }
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void skip_space() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
  }

  void number(Token& t) {
    std::size_t b = i_;
    bool is_float = false;
    while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) ++i_;
    if (i_ < src_.size() && src_[i_] == '.') {
      is_float = true;
      ++i_;
      while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) ++i_;
    }
    if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
      std::size_t save = i_;
      ++i_;
      if (i_ < src_.size() && (src_[i_] == '+' || src_[i_] == '-')) ++i_;
      if (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) {
        is_float = true;
        while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) ++i_;
      } else {
        i_ = save;
      }
    }
    if (i_ < src_.size() && (std::isalpha(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) {
      throw ParseError(i_, "operator", std::string("'") + src_[i_] + "'");
    }
    t.text = std::string(src_.substr(b, i_ - b));
    t.kind = is_float ? Token::Kind::Float : Token::Kind::Int;
  }

  std::string string_body(bool raw, std::size_t start) {
    char quote = src_[i_++];
    std::string out;
    while (i_ < src_.size()) {
      char c = src_[i_];
      if (c == quote) {
        ++i_;
        return out;
      }
      if (c == '\n') break;
      if (c == '\\' && i_ + 1 < src_.size()) {
        char n = src_[i_ + 1];
        i_ += 2;
        if (raw) {
          out.push_back('\\');
          out.push_back(n);
          continue;
        }
        switch (n) {
          case '\\': out.push_back('\\'); break;
          case '\'': out.push_back('\''); break;
          case '"': out.push_back('"'); break;
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          default:
            out.push_back('\\');
            out.push_back(n);
        }
        continue;
      }
      out.push_back(c);
      ++i_;
    }
    throw ParseError(start, "closing quote", "end of input");
  }

  std::string_view src_;
  std::size_t i_ = 0;
};

ExprPtr make(Expr::Kind kind, std::size_t pos, std::string text, std::vector<ExprPtr> kids) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->pos = pos;
  e->text = std::move(text);
  e->kids = std::move(kids);
  return e;
}

ExprPtr make_literal(std::size_t pos, Value v, bool raw = false) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Literal;
  e->pos = pos;
  e->literal = std::move(v);
  e->raw = raw;
  return e;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  TransformExpr transform() {
    expect_keyword("lambda");
    const Token& p = peek();
    if (p.kind != Token::Kind::Ident) throw ParseError(p.pos, "parameter name", describe(p));
    TransformExpr out;
    out.param = p.text;
    ++k_;
    expect_op(":");
    out.body = expr();
    if (peek().kind != Token::Kind::End) throw ParseError(peek().pos, "end of input", describe(peek()));
    return out;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(k_ + ahead, toks_.size() - 1)]; }
  bool is_op(std::string_view op, std::size_t ahead = 0) const {
    return peek(ahead).kind == Token::Kind::Op && peek(ahead).text == op;
  }
  bool is_kw(std::string_view kw, std::size_t ahead = 0) const {
    return peek(ahead).kind == Token::Kind::Keyword && peek(ahead).text == kw;
  }
  void expect_op(std::string_view op) {
    if (!is_op(op)) throw ParseError(peek().pos, "'" + std::string(op) + "'", describe(peek()));
    ++k_;
  }
  void expect_keyword(std::string_view kw) {
    if (!is_kw(kw)) throw ParseError(peek().pos, "'" + std::string(kw) + "'", describe(peek()));
    ++k_;
  }

  ExprPtr expr() { return cond(); }

  ExprPtr cond() {
    ExprPtr then = or_expr();
    if (!is_kw("if")) return then;
    std::size_t pos = peek().pos;
    ++k_;
    ExprPtr test = or_expr();
    expect_keyword("else");
    ExprPtr other = expr();
    return make(Expr::Kind::Cond, pos, "", {then, test, other});
  }

  ExprPtr or_expr() {
    ExprPtr lhs = and_expr();
    while (is_kw("or")) {
      std::size_t pos = peek().pos;
      ++k_;
      lhs = make(Expr::Kind::BoolOp, pos, "or", {lhs, and_expr()});
    }
    return lhs;
  }

  ExprPtr and_expr() {
    ExprPtr lhs = not_expr();
    while (is_kw("and")) {
      std::size_t pos = peek().pos;
      ++k_;
      lhs = make(Expr::Kind::BoolOp, pos, "and", {lhs, not_expr()});
    }
    return lhs;
  }

  ExprPtr not_expr() {
    if (is_kw("not")) {
      std::size_t pos = peek().pos;
      ++k_;
      return make(Expr::Kind::Not, pos, "", {not_expr()});
    }
    return cmp();
  }

  ExprPtr cmp() {
    ExprPtr lhs = arith();
    static constexpr std::array<std::string_view, 6> ops = {"==", "!=", "<", "<=", ">", ">="};
    for (auto op : ops) {
      if (is_op(op)) {
        std::size_t pos = peek().pos;
        ++k_;
        return make(Expr::Kind::Compare, pos, std::string(op), {lhs, arith()});
      }
    }
    if (is_kw("in")) {
      std::size_t pos = peek().pos;
      ++k_;
      return make(Expr::Kind::Compare, pos, "in", {lhs, arith()});
    }
    if (is_kw("not") && is_kw("in", 1)) {
      std::size_t pos = peek().pos;
      k_ += 2;
      return make(Expr::Kind::Compare, pos, "not in", {lhs, arith()});
    }
    return lhs;
  }

  ExprPtr arith() {
    ExprPtr lhs = term();
    while (is_op("+") || is_op("-")) {
      std::size_t pos = peek().pos;
      std::string op = peek().text;
      ++k_;
      lhs = make(Expr::Kind::Binary, pos, op, {lhs, term()});
    }
    return lhs;
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    while (is_op("*") || is_op("/") || is_op("//") || is_op("%")) {
      std::size_t pos = peek().pos;
      std::string op = peek().text;
      ++k_;
      lhs = make(Expr::Kind::Binary, pos, op, {lhs, unary()});
    }
    return lhs;
  }

  ExprPtr unary() {
    if (is_op("-")) {
      std::size_t pos = peek().pos;
      ++k_;
      return make(Expr::Kind::Neg, pos, "", {unary()});
    }
    return postfix();
  }

  std::vector<ExprPtr> args_until_close() {
    std::vector<ExprPtr> args;
    if (is_op(")")) {
      ++k_;
      return args;
    }
    for (;;) {
      args.push_back(expr());
      if (is_op(",")) {
        ++k_;
        continue;
      }
      expect_op(")");
      return args;
    }
  }

  ExprPtr postfix() {
    ExprPtr e = primary();
    for (;;) {
      if (is_op(".")) {
        ++k_;
        const Token& name = peek();
        if (name.kind != Token::Kind::Ident) throw ParseError(name.pos, "method name", describe(name));
        std::size_t pos = name.pos;
        std::string method = name.text;
        ++k_;
        if (!is_op("(")) throw ParseError(peek().pos, "'(' after method name", describe(peek()));
        ++k_;
        std::vector<ExprPtr> kids{e};
        for (auto& a : args_until_close()) kids.push_back(std::move(a));
        e = make(Expr::Kind::Method, pos, method, std::move(kids));
      } else if (is_op("[")) {
        std::size_t pos = peek().pos;
        ++k_;
        // x[:n] reads as x[0:n].
        ExprPtr key = is_op(":") ? make_literal(pos, Value::integer(0)) : expr();
        if (is_op(":")) {
          ++k_;
          std::vector<ExprPtr> kids{e, key};
          if (!is_op("]")) kids.push_back(expr());
          expect_op("]");
          e = make(Expr::Kind::Slice, pos, "", std::move(kids));
        } else {
          expect_op("]");
          e = make(Expr::Kind::Index, pos, "", {e, key});
        }
      } else if (is_op("(")) {
        std::size_t pos = peek().pos;
        if (e->kind != Expr::Kind::Name) throw ParseError(pos, "operator", "'('");
        ++k_;
        e = make(Expr::Kind::Call, e->pos, e->text, args_until_close());
      } else {
        return e;
      }
    }
  }

  ExprPtr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Token::Kind::Int: {
        std::int64_t v = 0;
        auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (res.ec != std::errc()) throw ParseError(t.pos, "integer within 64 bits", describe(t));
        ++k_;
        return make_literal(t.pos, Value::integer(v));
      }
      case Token::Kind::Float: {
        double d = 0;
        auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), d);
        if (res.ec != std::errc() || !std::isfinite(d)) throw ParseError(t.pos, "finite number", describe(t));
        ++k_;
        return make_literal(t.pos, Value::real(d));
      }
      case Token::Kind::Str:
        ++k_;
        return make_literal(t.pos, Value::str(t.text), t.raw);
      case Token::Kind::Keyword:
        if (t.text == "True" || t.text == "False") {
          ++k_;
          return make_literal(t.pos, Value::boolean(t.text == "True"));
        }
        if (t.text == "None") {
          ++k_;
          return make_literal(t.pos, Value::null());
        }
        break;
      case Token::Kind::Ident:
        ++k_;
        return make(Expr::Kind::Name, t.pos, t.text, {});
      case Token::Kind::Op:
        if (t.text == "(") {
          ++k_;
          ExprPtr inner = expr();
          expect_op(")");
          return inner;
        }
        break;
      case Token::Kind::End: break;
    }
    throw ParseError(t.pos, "expression", describe(t));
  }

  std::vector<Token> toks_;
  std::size_t k_ = 0;
};

bool is_row_access(const Expr& e, const std::string& param) {
  return e.kind == Expr::Kind::Index && e.kids[0]->kind == Expr::Kind::Name && e.kids[0]->text == param &&
         e.kids[1]->kind == Expr::Kind::Literal && e.kids[1]->literal.is_str();
}

struct Usage {
  bool row = false;
  bool bare = false;
};

// Enforces the name and method whitelist and records how the parameter is used.
void validate(const Expr& e, const std::string& param, Usage& use) {
  switch (e.kind) {
    case Expr::Kind::Name:
      if (e.text == param) {
        use.bare = true;
        return;
      }
      if (contains(kBuiltins, e.text)) throw ParseError(e.pos, "call of builtin '" + e.text + "'", "bare name");
      throw ParseError(e.pos, "lambda parameter '" + param + "'", "unknown name '" + e.text + "'");
    case Expr::Kind::Call:
      if (e.text == param || !contains(kBuiltins, e.text)) {
        throw ParseError(e.pos, "builtin function", "call of '" + e.text + "'");
      }
      break;
    case Expr::Kind::Method: {
      const Expr& recv = *e.kids[0];
      if (recv.kind == Expr::Kind::Name && recv.text == "re" && param != "re") {
        if (e.text != "search") throw ParseError(e.pos, "re.search", "re." + e.text);
        for (std::size_t i = 1; i < e.kids.size(); ++i) validate(*e.kids[i], param, use);
        return;
      }
      if (!contains(kStrMethods, e.text) && e.text != "group") {
        throw ParseError(e.pos, "whitelisted method", "method '" + e.text + "'");
      }
      break;
    }
    case Expr::Kind::Index:
      if (is_row_access(e, param)) {
        use.row = true;
        return;
      }
      break;
    default: break;
  }
  for (const auto& k : e.kids) validate(*k, param, use);
}

void collect_keys(const Expr& e, const std::string& param, std::set<std::string>& out) {
  if (is_row_access(e, param)) {
    out.insert(e.kids[1]->literal.as_str());
    return;
  }
  for (const auto& k : e.kids) collect_keys(*k, param, out);
}

// Precedence levels used by the printer; higher binds tighter.
int level_of(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Cond: return 1;
    case Expr::Kind::BoolOp: return e.text == "or" ? 2 : 3;
    case Expr::Kind::Not: return 4;
    case Expr::Kind::Compare: return 5;
    case Expr::Kind::Binary: return (e.text == "+" || e.text == "-") ? 6 : 7;
    case Expr::Kind::Neg: return 8;
    case Expr::Kind::Method:
    case Expr::Kind::Call:
    case Expr::Kind::Index:
    case Expr::Kind::Slice: return 9;
    case Expr::Kind::Literal:
    case Expr::Kind::Name: return 10;
  }
  return 10;
}

std::string quote_literal(const Expr& e) {
  const std::string& s = e.literal.as_str();
  bool raw_ok = e.raw && s.find('\'') == std::string::npos && s.find('\n') == std::string::npos;
  if (raw_ok) {
    std::size_t trailing = 0;
    for (auto it = s.rbegin(); it != s.rend() && *it == '\\'; ++it) ++trailing;
    raw_ok = trailing % 2 == 0;
  }
  if (raw_ok) return "r'" + s + "'";
  std::string out = "'";
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\'': out += "\\'"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out + "'";
}

std::string print(const Expr& e, int min_level);

std::string print_args(const Expr& e, std::size_t from) {
  std::string out;
  for (std::size_t i = from; i < e.kids.size(); ++i) {
    if (i > from) out += ", ";
    out += print(*e.kids[i], 1);
  }
  return out;
}

std::string print(const Expr& e, int min_level) {
  std::string s;
  switch (e.kind) {
    case Expr::Kind::Literal:
      switch (e.literal.kind()) {
        case Value::Kind::Null: s = "None"; break;
        case Value::Kind::Bool: s = e.literal.as_bool() ? "True" : "False"; break;
        case Value::Kind::Int: s = std::to_string(e.literal.as_int()); break;
        case Value::Kind::Float: s = format_double(e.literal.as_float()); break;
        case Value::Kind::Str: s = quote_literal(e); break;
      }
      break;
    case Expr::Kind::Name: s = e.text; break;
    case Expr::Kind::Neg: s = "-" + print(*e.kids[0], 8); break;
    case Expr::Kind::Not: s = "not " + print(*e.kids[0], 4); break;
    case Expr::Kind::Binary: {
      int lvl = level_of(e);
      s = print(*e.kids[0], lvl) + " " + e.text + " " + print(*e.kids[1], lvl + 1);
      break;
    }
    case Expr::Kind::Compare: s = print(*e.kids[0], 6) + " " + e.text + " " + print(*e.kids[1], 6); break;
    case Expr::Kind::BoolOp: {
      int lvl = level_of(e);
      s = print(*e.kids[0], lvl) + " " + e.text + " " + print(*e.kids[1], lvl + 1);
      break;
    }
    case Expr::Kind::Cond:
      s = print(*e.kids[0], 2) + " if " + print(*e.kids[1], 2) + " else " + print(*e.kids[2], 1);
      break;
    case Expr::Kind::Method: {
      const Expr& recv = *e.kids[0];
      bool numeric = recv.kind == Expr::Kind::Literal && recv.literal.is_numeric();
      s = (numeric ? "(" + print(recv, 1) + ")" : print(recv, 9)) + "." + e.text + "(" + print_args(e, 1) + ")";
      break;
    }
    case Expr::Kind::Call: s = e.text + "(" + print_args(e, 0) + ")"; break;
    case Expr::Kind::Index: s = print(*e.kids[0], 9) + "[" + print(*e.kids[1], 1) + "]"; break;
    case Expr::Kind::Slice:
      s = print(*e.kids[0], 9) + "[" + print(*e.kids[1], 1) + ":" + (e.kids.size() > 2 ? print(*e.kids[2], 1) : "") +
          "]";
      break;
  }
  if (level_of(e) < min_level) return "(" + s + ")";
  return s;
}

}  // namespace

ParseError::ParseError(std::size_t position, std::string expected, const std::string& found)
    : std::runtime_error("parse error at position " + std::to_string(position) + ": expected " + expected +
                         ", found " + found),
      position_(position),
      expected_(std::move(expected)) {}

MissingKeyError::MissingKeyError(std::string column)
    : EvalError("KeyError: '" + column + "'"), column_(std::move(column)) {}

const char* mode_name(Mode m) { return m == Mode::Scalar ? "scalar" : "row"; }

bool same_ast(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.text != b.text || a.kids.size() != b.kids.size()) return false;
  if (a.kind == Expr::Kind::Literal && !(a.literal == b.literal)) return false;
  for (std::size_t i = 0; i < a.kids.size(); ++i) {
    if (!same_ast(*a.kids[i], *b.kids[i])) return false;
  }
  return true;
}

TransformExpr parse_transform(std::string_view src) {
  Parser parser(Lexer(src).run());
  TransformExpr out = parser.transform();
  Usage use;
  validate(*out.body, out.param, use);
  if (use.row && use.bare) {
    throw ModeError("parameter '" + out.param + "' is used both as a row (" + out.param +
                    "['...']) and as a scalar value");
  }
  out.mode = use.row ? Mode::Row : Mode::Scalar;
  out.param_free = !use.row && !use.bare;
  return out;
}

std::string pretty_print(const TransformExpr& e) { return "lambda " + e.param + ": " + print(*e.body, 1); }

std::set<std::string> referenced_keys(const TransformExpr& e) {
  std::set<std::string> out;
  if (e.mode == Mode::Row) collect_keys(*e.body, e.param, out);
  return out;
}

}  // namespace tqprep::texpr
