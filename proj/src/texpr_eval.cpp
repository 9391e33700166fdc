#include <climits>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <mutex>
#include <regex>
#include <unordered_map>
#include <vector>

#include "tqprep/text.hpp"
#include "tqprep/texpr.hpp"

namespace tqprep::texpr {

namespace {

using I64 = std::int64_t;

const char* type_name(const EvalValue& v) {
  switch (v.index()) {
    case 0: return "NoneType";
    case 1: return "bool";
    case 2: return "int";
    case 3: return "float";
    case 4: return "str";
    case 5: return "re.Match";
    case 6: return "list";
  }
  return "object";
}

bool is_none(const EvalValue& v) { return v.index() == 0; }
bool is_bool(const EvalValue& v) { return std::holds_alternative<bool>(v); }
bool is_int(const EvalValue& v) { return std::holds_alternative<I64>(v); }
bool is_float(const EvalValue& v) { return std::holds_alternative<double>(v); }
bool is_str(const EvalValue& v) { return std::holds_alternative<std::string>(v); }
// Python treats bool as an int subtype in arithmetic.
bool is_intlike(const EvalValue& v) { return is_int(v) || is_bool(v); }
bool is_number(const EvalValue& v) { return is_intlike(v) || is_float(v); }

I64 int_of(const EvalValue& v) { return is_bool(v) ? (std::get<bool>(v) ? 1 : 0) : std::get<I64>(v); }
double num_of(const EvalValue& v) { return is_float(v) ? std::get<double>(v) : static_cast<double>(int_of(v)); }
const std::string& str_of(const EvalValue& v) { return std::get<std::string>(v); }

EvalValue from_value(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Null: return std::monostate{};
    case Value::Kind::Bool: return v.as_bool();
    case Value::Kind::Int: return v.as_int();
    case Value::Kind::Float: return v.as_float();
    case Value::Kind::Str: return v.as_str();
  }
  return std::monostate{};
}

Value to_value(const EvalValue& v) {
  switch (v.index()) {
    case 0: return Value::null();
    case 1: return Value::boolean(std::get<bool>(v));
    case 2: return Value::integer(std::get<I64>(v));
    case 3: {
      double d = std::get<double>(v);
      if (!std::isfinite(d)) throw EvalError("result is not a finite number");
      return Value::real(d);
    }
    case 4: return Value::str(std::get<std::string>(v));
  }
  throw EvalError(std::string("result of type '") + type_name(v) + "' cannot be stored in a cell");
}

bool truthy(const EvalValue& v) {
  switch (v.index()) {
    case 0: return false;
    case 1: return std::get<bool>(v);
    case 2: return std::get<I64>(v) != 0;
    case 3: return std::get<double>(v) != 0.0;
    case 4: return !std::get<std::string>(v).empty();
    case 5: return true;
    case 6: return !std::get<List>(v).items.empty();
  }
  return false;
}

std::string py_str(const EvalValue& v) {
  switch (v.index()) {
    case 0: return "None";
    case 1: return std::get<bool>(v) ? "True" : "False";
    case 2: return std::to_string(std::get<I64>(v));
    case 3: return format_double(std::get<double>(v));
    case 4: return std::get<std::string>(v);
    case 5: return "<re.Match object>";
    case 6: {
      std::string out = "[";
      const auto& items = std::get<List>(v).items;
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += "'" + items[i] + "'";
      }
      return out + "]";
    }
  }
  return "";
}

[[noreturn]] void unsupported(const std::string& op, const EvalValue& a, const EvalValue& b) {
  throw EvalError("unsupported operand type(s) for " + op + ": '" + type_name(a) + "' and '" + type_name(b) + "'");
}

I64 checked(bool overflow, const I64& v) {
  if (overflow) throw EvalError("integer overflow");
  return v;
}

I64 floor_div(I64 a, I64 b) {
  if (b == 0) throw EvalError("ZeroDivisionError: integer division or modulo by zero");
  if (a == LLONG_MIN && b == -1) throw EvalError("integer overflow");
  I64 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

I64 floor_mod(I64 a, I64 b) {
  if (b == 0) throw EvalError("ZeroDivisionError: integer division or modulo by zero");
  if (b == -1) return 0;
  I64 r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) r += b;
  return r;
}

EvalValue arithmetic(const std::string& op, const EvalValue& a, const EvalValue& b) {
  if (op == "+" && is_str(a) && is_str(b)) return str_of(a) + str_of(b);
  if (!is_number(a) || !is_number(b)) unsupported(op, a, b);
  if (op == "/") {
    double d = num_of(b);
    if (d == 0.0) throw EvalError("ZeroDivisionError: division by zero");
    return num_of(a) / d;
  }
  if (is_intlike(a) && is_intlike(b)) {
    I64 x = int_of(a), y = int_of(b), r = 0;
    if (op == "+") return checked(__builtin_add_overflow(x, y, &r), r);
    if (op == "-") return checked(__builtin_sub_overflow(x, y, &r), r);
    if (op == "*") return checked(__builtin_mul_overflow(x, y, &r), r);
    if (op == "//") return floor_div(x, y);
    if (op == "%") return floor_mod(x, y);
  }
  double x = num_of(a), y = num_of(b);
  if (op == "+") return x + y;
  if (op == "-") return x - y;
  if (op == "*") return x * y;
  if (y == 0.0) throw EvalError("ZeroDivisionError: float division by zero");
  if (op == "//") return std::floor(x / y);
  if (op == "%") {
    double r = std::fmod(x, y);
    if (r != 0.0 && ((r < 0) != (y < 0))) r += y;
    return r;
  }
  throw EvalError("unknown operator " + op);
}

bool equal(const EvalValue& a, const EvalValue& b) {
  if (is_number(a) && is_number(b)) {
    if (is_intlike(a) && is_intlike(b)) return int_of(a) == int_of(b);
    return num_of(a) == num_of(b);
  }
  return a == b;
}

// Three-way ordering for < <= > >=; throws on incomparable types.
int order(const EvalValue& a, const EvalValue& b, const std::string& op) {
  if (is_number(a) && is_number(b)) {
    if (is_intlike(a) && is_intlike(b)) return int_of(a) < int_of(b) ? -1 : (int_of(a) > int_of(b) ? 1 : 0);
    double x = num_of(a), y = num_of(b);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (is_str(a) && is_str(b)) {
    int c = str_of(a).compare(str_of(b));
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  throw EvalError("'" + op + "' not supported between instances of '" + type_name(a) + "' and '" + type_name(b) +
                  "'");
}

bool contained(const EvalValue& needle, const EvalValue& hay) {
  if (is_str(hay)) {
    if (!is_str(needle)) {
      throw EvalError(std::string("'in <string>' requires string as left operand, not ") + type_name(needle));
    }
    return str_of(hay).find(str_of(needle)) != std::string::npos;
  }
  if (std::holds_alternative<List>(hay)) {
    if (!is_str(needle)) return false;
    const auto& items = std::get<List>(hay).items;
    return std::find(items.begin(), items.end(), str_of(needle)) != items.end();
  }
  throw EvalError(std::string("argument of type '") + type_name(hay) + "' is not iterable");
}

// Python-style index normalisation; throws when out of range.
std::size_t resolve_index(I64 i, std::size_t n, const char* what) {
  I64 len = static_cast<I64>(n);
  if (i < 0) i += len;
  if (i < 0 || i >= len) throw EvalError(std::string("IndexError: ") + what + " index out of range");
  return static_cast<std::size_t>(i);
}

std::size_t clamp_bound(I64 i, std::size_t n) {
  I64 len = static_cast<I64>(n);
  if (i < 0) i += len;
  if (i < 0) return 0;
  if (i > len) return n;
  return static_cast<std::size_t>(i);
}

I64 require_int(const EvalValue& v, const std::string& context) {
  if (!is_intlike(v)) throw EvalError(context + " must be an integer, not '" + type_name(v) + "'");
  return int_of(v);
}

const std::string& require_str(const EvalValue& v, const std::string& context) {
  if (!is_str(v)) throw EvalError(context + " must be str, not '" + type_name(v) + "'");
  return str_of(v);
}

std::optional<I64> parse_python_int(std::string_view s) {
  std::string t = text::trim(s);
  if (t.empty()) return std::nullopt;
  std::size_t i = 0;
  bool neg = false;
  if (t[0] == '+' || t[0] == '-') {
    neg = t[0] == '-';
    i = 1;
  }
  if (i >= t.size()) return std::nullopt;
  I64 v = 0;
  for (; i < t.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(t[i]))) return std::nullopt;
    if (__builtin_mul_overflow(v, 10, &v) || __builtin_add_overflow(v, t[i] - '0', &v)) return std::nullopt;
  }
  return neg ? -v : v;
}

// Python rounding: the exact binary value decides, exact ties go to even.
double round_half_even(double x, I64 digits) {
  if (!std::isfinite(x)) return x;
  if (digits >= 0) {
    if (digits > 320) return x;
    std::vector<char> buf(400);
    int n = std::snprintf(buf.data(), buf.size(), "%.*f", static_cast<int>(digits), x);
    if (n < 0 || static_cast<std::size_t>(n) >= buf.size()) return x;
    return std::strtod(buf.data(), nullptr);
  }
  double scale = std::pow(10.0, static_cast<double>(-digits));
  if (!std::isfinite(scale)) return 0.0 * x;
  return std::nearbyint(x / scale) * scale;
}

std::string strip_chars(const std::string& s, const std::optional<std::string>& chars, bool left, bool right) {
  auto strip_it = [&](char c) {
    return chars ? chars->find(c) != std::string::npos : std::isspace(static_cast<unsigned char>(c)) != 0;
  };
  std::size_t b = 0, e = s.size();
  if (left) {
    while (b < e && strip_it(s[b])) ++b;
  }
  if (right) {
    while (e > b && strip_it(s[e - 1])) --e;
  }
  return s.substr(b, e - b);
}

std::shared_ptr<const std::regex> compile_regex(const std::string& pattern) {
  static std::mutex mu;
  static std::unordered_map<std::string, std::shared_ptr<const std::regex>> cache;
  {
    std::lock_guard lock(mu);
    auto it = cache.find(pattern);
    if (it != cache.end()) return it->second;
  }
  for (std::size_t i = 0; i + 1 < pattern.size(); ++i) {
    if (pattern[i] == '\\') {
      char n = pattern[i + 1];
      if (n >= '1' && n <= '9') throw EvalError("re.error: backreferences are not supported");
      ++i;
      continue;
    }
    if (pattern.compare(i, 3, "(?<") == 0 || pattern.compare(i, 3, "(?P") == 0) {
      throw EvalError("re.error: lookbehind and named groups are not supported");
    }
  }
  std::shared_ptr<const std::regex> re;
  try {
    re = std::make_shared<const std::regex>(pattern, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw EvalError(std::string("re.error: ") + e.what());
  }
  std::lock_guard lock(mu);
  cache.emplace(pattern, re);
  return re;
}

class Evaluator {
 public:
  Evaluator(const TransformExpr& e, const Value* scalar, const std::map<std::string, Value>* row)
      : e_(e), scalar_(scalar), row_(row) {}

  EvalValue eval(const Expr& x) {
    switch (x.kind) {
      case Expr::Kind::Literal: return from_value(x.literal);
      case Expr::Kind::Name:
        if (x.text == e_.param && scalar_) return from_value(*scalar_);
        throw EvalError("NameError: name '" + x.text + "' is not defined");
      case Expr::Kind::Neg: {
        EvalValue v = eval(*x.kids[0]);
        if (is_float(v)) return -std::get<double>(v);
        if (is_intlike(v)) {
          I64 r = 0;
          return checked(__builtin_sub_overflow(I64{0}, int_of(v), &r), r);
        }
        throw EvalError(std::string("bad operand type for unary -: '") + type_name(v) + "'");
      }
      case Expr::Kind::Not: return !truthy(eval(*x.kids[0]));
      case Expr::Kind::Binary: {
        EvalValue a = eval(*x.kids[0]);
        EvalValue b = eval(*x.kids[1]);
        return arithmetic(x.text, a, b);
      }
      case Expr::Kind::Compare: {
        EvalValue a = eval(*x.kids[0]);
        EvalValue b = eval(*x.kids[1]);
        const std::string& op = x.text;
        if (op == "==") return equal(a, b);
        if (op == "!=") return !equal(a, b);
        if (op == "in") return contained(a, b);
        if (op == "not in") return !contained(a, b);
        int c = order(a, b, op);
        if (op == "<") return c < 0;
        if (op == "<=") return c <= 0;
        if (op == ">") return c > 0;
        return c >= 0;
      }
      case Expr::Kind::BoolOp: {
        EvalValue a = eval(*x.kids[0]);
        if (x.text == "and") return truthy(a) ? eval(*x.kids[1]) : a;
        return truthy(a) ? a : eval(*x.kids[1]);
      }
      case Expr::Kind::Cond: return truthy(eval(*x.kids[1])) ? eval(*x.kids[0]) : eval(*x.kids[2]);
      case Expr::Kind::Index: return index(x);
      case Expr::Kind::Slice: return slice(x);
      case Expr::Kind::Call: return call(x);
      case Expr::Kind::Method: return method(x);
    }
    throw EvalError("unsupported expression");
  }

 private:
  std::vector<EvalValue> args_of(const Expr& x, std::size_t from) {
    std::vector<EvalValue> out;
    for (std::size_t i = from; i < x.kids.size(); ++i) out.push_back(eval(*x.kids[i]));
    return out;
  }

  EvalValue index(const Expr& x) {
    const Expr& obj = *x.kids[0];
    if (row_ && obj.kind == Expr::Kind::Name && obj.text == e_.param) {
      EvalValue key = eval(*x.kids[1]);
      const std::string& k = require_str(key, "row key");
      auto it = row_->find(k);
      if (it == row_->end()) throw MissingKeyError(k);
      return from_value(it->second);
    }
    EvalValue target = eval(obj);
    EvalValue key = eval(*x.kids[1]);
    if (is_str(target)) {
      auto cps = text::utf8_decode(str_of(target));
      std::size_t i = resolve_index(require_int(key, "string index"), cps.size(), "string");
      return text::utf8_encode(std::u32string(1, cps[i]));
    }
    if (std::holds_alternative<List>(target)) {
      const auto& items = std::get<List>(target).items;
      return items[resolve_index(require_int(key, "list index"), items.size(), "list")];
    }
    throw EvalError(std::string("'") + type_name(target) + "' object is not subscriptable");
  }

  EvalValue slice(const Expr& x) {
    EvalValue target = eval(*x.kids[0]);
    EvalValue lo_v = eval(*x.kids[1]);
    std::optional<EvalValue> hi_v;
    if (x.kids.size() > 2) hi_v = eval(*x.kids[2]);
    auto bounds = [&](std::size_t n) {
      std::size_t lo = clamp_bound(require_int(lo_v, "slice index"), n);
      std::size_t hi = hi_v ? clamp_bound(require_int(*hi_v, "slice index"), n) : n;
      return std::pair{lo, std::max(lo, hi)};
    };
    if (is_str(target)) {
      auto cps = text::utf8_decode(str_of(target));
      auto [lo, hi] = bounds(cps.size());
      return text::utf8_encode(std::u32string_view(cps).substr(lo, hi - lo));
    }
    if (std::holds_alternative<List>(target)) {
      const auto& items = std::get<List>(target).items;
      auto [lo, hi] = bounds(items.size());
      return List{std::vector<std::string>(items.begin() + static_cast<std::ptrdiff_t>(lo),
                                           items.begin() + static_cast<std::ptrdiff_t>(hi))};
    }
    throw EvalError(std::string("'") + type_name(target) + "' object is not subscriptable");
  }

  EvalValue call(const Expr& x) {
    const std::string& f = x.text;
    std::vector<EvalValue> a = args_of(x, 0);
    auto arity = [&](std::size_t lo, std::size_t hi) {
      if (a.size() < lo || a.size() > hi) {
        throw EvalError("TypeError: " + f + "() takes " + std::to_string(lo) +
                        (hi != lo ? " to " + std::to_string(hi) : "") + " argument(s), got " +
                        std::to_string(a.size()));
      }
    };
    if (f == "int") {
      arity(1, 1);
      const EvalValue& v = a[0];
      if (is_intlike(v)) return int_of(v);
      if (is_float(v)) {
        double d = std::trunc(std::get<double>(v));
        if (!std::isfinite(d) || d >= 9.2e18 || d <= -9.2e18) throw EvalError("integer overflow");
        return static_cast<I64>(d);
      }
      if (is_str(v)) {
        if (auto i = parse_python_int(str_of(v))) return *i;
        throw EvalError("ValueError: invalid literal for int() with base 10: '" + str_of(v) + "'");
      }
      throw EvalError(std::string("TypeError: int() argument must be a string or a number, not '") + type_name(v) +
                      "'");
    }
    if (f == "float") {
      arity(1, 1);
      const EvalValue& v = a[0];
      if (is_number(v)) return num_of(v);
      if (is_str(v)) {
        auto n = parse_number(str_of(v));
        if (n) return n->as_number();
        throw EvalError("ValueError: could not convert string to float: '" + str_of(v) + "'");
      }
      throw EvalError(std::string("TypeError: float() argument must be a string or a number, not '") +
                      type_name(v) + "'");
    }
    if (f == "str") {
      arity(1, 1);
      return py_str(a[0]);
    }
    if (f == "len") {
      arity(1, 1);
      if (is_str(a[0])) return static_cast<I64>(text::utf8_decode(str_of(a[0])).size());
      if (std::holds_alternative<List>(a[0])) return static_cast<I64>(std::get<List>(a[0]).items.size());
      throw EvalError(std::string("TypeError: object of type '") + type_name(a[0]) + "' has no len()");
    }
    if (f == "abs") {
      arity(1, 1);
      if (is_float(a[0])) return std::fabs(std::get<double>(a[0]));
      if (is_intlike(a[0])) {
        I64 v = int_of(a[0]);
        if (v == LLONG_MIN) throw EvalError("integer overflow");
        return v < 0 ? -v : v;
      }
      throw EvalError(std::string("TypeError: bad operand type for abs(): '") + type_name(a[0]) + "'");
    }
    if (f == "round") {
      arity(1, 2);
      if (!is_number(a[0])) {
        throw EvalError(std::string("TypeError: type ") + type_name(a[0]) + " doesn't define __round__ method");
      }
      if (a.size() == 1) {
        if (is_intlike(a[0])) return int_of(a[0]);
        double r = std::nearbyint(std::get<double>(a[0]));
        if (!std::isfinite(r) || std::fabs(r) >= 9.2e18) throw EvalError("integer overflow");
        return static_cast<I64>(r);
      }
      I64 digits = require_int(a[1], "round() ndigits");
      if (is_intlike(a[0])) {
        I64 v = int_of(a[0]);
        if (digits >= 0) return v;
        double r = round_half_even(static_cast<double>(v), digits);
        return static_cast<I64>(r);
      }
      return round_half_even(std::get<double>(a[0]), digits);
    }
    if (f == "min" || f == "max") {
      std::vector<EvalValue> items;
      if (a.size() == 1 && std::holds_alternative<List>(a[0])) {
        for (const auto& s : std::get<List>(a[0]).items) items.emplace_back(s);
      } else {
        items = a;
      }
      if (items.empty() || (a.size() == 1 && !std::holds_alternative<List>(a[0]))) {
        throw EvalError("TypeError: " + f + "() expects an iterable or at least two arguments");
      }
      EvalValue best = items[0];
      for (std::size_t i = 1; i < items.size(); ++i) {
        int c = order(items[i], best, f == "min" ? "<" : ">");
        if ((f == "min" && c < 0) || (f == "max" && c > 0)) best = items[i];
      }
      return best;
    }
    throw EvalError("NameError: name '" + f + "' is not defined");
  }

  EvalValue method(const Expr& x) {
    const Expr& recv_expr = *x.kids[0];
    const std::string& m = x.text;
    if (recv_expr.kind == Expr::Kind::Name && recv_expr.text == "re" && e_.param != "re") {
      std::vector<EvalValue> a = args_of(x, 1);
      if (a.size() != 2) throw EvalError("TypeError: re.search() takes 2 arguments");
      const std::string& pattern = require_str(a[0], "re.search() pattern");
      if (!is_str(a[1])) {
        throw EvalError(std::string("TypeError: expected string or bytes-like object, got '") + type_name(a[1]) +
                        "'");
      }
      auto re = compile_regex(pattern);
      std::smatch sm;
      const std::string& subject = str_of(a[1]);
      if (!std::regex_search(subject, sm, *re)) return std::monostate{};
      Match out;
      for (std::size_t i = 0; i < sm.size(); ++i) {
        if (sm[i].matched) {
          out.groups.emplace_back(sm[i].str());
        } else {
          out.groups.emplace_back(std::nullopt);
        }
      }
      return out;
    }

    EvalValue recv = eval(recv_expr);
    std::vector<EvalValue> a = args_of(x, 1);
    auto arity = [&](std::size_t lo, std::size_t hi) {
      if (a.size() < lo || a.size() > hi) {
        throw EvalError("TypeError: " + m + "() takes " + std::to_string(lo) +
                        (hi != lo ? " to " + std::to_string(hi) : "") + " argument(s), got " +
                        std::to_string(a.size()));
      }
    };

    if (std::holds_alternative<Match>(recv) && m == "group") {
      arity(0, 1);
      I64 k = a.empty() ? 0 : require_int(a[0], "group index");
      const auto& groups = std::get<Match>(recv).groups;
      if (k < 0 || static_cast<std::size_t>(k) >= groups.size()) throw EvalError("IndexError: no such group");
      const auto& g = groups[static_cast<std::size_t>(k)];
      if (!g) return std::monostate{};
      return *g;
    }
    if (!is_str(recv)) {
      throw EvalError(std::string("AttributeError: '") + type_name(recv) + "' object has no attribute '" + m + "'");
    }
    const std::string& s = str_of(recv);
    if (m == "replace") {
      arity(2, 3);
      const std::string& from = require_str(a[0], "replace() argument 1");
      const std::string& to = require_str(a[1], "replace() argument 2");
      I64 limit = a.size() == 3 ? require_int(a[2], "replace() count") : -1;
      std::string out;
      std::size_t i = 0;
      I64 done = 0;
      if (from.empty()) {
        // Python inserts `to` between every character.
        auto cps = text::utf8_decode(s);
        for (std::size_t k = 0; k <= cps.size(); ++k) {
          if (limit < 0 || done < limit) {
            out += to;
            ++done;
          }
          if (k < cps.size()) out += text::utf8_encode(std::u32string(1, cps[k]));
        }
        return out;
      }
      while (i < s.size()) {
        if ((limit < 0 || done < limit) && s.compare(i, from.size(), from) == 0) {
          out += to;
          i += from.size();
          ++done;
        } else {
          out.push_back(s[i++]);
        }
      }
      return out;
    }
    if (m == "split") {
      arity(0, 2);
      I64 maxsplit = a.size() == 2 ? require_int(a[1], "split() maxsplit") : -1;
      List out;
      if (a.empty() || is_none(a[0])) {
        std::size_t i = 0;
        I64 splits = 0;
        while (i < s.size()) {
          while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
          if (i >= s.size()) break;
          if (maxsplit >= 0 && splits >= maxsplit) {
            std::string rest = s.substr(i);
            while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.pop_back();
            out.items.push_back(rest);
            break;
          }
          std::size_t b = i;
          while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
          out.items.push_back(s.substr(b, i - b));
          ++splits;
        }
        return out;
      }
      const std::string& sep = require_str(a[0], "split() separator");
      if (sep.empty()) throw EvalError("ValueError: empty separator");
      std::size_t start = 0;
      I64 splits = 0;
      for (;;) {
        std::size_t at = (maxsplit >= 0 && splits >= maxsplit) ? std::string::npos : s.find(sep, start);
        if (at == std::string::npos) {
          out.items.push_back(s.substr(start));
          return out;
        }
        out.items.push_back(s.substr(start, at - start));
        start = at + sep.size();
        ++splits;
      }
    }
    if (m == "strip" || m == "lstrip" || m == "rstrip") {
      arity(0, 1);
      std::optional<std::string> chars;
      if (!a.empty() && !is_none(a[0])) chars = require_str(a[0], m + "() argument");
      return strip_chars(s, chars, m != "rstrip", m != "lstrip");
    }
    if (m == "lower") {
      arity(0, 0);
      return text::to_lower_ascii(s);
    }
    if (m == "upper") {
      arity(0, 0);
      return text::to_upper_ascii(s);
    }
    if (m == "startswith") {
      arity(1, 1);
      return text::starts_with(s, require_str(a[0], "startswith() argument"));
    }
    if (m == "endswith") {
      arity(1, 1);
      const std::string& suf = require_str(a[0], "endswith() argument");
      return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
    }
    if (m == "find") {
      arity(1, 1);
      const std::string& sub = require_str(a[0], "find() argument");
      auto at = s.find(sub);
      if (at == std::string::npos) return I64{-1};
      return static_cast<I64>(text::utf8_decode(std::string_view(s).substr(0, at)).size());
    }
    if (m == "zfill") {
      arity(1, 1);
      I64 width = require_int(a[0], "zfill() width");
      auto n = static_cast<I64>(text::utf8_decode(s).size());
      if (width <= n) return s;
      std::string pad(static_cast<std::size_t>(width - n), '0');
      if (!s.empty() && (s[0] == '-' || s[0] == '+')) return s.substr(0, 1) + pad + s.substr(1);
      return pad + s;
    }
    throw EvalError("AttributeError: 'str' object has no attribute '" + m + "'");
  }

  const TransformExpr& e_;
  const Value* scalar_;
  const std::map<std::string, Value>* row_;
};

}  // namespace

Value eval_scalar(const TransformExpr& e, const Value& v) {
  if (e.mode != Mode::Scalar) throw EvalError("row transform applied to a single value");
  Evaluator ev(e, &v, nullptr);
  return to_value(ev.eval(*e.body));
}

Value eval_row(const TransformExpr& e, const std::map<std::string, Value>& row) {
  if (e.mode != Mode::Row && !e.param_free) throw EvalError("scalar transform applied to a row");
  Evaluator ev(e, nullptr, &row);
  return to_value(ev.eval(*e.body));
}

}  // namespace tqprep::texpr
