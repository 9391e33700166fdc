#pragma once

// Lambda-style transform expressions, e.g.
//   lambda x: re.search(r'\((.*?)\)', x).group(1)
//   lambda x: (x['2013'] - x['2012']) / x['2012']
//
// The language is a closed, side-effect free subset of Python expressions.
// Scalar transforms take one cell; row transforms take a row and may only
// read it through literal subscripts such as x['Medal'].

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tqprep/value.hpp"

namespace tqprep::texpr {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, std::string expected, const std::string& found);
  std::size_t position() const { return position_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

class ModeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingKeyError : public EvalError {
 public:
  explicit MissingKeyError(std::string column);
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

enum class Mode { Scalar, Row };
const char* mode_name(Mode m);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind {
    Literal,  // value
    Name,     // text
    Neg,      // kids[0]
    Not,      // kids[0]
    Binary,   // text = + - * / // % ; kids = lhs, rhs
    Compare,  // text = == != < <= > >= in "not in" ; kids = lhs, rhs
    BoolOp,   // text = and / or ; kids = lhs, rhs
    Cond,     // kids = then, condition, otherwise
    Method,   // text = method ; kids = receiver, args...
    Call,     // text = builtin ; kids = args...
    Index,    // kids = object, key
    Slice,    // kids = object, lo, [hi]
  };

  Kind kind = Kind::Literal;
  std::size_t pos = 0;
  std::string text;
  Value literal;
  bool raw = false;  // literal was written as r'...'
  std::vector<ExprPtr> kids;
};

// Structural equality, ignoring source positions and raw-ness of literals.
bool same_ast(const Expr& a, const Expr& b);

struct TransformExpr {
  Mode mode = Mode::Scalar;
  std::string param;
  ExprPtr body;
  // True when the body never mentions the parameter (usable in either mode).
  bool param_free = false;

  friend bool operator==(const TransformExpr& a, const TransformExpr& b) {
    return a.mode == b.mode && a.param == b.param && same_ast(*a.body, *b.body);
  }
};

// Throws ParseError or ModeError.
TransformExpr parse_transform(std::string_view src);

// Canonical source text; parse_transform(pretty_print(e)) == e.
std::string pretty_print(const TransformExpr& e);

// Throws EvalError (or MissingKeyError for eval_row).
Value eval_scalar(const TransformExpr& e, const Value& v);
Value eval_row(const TransformExpr& e, const std::map<std::string, Value>& row);

// Literal subscript keys in row mode; empty for scalar transforms.
std::set<std::string> referenced_keys(const TransformExpr& e);

// Runtime values during evaluation. Match and List never reach a table cell.
struct Match {
  std::vector<std::optional<std::string>> groups;
  friend bool operator==(const Match&, const Match&) = default;
};
struct List {
  std::vector<std::string> items;
  friend bool operator==(const List&, const List&) = default;
};
using EvalValue = std::variant<std::monostate, bool, std::int64_t, double, std::string, Match, List>;

}  // namespace tqprep::texpr
