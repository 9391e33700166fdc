#pragma once

// A small SQL subset over one table, plus the sketch dialect that additionally
// allows UDF select items such as `f(Cyclist) AS Country`.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tqprep/table.hpp"
#include "tqprep/value.hpp"

namespace tqprep::sql {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, std::string expected, const std::string& found);
  std::size_t position() const { return position_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

class SqlError : public std::runtime_error {
 public:
  enum class Kind { UnknownColumn, UnsupportedQuery, TypeClash };
  SqlError(Kind kind, std::string subject, const std::string& message)
      : std::runtime_error(message), kind_(kind), subject_(std::move(subject)) {}
  Kind kind() const { return kind_; }
  const std::string& subject() const { return subject_; }

 private:
  Kind kind_;
  std::string subject_;
};

enum class AggKind { Sum, Count, Avg, Min, Max };
const char* agg_name(AggKind k);

struct ColumnItem {
  std::string name;
  friend bool operator==(const ColumnItem&, const ColumnItem&) = default;
};

struct Agg {
  AggKind kind = AggKind::Count;
  std::optional<std::string> column;  // nullopt means '*'
  friend bool operator==(const Agg&, const Agg&) = default;
};

struct Udf {
  std::string description;
  std::vector<std::string> inputs;
  std::string alias;
  friend bool operator==(const Udf&, const Udf&) = default;
};

using SelectItem = std::variant<ColumnItem, Agg, Udf>;

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };
const char* cmp_text(CmpOp op);

struct Predicate {
  enum class Kind { Compare, Like, In };
  Kind kind = Kind::Compare;
  std::string column;
  CmpOp op = CmpOp::Eq;         // Compare only
  std::vector<Value> literals;  // one for Compare, the pattern for Like, the list for In
  friend bool operator==(const Predicate&, const Predicate&) = default;
};

struct OrderBy {
  std::variant<std::string, Agg> key;
  bool desc = false;
  friend bool operator==(const OrderBy&, const OrderBy&) = default;
};

struct SqlQuery {
  std::vector<SelectItem> select;
  std::string table = "w";
  std::vector<Predicate> where;
  std::optional<std::string> group_by;
  std::optional<OrderBy> order_by;
  std::optional<std::int64_t> limit;
  bool sketch = false;
  friend bool operator==(const SqlQuery&, const SqlQuery&) = default;
};

// Both throw ParseError. parse_sql rejects UDF items.
SqlQuery parse_sql(std::string_view src);
SqlQuery parse_sketch(std::string_view src);

// Canonical text: uppercase keywords, single spaces, single-quoted strings.
std::string pretty_print(const SqlQuery& q);
std::string pretty_print(const Predicate& p);
std::string pretty_print(const Agg& a);
std::string quote_identifier(std::string_view name);

struct SketchClause {
  enum class Kind { Udf, Agg, Pred, Structural };
  Kind kind = Kind::Structural;
  Udf udf;
  Agg agg;
  Predicate pred;
  std::string text;                  // canonical rendering of the clause
  std::vector<std::string> columns;  // columns the clause reads
};
const char* clause_kind_name(SketchClause::Kind k);

// Udf clauses, then aggregates, then predicates, then structural clauses.
std::vector<SketchClause> clauses(const SqlQuery& sketch);

struct ReferencedColumn {
  std::string name;
  bool derived = false;  // produced by a UDF alias
  friend bool operator==(const ReferencedColumn&, const ReferencedColumn&) = default;
};
// First-mention order, duplicates removed.
std::vector<ReferencedColumn> referenced_columns(const SqlQuery& q);

// Throws SqlError.
Table execute(const SqlQuery& q, const Table& t);

// Value semantics shared with the reference evaluator in tests.
std::optional<double> numeric_of(const Value& v);
bool like_match(std::string_view text, std::string_view pattern);

}  // namespace tqprep::sql
