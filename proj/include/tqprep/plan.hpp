#pragma once

// Logical operations, the physical function pools, and static pre-checks.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tqprep/sql.hpp"
#include "tqprep/table.hpp"
#include "tqprep/texpr.hpp"

namespace tqprep::plan {

enum class OpKind { Augment, Normalize, Filter };
const char* op_kind_name(OpKind k);

struct LogicalOp {
  OpKind kind = OpKind::Filter;
  std::string description;                  // Augment, Normalize
  std::vector<std::string> source_columns;  // Augment
  std::string new_column;                   // Augment
  std::string column;                       // Normalize
  std::vector<std::string> columns;         // Filter

  static LogicalOp augment(std::string description, std::vector<std::string> sources, std::string new_column);
  static LogicalOp normalize(std::string description, std::string column);
  static LogicalOp filter(std::vector<std::string> columns);

  // The column a pool function writes, or empty for Filter.
  const std::string& target_column() const { return kind == OpKind::Augment ? new_column : column; }

  friend bool operator==(const LogicalOp&, const LogicalOp&) = default;
};

// Throws std::invalid_argument when a field invariant is violated.
void validate(const LogicalOp& op);

// Line format used in prompts and responses:
//   Augment("Extract country code", [Cyclist]) -> Country
//   Normalize("Cast to INT", Medal)
//   Filter([Date, Country, Medal])
std::string format_op(const LogicalOp& op);

struct OpLine {
  enum class Status { NotOp, None, Unknown, Malformed, Ok };
  Status status = Status::NotOp;
  LogicalOp op;
  std::string name;   // operation word as written
  std::string error;  // for Malformed
};
OpLine parse_op_line(std::string_view line);

struct LogicalPlan {
  std::vector<LogicalOp> ops;
  std::optional<sql::SqlQuery> sketch;
  friend bool operator==(const LogicalPlan&, const LogicalPlan&) = default;
};

// Keeps the first Filter and moves it to the end. Returns false if extra Filters were dropped.
bool enforce_filter_last(std::vector<LogicalOp>& ops);

enum class Pool { Aug, Norm, Filter };
const char* pool_name(Pool p);
Pool pool_of(OpKind k);

enum class ArgKind { ColumnName, ColumnList, ScalarTransform, RowTransform, FormatString, TransDict };
const char* arg_kind_name(ArgKind k);

struct ArgSpec {
  std::string name;
  ArgKind kind;
};

struct PoolFunction {
  Pool pool;
  std::string name;
  std::vector<ArgSpec> args;
  std::string summary;  // one line shown to the programmer model

  std::string signature() const;
};

const std::vector<PoolFunction>& registry();
std::vector<PoolFunction> pool_for(const LogicalOp& op);
const PoolFunction* find_function(Pool pool, std::string_view name);

struct Provenance {
  int round = 0;  // 0 = selected, r > 0 = produced by repair round r
  bool inferred = false;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct PhysicalOp {
  Pool pool = Pool::Aug;
  std::string function;
  nlohmann::json args = nlohmann::json::object();
  LogicalOp implements;
  Provenance provenance;

  // Parses a transform argument; throws texpr::ParseError/ModeError or std::out_of_range.
  texpr::TransformExpr transform(const std::string& arg) const;
  std::string str_arg(const std::string& arg) const;
  std::vector<std::string> list_arg(const std::string& arg) const;

  friend bool operator==(const PhysicalOp&, const PhysicalOp&) = default;
};

// Two-line wire format: `function: <name>` then `args: <one-line JSON object>`.
std::string encode(const PhysicalOp& p);

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
// Finds the two lines anywhere in text (fenced or not). Throws WireError.
PhysicalOp decode(std::string_view text, const LogicalOp& implements);

struct PrecheckIssue {
  enum class Kind { NamingError, TypeError, ValueError };
  Kind kind;
  std::string arg;
  std::string message;
  friend bool operator==(const PrecheckIssue&, const PrecheckIssue&) = default;
};
const char* issue_kind_name(PrecheckIssue::Kind k);

struct PrecheckReport {
  std::vector<PrecheckIssue> issues;
  bool ok() const { return issues.empty(); }
  bool has(PrecheckIssue::Kind k) const;
};

PrecheckReport precheck(const PhysicalOp& p, const Table& t);

// Output directives accepted by format_datetime.
bool supported_datetime_format(std::string_view fmt, std::string* bad_directive = nullptr);

struct OpTypeSpec {
  OpKind kind;
  std::string purpose;
};
const std::vector<OpTypeSpec>& op_type_specs();

// JSON forms used by traces and memory.
nlohmann::json to_json(const LogicalOp& op);
LogicalOp logical_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PhysicalOp& p);
PhysicalOp physical_from_json(const nlohmann::json& j);

}  // namespace tqprep::plan
