#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tqprep/value.hpp"

namespace tqprep {

class TableError : public std::runtime_error {
 public:
  enum class Kind { RaggedRows, DuplicateHeader, UnknownColumn, DuplicateColumn, LengthMismatch, Csv };

  TableError(Kind kind, std::string subject, const std::string& message)
      : std::runtime_error(message), kind_(kind), subject_(std::move(subject)) {}

  Kind kind() const { return kind_; }
  // Column name, or row index as text for RaggedRows.
  const std::string& subject() const { return subject_; }

 private:
  Kind kind_;
  std::string subject_;
};

struct CellError {
  std::size_t row = 0;
  std::string message;
  friend bool operator==(const CellError&, const CellError&) = default;
};

// Immutable column-oriented table. Copies share column storage.
class Table {
 public:
  struct Column {
    std::string name;
    std::shared_ptr<const std::vector<Value>> values;
  };

  Table() = default;
  explicit Table(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  std::size_t column_count() const { return columns_.size(); }
  std::size_t row_count() const { return columns_.empty() ? 0 : columns_.front().values->size(); }

  std::vector<std::string> column_names() const;
  bool has_column(std::string_view name) const { return index_of(name).has_value(); }
  std::optional<std::size_t> index_of(std::string_view name) const;

  // Throws TableError::UnknownColumn.
  const std::vector<Value>& column(std::string_view name) const;
  const std::vector<Value>& column_at(std::size_t i) const { return *columns_.at(i).values; }
  const std::string& column_name(std::size_t i) const { return columns_.at(i).name; }
  const Value& cell(std::size_t row, std::size_t col) const { return (*columns_.at(col).values).at(row); }

  Table with_name(std::string name) const;
  // Replaces the values of an existing column; length must match.
  Table with_column(std::string_view name, std::vector<Value> values) const;

  friend bool operator==(const Table& a, const Table& b);

 private:
  friend Table add_column(const Table&, const std::string&, std::vector<Value>);
  friend Table keep_columns(const Table&, const std::vector<std::string>&);
  friend Table from_columns(std::string, std::vector<std::pair<std::string, std::vector<Value>>>);

  std::string name_ = "w";
  std::vector<Column> columns_;
};

// Builds a table from header + text rows; every cell loads as Str.
// With dedup_headers, repeated names get suffixes _2, _3, ...
Table from_rows(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows,
                bool dedup_headers = true);

// Builds a typed table. Throws DuplicateColumn / LengthMismatch.
Table from_columns(std::string name, std::vector<std::pair<std::string, std::vector<Value>>> columns);

// Applies f to every cell of col. Cells where f throws keep their value and are reported.
std::pair<Table, std::vector<CellError>> map_column(const Table& t, std::string_view col,
                                                    const std::function<Value(const Value&)>& f);

Table add_column(const Table& t, const std::string& name, std::vector<Value> values);
Table keep_columns(const Table& t, const std::vector<std::string>& cols);

// Pipe-delimited rendering; '\' and '|' inside cells are backslash-escaped.
std::string serialize_markdown(const Table& t, std::optional<std::size_t> max_rows = std::nullopt);

enum class SizeBucket { Small, Medium, Large };
const char* bucket_name(SizeBucket b);

// Maximal alphanumeric runs plus non-space symbols. Non-ASCII bytes count as alphanumeric.
std::size_t count_tokens(std::string_view text);
std::size_t token_estimate(const Table& t);
SizeBucket bucket_for(std::size_t token_estimate);
SizeBucket size_bucket(const Table& t);

// RFC-4180 CSV; the first record is the header.
Table read_csv(std::string_view text, bool dedup_headers = true);
Table read_csv_file(const std::string& path, bool dedup_headers = true);
std::string write_csv(const Table& t);

// First `limit` distinct cell texts of a column, in row order.
std::vector<std::string> distinct_values(const Table& t, std::string_view col, std::size_t limit = 20);

// Header + up to max_rows rows + a trailing "(N rows)" line.
std::string table_excerpt(const Table& t, std::size_t max_rows = 5);

}  // namespace tqprep
