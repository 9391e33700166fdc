#include "tqprep/table.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace tqprep {

namespace {

std::shared_ptr<const std::vector<Value>> share(std::vector<Value> v) {
  return std::make_shared<const std::vector<Value>>(std::move(v));
}

std::string escape_cell(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '\\' || c == '|') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

bool is_alnum_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

std::vector<std::string> Table::column_names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c.name);
  return out;
}

std::optional<std::size_t> Table::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

const std::vector<Value>& Table::column(std::string_view name) const {
  auto idx = index_of(name);
  if (!idx) {
    throw TableError(TableError::Kind::UnknownColumn, std::string(name),
                     "unknown column '" + std::string(name) + "'");
  }
  return *columns_[*idx].values;
}

Table Table::with_name(std::string name) const {
  Table out = *this;
  out.name_ = std::move(name);
  return out;
}

Table Table::with_column(std::string_view name, std::vector<Value> values) const {
  auto idx = index_of(name);
  if (!idx) {
    throw TableError(TableError::Kind::UnknownColumn, std::string(name),
                     "unknown column '" + std::string(name) + "'");
  }
  if (values.size() != row_count()) {
    throw TableError(TableError::Kind::LengthMismatch, std::string(name),
                     "column '" + std::string(name) + "' has " + std::to_string(values.size()) +
                         " values, table has " + std::to_string(row_count()) + " rows");
  }
  Table out = *this;
  out.columns_[*idx].values = share(std::move(values));
  return out;
}

bool operator==(const Table& a, const Table& b) {
  if (a.name_ != b.name_ || a.columns_.size() != b.columns_.size()) return false;
  for (std::size_t i = 0; i < a.columns_.size(); ++i) {
    if (a.columns_[i].name != b.columns_[i].name) return false;
    if (a.columns_[i].values != b.columns_[i].values && *a.columns_[i].values != *b.columns_[i].values) return false;
  }
  return true;
}

Table from_rows(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows,
                bool dedup_headers) {
  std::vector<std::string> names;
  std::unordered_set<std::string> seen;
  for (const auto& h : header) {
    std::string name = h;
    if (seen.count(name)) {
      if (!dedup_headers) {
        throw TableError(TableError::Kind::DuplicateHeader, h, "duplicate header '" + h + "'");
      }
      for (int k = 2;; ++k) {
        std::string candidate = h + "_" + std::to_string(k);
        if (!seen.count(candidate)) {
          name = std::move(candidate);
          break;
        }
      }
    }
    seen.insert(name);
    names.push_back(std::move(name));
  }

  std::vector<std::vector<Value>> cols(header.size());
  for (auto& c : cols) c.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw TableError(TableError::Kind::RaggedRows, std::to_string(r),
                       "row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                           " cells, header has " + std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < header.size(); ++c) cols[c].push_back(Value::str(rows[r][c]));
  }

  std::vector<std::pair<std::string, std::vector<Value>>> named;
  for (std::size_t c = 0; c < header.size(); ++c) named.emplace_back(std::move(names[c]), std::move(cols[c]));
  return from_columns("w", std::move(named));
}

Table from_columns(std::string name, std::vector<std::pair<std::string, std::vector<Value>>> columns) {
  Table t(std::move(name));
  std::unordered_set<std::string> seen;
  for (auto& [col_name, values] : columns) {
    if (!seen.insert(col_name).second) {
      throw TableError(TableError::Kind::DuplicateColumn, col_name, "duplicate column '" + col_name + "'");
    }
    if (!t.columns_.empty() && values.size() != t.row_count()) {
      throw TableError(TableError::Kind::LengthMismatch, col_name,
                       "column '" + col_name + "' has " + std::to_string(values.size()) + " values, expected " +
                           std::to_string(t.row_count()));
    }
    t.columns_.push_back({col_name, share(std::move(values))});
  }
  return t;
}

std::pair<Table, std::vector<CellError>> map_column(const Table& t, std::string_view col,
                                                    const std::function<Value(const Value&)>& f) {
  const auto& src = t.column(col);
  std::vector<Value> out;
  out.reserve(src.size());
  std::vector<CellError> errors;
  for (std::size_t r = 0; r < src.size(); ++r) {
    try {
      out.push_back(f(src[r]));
    } catch (const std::exception& e) {
      errors.push_back({r, e.what()});
      out.push_back(src[r]);
    }
  }
  return {t.with_column(col, std::move(out)), std::move(errors)};
}

Table add_column(const Table& t, const std::string& name, std::vector<Value> values) {
  if (t.has_column(name)) {
    throw TableError(TableError::Kind::DuplicateColumn, name, "column '" + name + "' already exists");
  }
  if (!t.columns_.empty() && values.size() != t.row_count()) {
    throw TableError(TableError::Kind::LengthMismatch, name,
                     "column '" + name + "' has " + std::to_string(values.size()) + " values, table has " +
                         std::to_string(t.row_count()) + " rows");
  }
  Table out = t;
  out.columns_.push_back({name, share(std::move(values))});
  return out;
}

Table keep_columns(const Table& t, const std::vector<std::string>& cols) {
  Table out(t.name_);
  std::unordered_set<std::string> seen;
  for (const auto& c : cols) {
    auto idx = t.index_of(c);
    if (!idx) throw TableError(TableError::Kind::UnknownColumn, c, "unknown column '" + c + "'");
    if (!seen.insert(c).second) {
      throw TableError(TableError::Kind::DuplicateColumn, c, "column '" + c + "' listed twice");
    }
    out.columns_.push_back(t.columns_[*idx]);
  }
  return out;
}

std::string serialize_markdown(const Table& t, std::optional<std::size_t> max_rows) {
  if (t.column_count() == 0) return "";
  std::string out;
  auto emit_row = [&](auto&& cell_text) {
    out += "|";
    for (std::size_t c = 0; c < t.column_count(); ++c) {
      out += " ";
      out += escape_cell(cell_text(c));
      out += " |";
    }
    out += "\n";
  };
  emit_row([&](std::size_t c) { return t.column_name(c); });
  out += "|";
  for (std::size_t c = 0; c < t.column_count(); ++c) out += " --- |";
  out += "\n";
  std::size_t n = t.row_count();
  if (max_rows && *max_rows < n) n = *max_rows;
  for (std::size_t r = 0; r < n; ++r) emit_row([&](std::size_t c) { return t.cell(r, c).to_text(); });
  return out;
}

std::string table_excerpt(const Table& t, std::size_t max_rows) {
  return serialize_markdown(t, max_rows) + "(" + std::to_string(t.row_count()) + " rows)";
}

const char* bucket_name(SizeBucket b) {
  switch (b) {
    case SizeBucket::Small: return "Small";
    case SizeBucket::Medium: return "Medium";
    case SizeBucket::Large: return "Large";
  }
  return "?";
}

std::size_t count_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_run = false;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_alnum_byte(c)) {
      if (!in_run) ++count;
      in_run = true;
      continue;
    }
    in_run = false;
    if (!std::isspace(c)) ++count;
  }
  return count;
}

std::size_t token_estimate(const Table& t) { return count_tokens(serialize_markdown(t)); }

SizeBucket bucket_for(std::size_t estimate) {
  if (estimate < 2048) return SizeBucket::Small;
  if (estimate <= 4096) return SizeBucket::Medium;
  return SizeBucket::Large;
}

SizeBucket size_bucket(const Table& t) { return bucket_for(token_estimate(t)); }

Table read_csv(std::string_view text, bool dedup_headers) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };

  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          throw TableError(TableError::Kind::Csv, std::to_string(line),
                           "stray quote inside unquoted field on line " + std::to_string(line));
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        [[fallthrough]];
      case '\n':
        if (record.empty() && field.empty() && !field_started) {
          ++line;  // blank line
          break;
        }
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw TableError(TableError::Kind::Csv, std::to_string(line), "unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();

  if (records.empty()) return Table();
  std::vector<std::string> header = std::move(records.front());
  records.erase(records.begin());
  return from_rows(header, records, dedup_headers);
}

Table read_csv_file(const std::string& path, bool dedup_headers) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_csv(ss.str(), dedup_headers);
}

std::string write_csv(const Table& t) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out.push_back('"');
      out.push_back(c);
    }
    out.push_back('"');
    return out;
  };
  std::string out;
  for (std::size_t c = 0; c < t.column_count(); ++c) {
    if (c) out += ",";
    out += quote(t.column_name(c));
  }
  out += "\n";
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    for (std::size_t c = 0; c < t.column_count(); ++c) {
      if (c) out += ",";
      std::string cell = t.cell(r, c).to_text();
      // A lone empty field would read back as a blank line.
      out += cell.empty() && t.column_count() == 1 ? "\"\"" : quote(cell);
    }
    out += "\n";
  }
  return out;
}

std::vector<std::string> distinct_values(const Table& t, std::string_view col, std::size_t limit) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& v : t.column(col)) {
    if (out.size() >= limit) break;
    std::string s = v.to_text();
    if (seen.insert(s).second) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace tqprep
