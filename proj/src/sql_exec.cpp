#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tqprep/sql.hpp"
#include "tqprep/text.hpp"

namespace tqprep::sql {

std::optional<double> numeric_of(const Value& v) {
  if (v.is_numeric()) return v.as_number();
  if (v.is_bool()) return v.as_bool() ? 1.0 : 0.0;
  if (v.is_str()) {
    if (auto n = parse_number(v.as_str())) return n->as_number();
  }
  return std::nullopt;
}

bool like_match(std::string_view text_sv, std::string_view pattern_sv) {
  std::u32string s = text::utf8_decode(text_sv);
  std::u32string p = text::utf8_decode(pattern_sv);
  // Iterative wildcard match with single-star backtracking.
  std::size_t i = 0, j = 0, star = std::u32string::npos, mark = 0;
  while (i < s.size()) {
    if (j < p.size() && (p[j] == U'_' || (p[j] != U'%' && p[j] == s[i]))) {
      ++i;
      ++j;
    } else if (j < p.size() && p[j] == U'%') {
      star = j++;
      mark = i;
    } else if (star != std::u32string::npos) {
      j = star + 1;
      i = ++mark;
    } else {
      return false;
    }
  }
  while (j < p.size() && p[j] == U'%') ++j;
  return j == p.size();
}

namespace {

// -1/0/1 under comparison semantics: numeric when both sides coerce, else text.
int compare_cells(const Value& a, const Value& b) {
  auto x = numeric_of(a);
  auto y = numeric_of(b);
  if (x && y) return *x < *y ? -1 : (*x > *y ? 1 : 0);
  int c = a.to_text().compare(b.to_text());
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

bool test_predicate(const Predicate& p, const Value& cell) {
  if (cell.is_null()) return false;
  switch (p.kind) {
    case Predicate::Kind::Like: return like_match(cell.to_text(), p.literals.at(0).as_str());
    case Predicate::Kind::In:
      return std::any_of(p.literals.begin(), p.literals.end(),
                         [&](const Value& lit) { return compare_cells(cell, lit) == 0; });
    case Predicate::Kind::Compare: {
      int c = compare_cells(cell, p.literals.at(0));
      switch (p.op) {
        case CmpOp::Eq: return c == 0;
        case CmpOp::Ne: return c != 0;
        case CmpOp::Lt: return c < 0;
        case CmpOp::Le: return c <= 0;
        case CmpOp::Gt: return c > 0;
        case CmpOp::Ge: return c >= 0;
      }
    }
  }
  return false;
}

// Total order for sorting and MIN/MAX: Null, then numbers, then text.
int order_cells(const Value& a, const Value& b) {
  auto rank = [](const Value& v) { return v.is_null() ? 0 : (numeric_of(v) ? 1 : 2); };
  int ra = rank(a), rb = rank(b);
  if (ra != rb) return ra < rb ? -1 : 1;
  if (ra == 0) return 0;
  if (ra == 1) {
    double x = *numeric_of(a), y = *numeric_of(b);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  int c = a.to_text().compare(b.to_text());
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

std::string group_key(const Value& v) {
  if (v.is_null()) return "null";
  if (auto n = numeric_of(v)) return "n:" + format_double(*n == 0.0 ? 0.0 : *n);
  return "s:" + v.to_text();
}

Value aggregate(const Agg& a, const Table& t, const std::vector<std::size_t>& rows) {
  if (!a.column) return Value::integer(static_cast<std::int64_t>(rows.size()));
  const auto& col = t.column(*a.column);
  switch (a.kind) {
    case AggKind::Count: {
      std::int64_t n = 0;
      for (auto r : rows) n += col[r].is_null() ? 0 : 1;
      return Value::integer(n);
    }
    case AggKind::Min:
    case AggKind::Max: {
      std::optional<Value> best;
      for (auto r : rows) {
        if (col[r].is_null()) continue;
        if (!best) {
          best = col[r];
          continue;
        }
        int c = order_cells(col[r], *best);
        if ((a.kind == AggKind::Min && c < 0) || (a.kind == AggKind::Max && c > 0)) best = col[r];
      }
      return best ? *best : Value::null();
    }
    case AggKind::Sum:
    case AggKind::Avg: {
      std::size_t count = 0;
      bool all_int = true, overflow = false;
      std::int64_t isum = 0;
      double fsum = 0.0;
      for (auto r : rows) {
        const Value& v = col[r];
        std::optional<Value> n;
        if (v.is_numeric()) {
          n = v;
        } else if (v.is_bool()) {
          n = Value::integer(v.as_bool() ? 1 : 0);
        } else if (v.is_str()) {
          n = parse_number(v.as_str());
        }
        if (!n) continue;
        ++count;
        fsum += n->as_number();
        if (n->is_int()) {
          if (!overflow && __builtin_add_overflow(isum, n->as_int(), &isum)) overflow = true;
        } else {
          all_int = false;
        }
      }
      if (count == 0) return Value::null();
      if (a.kind == AggKind::Avg) return Value::real(fsum / static_cast<double>(count));
      if (all_int && !overflow) return Value::integer(isum);
      return Value::real(fsum);
    }
  }
  return Value::null();
}

std::string agg_label(const Agg& a) {
  return std::string(agg_name(a.kind)) + "(" + (a.column ? *a.column : "*") + ")";
}

}  // namespace

Table execute(const SqlQuery& q, const Table& t) {
  for (const auto& item : q.select) {
    if (std::holds_alternative<Udf>(item)) {
      throw SqlError(SqlError::Kind::UnsupportedQuery, std::get<Udf>(item).alias,
                     "UDF select items cannot be executed");
    }
  }
  for (const auto& ref : referenced_columns(q)) {
    if (!t.has_column(ref.name)) {
      throw SqlError(SqlError::Kind::UnknownColumn, ref.name, "no such column: " + ref.name);
    }
  }

  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    bool keep = true;
    for (const auto& p : q.where) {
      if (!test_predicate(p, t.column(p.column)[r])) {
        keep = false;
        break;
      }
    }
    if (keep) rows.push_back(r);
  }

  bool agg_mode = q.group_by.has_value() ||
                  std::any_of(q.select.begin(), q.select.end(),
                              [](const SelectItem& i) { return std::holds_alternative<Agg>(i); }) ||
                  (q.order_by && std::holds_alternative<Agg>(q.order_by->key));

  // Each output unit is a group of source rows (one row per unit outside aggregate mode).
  std::vector<std::vector<std::size_t>> units;
  if (!agg_mode) {
    for (auto r : rows) units.push_back({r});
  } else if (!q.group_by) {
    units.push_back(rows);
  } else {
    const auto& gcol = t.column(*q.group_by);
    std::map<std::string, std::size_t> index;
    for (auto r : rows) {
      auto [it, fresh] = index.emplace(group_key(gcol[r]), units.size());
      if (fresh) units.emplace_back();
      units[it->second].push_back(r);
    }
  }

  auto column_value = [&](const std::string& name, const std::vector<std::size_t>& unit) {
    return unit.empty() ? Value::null() : t.column(name)[unit.front()];
  };

  if (q.order_by) {
    std::vector<Value> keys;
    keys.reserve(units.size());
    for (const auto& u : units) {
      if (auto col = std::get_if<std::string>(&q.order_by->key)) {
        keys.push_back(column_value(*col, u));
      } else {
        keys.push_back(aggregate(std::get<Agg>(q.order_by->key), t, u));
      }
    }
    std::vector<std::size_t> idx(units.size());
    std::iota(idx.begin(), idx.end(), 0);
    bool desc = q.order_by->desc;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      int c = order_cells(keys[a], keys[b]);
      return desc ? c > 0 : c < 0;
    });
    std::vector<std::vector<std::size_t>> sorted;
    sorted.reserve(units.size());
    for (auto i : idx) sorted.push_back(std::move(units[i]));
    units = std::move(sorted);
  }
  if (q.limit && units.size() > static_cast<std::size_t>(*q.limit)) units.resize(static_cast<std::size_t>(*q.limit));

  std::vector<std::pair<std::string, std::vector<Value>>> out;
  for (const auto& item : q.select) {
    std::string label;
    std::vector<Value> values;
    values.reserve(units.size());
    if (auto c = std::get_if<ColumnItem>(&item)) {
      label = c->name;
      for (const auto& u : units) values.push_back(column_value(c->name, u));
    } else {
      const auto& a = std::get<Agg>(item);
      label = agg_label(a);
      for (const auto& u : units) values.push_back(aggregate(a, t, u));
    }
    std::string unique = label;
    for (int k = 2;; ++k) {
      bool clash = std::any_of(out.begin(), out.end(), [&](const auto& p) { return p.first == unique; });
      if (!clash) break;
      unique = label + "_" + std::to_string(k);
    }
    out.emplace_back(std::move(unique), std::move(values));
  }
  return from_columns(t.name(), std::move(out));
}

}  // namespace tqprep::sql
