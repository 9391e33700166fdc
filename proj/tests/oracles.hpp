#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "tqprep/sql.hpp"

// Slow reference implementations shared by the tests and the acceptance gate.
namespace tqtest {

using namespace tqprep;
using namespace tqprep::sql;

inline int ref_compare(const Value& a, const Value& b) {
  auto x = numeric_of(a), y = numeric_of(b);
  if (x && y) return (*x > *y) - (*x < *y);
  std::string s = a.to_text(), t = b.to_text();
  return (s > t) - (s < t);
}

inline bool ref_pred(const Predicate& p, const Value& v) {
  if (v.is_null()) return false;
  if (p.kind == Predicate::Kind::Like) return like_match(v.to_text(), p.literals[0].as_str());
  if (p.kind == Predicate::Kind::In) {
    for (const auto& l : p.literals) {
      if (ref_compare(v, l) == 0) return true;
    }
    return false;
  }
  int c = ref_compare(v, p.literals[0]);
  switch (p.op) {
    case CmpOp::Eq: return c == 0;
    case CmpOp::Ne: return c != 0;
    case CmpOp::Lt: return c < 0;
    case CmpOp::Le: return c <= 0;
    case CmpOp::Gt: return c > 0;
    case CmpOp::Ge: return c >= 0;
  }
  return false;
}

inline int rank(const Value& v) { return v.is_null() ? 0 : numeric_of(v) ? 1 : 2; }

inline int ref_order(const Value& a, const Value& b) {
  if (rank(a) != rank(b)) return rank(a) < rank(b) ? -1 : 1;
  if (rank(a) == 0) return 0;
  return ref_compare(a, b);
}

inline bool same_group(const Value& a, const Value& b) {
  if (a.is_null() || b.is_null()) return a.is_null() && b.is_null();
  auto x = numeric_of(a), y = numeric_of(b);
  if (x || y) return x && y && *x == *y;
  return a.to_text() == b.to_text();
}

inline Value ref_agg(const Agg& a, const Table& t, const std::vector<std::size_t>& rows) {
  if (!a.column) return Value::integer(static_cast<std::int64_t>(rows.size()));
  const auto& col = t.column(*a.column);
  if (a.kind == AggKind::Count) {
    std::int64_t n = 0;
    for (auto r : rows) n += !col[r].is_null();
    return Value::integer(n);
  }
  if (a.kind == AggKind::Min || a.kind == AggKind::Max) {
    Value best;
    bool have = false;
    for (auto r : rows) {
      if (col[r].is_null()) continue;
      int c = have ? ref_order(col[r], best) : 0;
      if (!have || (a.kind == AggKind::Min ? c < 0 : c > 0)) best = col[r];
      have = true;
    }
    return best;
  }
  std::vector<Value> nums;
  for (auto r : rows) {
    const Value& v = col[r];
    if (v.is_bool()) nums.push_back(Value::integer(v.as_bool()));
    else if (v.is_numeric()) nums.push_back(v);
    else if (v.is_str()) {
      if (auto n = parse_number(v.as_str())) nums.push_back(*n);
    }
  }
  if (nums.empty()) return Value();
  double fs = 0;
  std::int64_t is = 0;
  bool ints = true;
  for (const auto& n : nums) {
    fs += n.as_number();
    if (n.is_int()) is += n.as_int();
    else ints = false;
  }
  if (a.kind == AggKind::Avg) return Value::real(fs / static_cast<double>(nums.size()));
  return ints ? Value::integer(is) : Value::real(fs);
}

inline std::vector<std::vector<Value>> reference(const SqlQuery& q, const Table& t) {
  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    bool ok = true;
    for (const auto& p : q.where) ok = ok && ref_pred(p, t.column(p.column)[r]);
    if (ok) kept.push_back(r);
  }
  bool grouped = q.group_by.has_value();
  bool aggregated = grouped || (q.order_by && std::holds_alternative<Agg>(q.order_by->key));
  for (const auto& s : q.select) aggregated = aggregated || std::holds_alternative<Agg>(s);

  std::vector<std::vector<std::size_t>> units;
  if (!aggregated) {
    for (auto r : kept) units.push_back({r});
  } else if (!grouped) {
    units.push_back(kept);
  } else {
    const auto& g = t.column(*q.group_by);
    for (auto r : kept) {
      bool placed = false;
      for (auto& u : units) {
        if (same_group(g[u.front()], g[r])) {
          u.push_back(r);
          placed = true;
          break;
        }
      }
      if (!placed) units.push_back({r});
    }
  }
  auto first_value = [&](const std::string& c, const std::vector<std::size_t>& u) {
    return u.empty() ? Value() : t.column(c)[u.front()];
  };
  auto key_of = [&](const std::vector<std::size_t>& u) {
    if (auto c = std::get_if<std::string>(&q.order_by->key)) return first_value(*c, u);
    return ref_agg(std::get<Agg>(q.order_by->key), t, u);
  };
  if (q.order_by) {
    // Selection sort; the earliest of equal keys goes first.
    std::vector<std::vector<std::size_t>> sorted;
    std::vector<bool> used(units.size(), false);
    for (std::size_t k = 0; k < units.size(); ++k) {
      std::size_t pick = units.size();
      for (std::size_t i = 0; i < units.size(); ++i) {
        if (used[i]) continue;
        if (pick == units.size()) {
          pick = i;
          continue;
        }
        int c = ref_order(key_of(units[i]), key_of(units[pick]));
        if (q.order_by->desc ? c > 0 : c < 0) pick = i;
      }
      used[pick] = true;
      sorted.push_back(units[pick]);
    }
    units = sorted;
  }
  if (q.limit) units.resize(std::min<std::size_t>(units.size(), static_cast<std::size_t>(*q.limit)));
  std::vector<std::vector<Value>> out;
  for (const auto& u : units) {
    std::vector<Value> row;
    for (const auto& s : q.select) {
      if (auto c = std::get_if<ColumnItem>(&s)) row.push_back(first_value(c->name, u));
      else row.push_back(ref_agg(std::get<Agg>(s), t, u));
    }
    out.push_back(row);
  }
  return out;
}

inline Value random_cell(std::mt19937& rng) {
  static const char* words[] = {"a", "b", "Ab", "x y", "", "3", "2.5", "-1", "O'Neil", "10"};
  switch (rng() % 7) {
    case 0: return Value();
    case 1: return Value::boolean(rng() % 2);
    case 2: return Value::integer(static_cast<int>(rng() % 11) - 5);
    case 3: return Value::real((static_cast<int>(rng() % 41) - 20) / 4.0);
    default: return Value::str(words[rng() % 10]);
  }
}

inline Value random_literal(std::mt19937& rng) {
  static const char* words[] = {"a", "b", "x y", "3", "O'Neil", "2.5"};
  switch (rng() % 3) {
    case 0: return Value::integer(static_cast<int>(rng() % 11) - 5);
    case 1: return Value::real((static_cast<int>(rng() % 21) - 10) / 4.0);
    default: return Value::str(words[rng() % 6]);
  }
}

inline SqlQuery random_query(std::mt19937& rng, const std::vector<std::string>& cols) {
  auto col = [&] { return cols[rng() % cols.size()]; };
  auto agg = [&] {
    Agg a;
    a.kind = static_cast<AggKind>(rng() % 5);
    if (a.kind != AggKind::Count || rng() % 2) a.column = col();
    return a;
  };
  SqlQuery q;
  int shape = static_cast<int>(rng() % 3);
  if (shape == 0) {
    for (std::size_t k = 1 + rng() % 3; k > 0; --k) q.select.push_back(ColumnItem{col()});
  } else if (shape == 1) {
    q.group_by = col();
    q.select.push_back(ColumnItem{*q.group_by});
    for (std::size_t k = 1 + rng() % 2; k > 0; --k) q.select.push_back(agg());
  } else {
    for (std::size_t k = 1 + rng() % 2; k > 0; --k) q.select.push_back(agg());
  }
  for (std::size_t k = rng() % 3; k > 0; --k) {
    Predicate p;
    p.column = col();
    switch (rng() % 4) {
      case 0: {
        static const char* pats[] = {"a%", "%b", "_", "%", "x%y", "%.5", "-%"};
        p.kind = Predicate::Kind::Like;
        p.literals = {Value::str(pats[rng() % 7])};
        break;
      }
      case 1:
        p.kind = Predicate::Kind::In;
        for (std::size_t m = 1 + rng() % 3; m > 0; --m) p.literals.push_back(random_literal(rng));
        break;
      default:
        p.op = static_cast<CmpOp>(rng() % 6);
        p.literals = {random_literal(rng)};
    }
    q.where.push_back(p);
  }
  if (rng() % 2) {
    OrderBy o;
    if (shape != 0 && rng() % 2) o.key = agg();
    else o.key = col();
    o.desc = rng() % 2;
    q.order_by = o;
  }
  if (rng() % 3 == 0) q.limit = static_cast<std::int64_t>(rng() % 4);
  return q;
}

// Textbook full-matrix DP over code points.
inline std::size_t dp_distance(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
    }
  }
  return d[a.size()][b.size()];
}

inline std::string random_text(std::mt19937& rng) {
  static const std::vector<std::string> glyphs = {"a", "b", "c", " ", "é", "ß", "中", "1"};
  std::string s;
  for (std::size_t k = rng() % 12; k > 0; --k) s += glyphs[rng() % glyphs.size()];
  return s;
}

}  // namespace tqtest
