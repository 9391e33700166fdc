#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <regex>

#include "oracles.hpp"
#include "tqprep/sql.hpp"

using namespace tqprep;
using namespace tqprep::sql;

namespace {

Table people() {
  return from_rows({"Name", "Team", "Points", "Joined"}, {{"Ann", "Red", "12", "2019-03-01"},
                                                          {"Bob", "Blue", "7", "2020-11-15"},
                                                          {"Cid", "Red", "30", "2018-02-10"},
                                                          {"Dee", "Blue", "", "2021-06-30"},
                                                          {"Eve", "Red", "9", "2019-12-24"}});
}

std::vector<std::vector<std::string>> texts(const Table& t) {
  std::vector<std::vector<std::string>> out;
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    std::vector<std::string> row;
    for (std::size_t c = 0; c < t.column_count(); ++c) row.push_back(t.cell(r, c).to_text());
    out.push_back(row);
  }
  return out;
}

using Rows = std::vector<std::vector<std::string>>;

}  // namespace

TEST(SqlParse, Basics) {
  auto q = parse_sql("select Name, SUM(Points) from w where Team = 'Red' and Points >= 9 group by Name "
                     "order by SUM(Points) desc limit 2");
  ASSERT_EQ(q.select.size(), 2u);
  EXPECT_EQ(std::get<ColumnItem>(q.select[0]).name, "Name");
  EXPECT_EQ(std::get<Agg>(q.select[1]).kind, AggKind::Sum);
  ASSERT_EQ(q.where.size(), 2u);
  EXPECT_EQ(q.where[1].op, CmpOp::Ge);
  EXPECT_EQ(*q.group_by, "Name");
  EXPECT_TRUE(q.order_by->desc);
  EXPECT_EQ(*q.limit, 2);
  EXPECT_EQ(pretty_print(q), "SELECT Name, SUM(Points) FROM w WHERE Team = 'Red' AND Points >= 9 GROUP BY Name "
                             "ORDER BY SUM(Points) DESC LIMIT 2");
  EXPECT_EQ(parse_sql(pretty_print(q)), q);
}

TEST(SqlParse, QuotingAndLiterals) {
  auto q = parse_sql(R"(SELECT "2013", `Team Name` FROM w WHERE Name = 'O''Neil' AND x IN (1, 2.5, 'a') AND y LIKE '02-%')");
  EXPECT_EQ(std::get<ColumnItem>(q.select[0]).name, "2013");
  EXPECT_EQ(std::get<ColumnItem>(q.select[1]).name, "Team Name");
  EXPECT_EQ(q.where[0].literals[0], Value::str("O'Neil"));
  EXPECT_EQ(q.where[1].kind, Predicate::Kind::In);
  EXPECT_EQ(q.where[1].literals.size(), 3u);
  EXPECT_EQ(q.where[2].kind, Predicate::Kind::Like);
  EXPECT_EQ(parse_sql(pretty_print(q)), q);
  EXPECT_EQ(quote_identifier("Team Name"), "\"Team Name\"");
  EXPECT_EQ(quote_identifier("Medal"), "Medal");
}

TEST(SqlParse, Rejects) {
  for (const char* bad : {"SELECT", "SELECT a FROM", "SELECT a FROM w WHERE", "SELECT a FROM w WHERE a = 1 OR b = 2",
                          "SELECT a FROM w GROUP BY a, b", "SELECT a FROM w LIMIT x", "DELETE FROM w",
                          "SELECT a FROM w JOIN v", "SELECT f(a) AS b FROM w", "SELECT a FROM w ORDER BY a, b",
                          "SELECT a FROM w WHERE a = 'open"}) {
    EXPECT_THROW(parse_sql(bad), ParseError) << bad;
  }
}

TEST(SqlParse, Sketch) {
  auto q = parse_sketch("SELECT country_of(Cyclist) AS Country, SUM(Medal) FROM w WHERE Date LIKE '02-%' "
                        "GROUP BY Country ORDER BY SUM(Medal) DESC LIMIT 1");
  EXPECT_TRUE(q.sketch);
  const auto& udf = std::get<Udf>(q.select[0]);
  EXPECT_EQ(udf.inputs, std::vector<std::string>{"Cyclist"});
  EXPECT_EQ(udf.alias, "Country");
  auto cl = clauses(q);
  ASSERT_GE(cl.size(), 3u);
  EXPECT_EQ(cl[0].kind, SketchClause::Kind::Udf);
  EXPECT_EQ(cl[1].kind, SketchClause::Kind::Agg);
  EXPECT_EQ(cl[2].kind, SketchClause::Kind::Pred);
  EXPECT_EQ(cl[2].columns, std::vector<std::string>{"Date"});
  for (std::size_t i = 3; i < cl.size(); ++i) EXPECT_EQ(cl[i].kind, SketchClause::Kind::Structural);
  auto refs = referenced_columns(q);
  EXPECT_EQ(refs.front(), (ReferencedColumn{"Cyclist", false}));
  EXPECT_TRUE(std::find(refs.begin(), refs.end(), ReferencedColumn{"Country", true}) != refs.end());
  EXPECT_THROW(execute(q, people()), SqlError);
}

TEST(SqlParse, OrderByAggregateIsAClause) {
  auto q = parse_sketch("SELECT Team FROM w GROUP BY Team ORDER BY AVG(Points) DESC LIMIT 1");
  auto cl = clauses(q);
  int aggs = 0;
  for (const auto& c : cl) aggs += c.kind == SketchClause::Kind::Agg;
  EXPECT_EQ(aggs, 1);
  auto q2 = parse_sketch("SELECT Team, COUNT(*) FROM w GROUP BY Team");
  for (const auto& c : clauses(q2)) EXPECT_NE(c.kind, SketchClause::Kind::Agg);
}

TEST(SqlExec, FilterGroupOrder) {
  Table t = people();
  EXPECT_EQ(texts(execute(parse_sql("SELECT Name FROM w WHERE Points > 8 ORDER BY Points DESC"), t)),
            (Rows{{"Cid"}, {"Ann"}, {"Eve"}}));
  EXPECT_EQ(texts(execute(parse_sql("SELECT Team, SUM(Points), COUNT(Points), COUNT(*) FROM w GROUP BY Team"), t)),
            (Rows{{"Red", "51", "3", "3"}, {"Blue", "7", "2", "2"}}));
  EXPECT_EQ(texts(execute(parse_sql("SELECT AVG(Points) FROM w WHERE Team = 'Blue'"), t)), (Rows{{"7.0"}}));
  EXPECT_EQ(texts(execute(parse_sql("SELECT Name FROM w WHERE Joined LIKE '2019-%'"), t)), (Rows{{"Ann"}, {"Eve"}}));
  EXPECT_EQ(texts(execute(parse_sql("SELECT MAX(Joined), MIN(Points) FROM w"), t)), (Rows{{"2021-06-30", "7"}}));
  EXPECT_EQ(texts(execute(parse_sql("SELECT SUM(Points) FROM w WHERE Team = 'Green'"), t)), (Rows{{""}}));
  EXPECT_EQ(texts(execute(parse_sql("SELECT COUNT(*) FROM w WHERE Team = 'Green'"), t)), (Rows{{"0"}}));
  EXPECT_EQ(texts(execute(parse_sql("SELECT Team FROM w GROUP BY Team ORDER BY SUM(Points) ASC LIMIT 1"), t)),
            (Rows{{"Blue"}}));
  EXPECT_EQ(texts(execute(parse_sql("SELECT Name FROM w WHERE Name IN ('Ann', 'Eve') LIMIT 0"), t)), Rows{});
  EXPECT_THROW(execute(parse_sql("SELECT Nope FROM w"), t), SqlError);
}

TEST(SqlExec, BoolCountsAsOne) {
  Table t = from_columns("w", {{"Won", {Value::boolean(true), Value::boolean(false), Value::boolean(true)}}});
  EXPECT_EQ(texts(execute(parse_sql("SELECT COUNT(*) FROM w WHERE Won = 1"), t)), (Rows{{"2"}}));
  EXPECT_EQ(texts(execute(parse_sql("SELECT SUM(Won) FROM w"), t)), (Rows{{"2"}}));
}

TEST(SqlExec, LikeAgainstRegexOracle) {
  std::mt19937 rng(17);
  const std::string alpha = "ab%_";
  for (int i = 0; i < 5000; ++i) {
    std::string s, p;
    for (std::size_t k = rng() % 7; k > 0; --k) s.push_back("ab"[rng() % 2]);
    for (std::size_t k = rng() % 6; k > 0; --k) p.push_back(alpha[rng() % 4]);
    std::string re;
    for (char c : p) re += c == '%' ? ".*" : (c == '_' ? "." : std::string(1, c));
    EXPECT_EQ(like_match(s, p), std::regex_match(s, std::regex(re))) << s << " LIKE " << p;
  }
  EXPECT_TRUE(like_match("héllo", "h_llo"));
}

using tqtest::random_query;
using tqtest::random_cell;
using tqtest::reference;

TEST(SqlOracle, RandomizedEquivalence) {
  auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(424242);
  int cases = 0, nonempty = 0;
  for (int iter = 0; iter < 3000; ++iter) {
    std::size_t ncols = 1 + rng() % 6, nrows = rng() % 9;
    std::vector<std::pair<std::string, std::vector<Value>>> columns;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < ncols; ++c) {
      names.push_back("c" + std::to_string(c));
      std::vector<Value> vals;
      for (std::size_t r = 0; r < nrows; ++r) vals.push_back(random_cell(rng));
      columns.emplace_back(names.back(), vals);
    }
    Table t = from_columns("w", columns);
    SqlQuery q = random_query(rng, names);
    SqlQuery parsed = parse_sql(pretty_print(q));
    ASSERT_EQ(parsed, q) << pretty_print(q);
    Table got = execute(parsed, t);
    auto want = reference(q, t);
    ASSERT_EQ(got.row_count(), want.size()) << pretty_print(q) << "\n" << serialize_markdown(t);
    ASSERT_EQ(got.column_count(), q.select.size());
    for (std::size_t r = 0; r < want.size(); ++r) {
      for (std::size_t c = 0; c < want[r].size(); ++c) {
        ASSERT_EQ(got.cell(r, c), want[r][c]) << pretty_print(q) << " row " << r << " col " << c << "\n"
                                             << serialize_markdown(t);
      }
    }
    ++cases;
    nonempty += !want.empty();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_GE(cases, 1000);
  EXPECT_GT(nonempty, 1000);
  EXPECT_LT(secs, 10.0);
}
