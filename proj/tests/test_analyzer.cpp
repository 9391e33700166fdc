#include <gtest/gtest.h>

#include "support.hpp"
#include "tqprep/analyzer.hpp"

using namespace tqprep;
using namespace tqprep::analyzer;

namespace {

Table prepared() {
  return from_columns("w", {{"Country", {Value::str("ESP"), Value::str("ITA"), Value::str("ITA")}},
                            {"Medal", {Value::integer(2), Value::integer(1), Value::integer(3)}}});
}

struct Fixture {
  tqtest::TagScript script;
  llm::Session session{script};
  Context ctx{session, tqtest::assets()};
};

}  // namespace

TEST(Analyzer, RenderCells) {
  EXPECT_EQ(render_cell(Value()), "none");
  EXPECT_EQ(render_cell(Value::boolean(true)), "true");
  EXPECT_EQ(render_cell(Value::integer(4)), "4");
  EXPECT_EQ(render_cell(Value::real(7.449999999999999)), "7.449999999999999");
  Table t = from_columns("r", {{"a", {Value::str("x"), Value::str("y")}}, {"b", {Value::integer(1), Value::integer(2)}}});
  EXPECT_EQ(render_values(t), (std::vector<std::string>{"x", "1", "y", "2"}));
}

TEST(Analyzer, AnswersWithSql) {
  Fixture f;
  f.script.on("analyzer.sql", "```sql\nSELECT Country, SUM(Medal) FROM w GROUP BY Country ORDER BY SUM(Medal) DESC "
                              "LIMIT 1\n```");
  auto a = answer_with_query("Which country won most?", prepared(), f.ctx);
  EXPECT_EQ(a.answer.values, (std::vector<std::string>{"ITA", "4"}));
  const auto& user = f.script.last("analyzer.sql").messages.back().content;
  EXPECT_NE(user.find("Which country won most?"), std::string::npos);
}

TEST(Analyzer, RetriesOnceThenFails) {
  Fixture f;
  f.script.on("analyzer.sql", "SELECT f(Country) AS X FROM w").on("analyzer.sql.retry", "SELECT COUNT(*) FROM w");
  EXPECT_EQ(answer("q", prepared(), f.ctx).values, std::vector<std::string>{"3"});
  Fixture g;
  g.script.on("analyzer.sql", "no").on("analyzer.sql.retry", "still no");
  EXPECT_THROW(answer("q", prepared(), g.ctx), SqlParseFailure);
  Fixture h;
  h.script.on("analyzer.sql", "SELECT Nope FROM w");
  EXPECT_THROW(answer("q", prepared(), h.ctx), sql::SqlError);
}
