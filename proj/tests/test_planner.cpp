#include <gtest/gtest.h>

#include "support.hpp"
#include "tqprep/planner.hpp"

using namespace tqprep;
using namespace tqprep::planner;
using plan::LogicalOp;

namespace {

Table cyclists() {
  return from_rows({"Date", "Cyclist", "Medal", "Age"},
                   {{"02-28", "Alej (ESP)", "\"2\"", "24"}, {"Feb-10", "Dav. ITA", "1", "31"}});
}

const char* kSketch =
    "```sql\nSELECT country_of(Cyclist) AS Country, SUM(Medal) FROM w WHERE Date LIKE '02-%' GROUP BY Country "
    "ORDER BY SUM(Medal) DESC LIMIT 1\n```";

struct Fixture {
  tqtest::TagScript script;
  llm::Session session{script};
  std::vector<std::string> warnings;
  Context ctx{session, tqtest::assets(), warnings};
};

}  // namespace

TEST(Planner, ChainOfClauses) {
  Fixture f;
  f.script.on("planner.sketch", kSketch)
      .on("planner.clause.1", "Augment(\"extract the country code of the cyclist\", [Cyclist]) -> Country")
      .on("planner.clause.2", "Normalize(\"convert Medal to integers\", Medal)")
      .on("planner.clause.3", "Normalize(\"format Date as %m-%d\", Date)");
  auto p = plan_coc("Which country won the most medals in February?", cyclists(), f.ctx);
  ASSERT_EQ(p.ops.size(), 4u);
  EXPECT_EQ(p.ops[0], LogicalOp::augment("extract the country code of the cyclist", {"Cyclist"}, "Country"));
  EXPECT_EQ(p.ops[1], LogicalOp::normalize("convert Medal to integers", "Medal"));
  EXPECT_EQ(p.ops[2], LogicalOp::normalize("format Date as %m-%d", "Date"));
  EXPECT_EQ(p.ops[3], LogicalOp::filter({"Date", "Cyclist", "Medal", "Country"}));
  ASSERT_TRUE(p.sketch);
  EXPECT_EQ(f.script.seen(), (std::vector<std::string>{"planner.sketch", "planner.clause.1", "planner.clause.2",
                                                        "planner.clause.3"}));
  // Clause prompts carry value samples, never the whole table.
  const auto& clause_prompt = f.script.last("planner.clause.3").messages.back().content;
  EXPECT_NE(clause_prompt.find("Values of Date: [\"02-28\",\"Feb-10\"]"), std::string::npos);
}

TEST(Planner, SketchRetryThenFailure) {
  Fixture f;
  f.script.on("planner.sketch", "I think you should sum medals.").on("planner.sketch.retry", kSketch);
  f.script.on("planner.clause.1", "None").on("planner.clause.2", "None").on("planner.clause.3", "None");
  auto p = plan_coc("q", cyclists(), f.ctx);
  EXPECT_EQ(p.ops.size(), 1u);
  EXPECT_EQ(f.script.last("planner.sketch.retry").messages.size(), 4u);

  Fixture g;
  g.script.on("planner.sketch", "SELECT Nope FROM w").on("planner.sketch.retry", "still nothing");
  EXPECT_THROW(plan_coc("q", cyclists(), g.ctx), SketchParseFailure);
}

TEST(Planner, ClauseFallbacks) {
  Fixture f;
  f.script.on("planner.sketch", "SELECT SUM(Medal) FROM w WHERE Age > 25")
      .on("planner.clause.1", "Hmm.")
      .on("planner.clause.1.retry", "Sort(\"x\", Medal)\nNormalize(\"convert Medal to integers\", Medal)")
      .on("planner.clause.2", "Filter([Age])\nNone");
  auto p = plan_coc("q", cyclists(), f.ctx);
  ASSERT_EQ(p.ops.size(), 2u);
  EXPECT_EQ(p.ops[0].kind, plan::OpKind::Normalize);
  EXPECT_EQ(p.ops[1], LogicalOp::filter({"Medal", "Age"}));
  bool unknown = false, ignored = false;
  for (const auto& w : f.warnings) {
    unknown = unknown || w.find("unknown operation 'Sort'") != std::string::npos;
    ignored = ignored || w.find("ignored a Filter") != std::string::npos;
  }
  EXPECT_TRUE(unknown);
  EXPECT_TRUE(ignored);
}

TEST(Planner, DeriveFilterStrict) {
  auto s = sql::parse_sketch("SELECT country_of(Cyclist) AS Country, SUM(Medal) FROM w WHERE Date LIKE '02-%' "
                             "GROUP BY Country");
  EXPECT_EQ(derive_filter(s, cyclists()).columns, (std::vector<std::string>{"Date", "Cyclist", "Medal", "Country"}));
  EXPECT_EQ(derive_filter(s, cyclists(), true).columns, (std::vector<std::string>{"Date", "Country", "Medal"}));
  auto s2 = sql::parse_sketch("SELECT Cyclist, country_of(Cyclist) AS Country FROM w");
  EXPECT_EQ(derive_filter(s2, cyclists(), true).columns, (std::vector<std::string>{"Cyclist", "Country"}));
}

TEST(Planner, Direct) {
  Fixture f;
  f.script.on("planner.direct", "1. Filter([Medal])\n2. Normalize(\"convert Medal to integers\", Medal)\n"
                                "3. Normalize(\"convert Medal to integers\", Medal)\n4. Filter([Age])");
  auto p = plan_direct("q", cyclists(), f.ctx);
  ASSERT_EQ(p.ops.size(), 2u);
  EXPECT_EQ(p.ops[1], LogicalOp::filter({"Medal"}));
  EXPECT_FALSE(p.sketch);

  Fixture g;
  g.script.on("planner.direct", "nothing").on("planner.direct.retry", "still nothing");
  EXPECT_TRUE(plan_direct("q", cyclists(), g.ctx).ops.empty());
}

TEST(Planner, SqlCandidates) {
  auto c = sql_candidates("Here:\n```sql\nSELECT a FROM w\n```");
  EXPECT_EQ(c.front(), "SELECT a FROM w");
  auto d = sql_candidates("The answer is\nselect b from w\nthanks");
  EXPECT_EQ(d.back(), "select b from w");
}
