#include <gtest/gtest.h>

#include "support.hpp"
#include "tqprep/executor.hpp"

using namespace tqprep;
using namespace tqprep::exec;
using plan::LogicalOp;
using plan::PhysicalOp;
using plan::Pool;
using nlohmann::json;

namespace {

Table cyclists() {
  return from_rows({"Date", "Cyclist", "Medal"}, {{"02-28", "Alej (ESP)", "\"2\""},
                                                  {"Feb-10", "Dav. ITA", "1"},
                                                  {"14-Feb", "Alex (ITA)", "3*"},
                                                  {"19-Oct", "Mark (GBR)", "5"}});
}

PhysicalOp phys(const std::string& fn, json args, const LogicalOp& op) {
  PhysicalOp p;
  p.pool = plan::pool_of(op.kind);
  p.function = fn;
  p.args = std::move(args);
  p.implements = op;
  return p;
}

std::vector<std::string> col_text(const Table& t, const std::string& c) {
  std::vector<std::string> out;
  for (const auto& v : t.column(c)) out.push_back(v.to_text());
  return out;
}

const LogicalOp kCountry = LogicalOp::augment("extract the country code", {"Cyclist"}, "Country");
const LogicalOp kMedal = LogicalOp::normalize("convert Medal to integers", "Medal");
const LogicalOp kDate = LogicalOp::normalize("format Date as %m-%d", "Date");
const char* kParen = R"(lambda x: re.search(r'\((.*?)\)', x).group(1))";

struct Fixture {
  tqtest::TagScript script;
  llm::Session session{script};
  programmer::Context ctx{session, tqtest::assets()};
};

}  // namespace

TEST(Apply, Extract) {
  auto r = apply(phys("extract", {{"column", "Cyclist"}, {"func", kParen}}, kCountry), cyclists());
  EXPECT_EQ(col_text(r.table, "Country"), (std::vector<std::string>{"ESP", "", "ITA", "GBR"}));
  EXPECT_EQ(r.cells_failed, 1u);
  ASSERT_EQ(r.report.items.size(), 1u);
  EXPECT_EQ(r.report.items[0].kind, "EvalError");
  EXPECT_EQ(r.report.items[0].samples.front().first, 1u);
  EXPECT_TRUE(r.partial.failed[1]);
}

TEST(Apply, PriorResolvedRowsAreKept) {
  auto first = apply(phys("extract", {{"column", "Cyclist"}, {"func", kParen}}, kCountry), cyclists());
  auto second = apply(phys("extract", {{"column", "Cyclist"}, {"func", "lambda x: x.split(' ')[-1]"}}, kCountry),
                      cyclists(), &first.partial);
  // The new function wins where it succeeds.
  EXPECT_EQ(col_text(second.table, "Country"), (std::vector<std::string>{"(ESP)", "ITA", "(ITA)", "(GBR)"}));
  EXPECT_EQ(second.cells_failed, 0u);
  auto third = apply(phys("extract", {{"column", "Cyclist"}, {"func", kParen}}, kCountry), cyclists(), &second.partial);
  EXPECT_EQ(col_text(third.table, "Country"), (std::vector<std::string>{"ESP", "ITA", "ITA", "GBR"}));
  EXPECT_EQ(third.cells_failed, 0u);
}

TEST(Apply, ToNumerical) {
  auto r = apply(phys("to_numerical", {{"column", "Medal"}, {"func", "lambda x: int(x.replace('\"', '').replace('*', ''))"}},
                      kMedal),
                 cyclists());
  EXPECT_EQ(r.cells_failed, 0u);
  EXPECT_EQ(r.table.column("Medal")[0], Value::integer(2));
  EXPECT_EQ(r.table.column("Medal")[2], Value::integer(3));
  auto bad = apply(phys("to_numerical", {{"column", "Medal"}, {"func", "lambda x: x.strip('*')"}}, kMedal), cyclists());
  EXPECT_EQ(bad.cells_failed, 4u);
  EXPECT_EQ(bad.report.items[0].kind, "ResultTypeError");
  EXPECT_EQ(bad.table.column("Medal")[1], Value::str("1"));
}

TEST(Apply, RowFunctions) {
  Table t = from_rows({"First", "Last", "W", "L"}, {{"Ann", "Lee", "3", "1"}, {"Bo", "Kim", "0", "0"}});
  auto calc = apply(phys("calculate", {{"columns", {"W", "L"}}, {"func", "lambda x: int(x['W']) / (int(x['W']) + int(x['L']))"}},
                         LogicalOp::augment("win share", {"W", "L"}, "Share")),
                    t);
  EXPECT_EQ(calc.table.column("Share")[0], Value::real(0.75));
  EXPECT_EQ(calc.cells_failed, 1u);  // 0 / 0
  auto cat = apply(phys("concatenate", {{"columns", {"First", "Last"}}, {"func", "lambda x: x['First'] + ' ' + x['Last']"}},
                        LogicalOp::augment("full name", {"First", "Last"}, "Name")),
                   t);
  EXPECT_EQ(col_text(cat.table, "Name"), (std::vector<std::string>{"Ann Lee", "Bo Kim"}));
  auto flag = apply(phys("map_to_boolean", {{"columns", {"W"}}, {"func", "lambda x: int(x['W']) > 0"}},
                         LogicalOp::augment("won any", {"W"}, "Won")),
                    t);
  EXPECT_EQ(flag.table.column("Won")[0], Value::boolean(true));
  EXPECT_EQ(flag.table.column("Won")[1], Value::boolean(false));
  auto notbool = apply(phys("map_to_boolean", {{"columns", {"W"}}, {"func", "lambda x: x['W']"}},
                            LogicalOp::augment("won any", {"W"}, "Won")),
                       t);
  EXPECT_EQ(notbool.cells_failed, 2u);
}

TEST(Apply, DatetimeCleanFilter) {
  auto d = apply(phys("format_datetime", {{"column", "Date"}, {"format", "%m-%d"}}, kDate), cyclists());
  EXPECT_EQ(col_text(d.table, "Date"), (std::vector<std::string>{"02-28", "02-10", "02-14", "10-19"}));
  auto c = apply(phys("clean_string", {{"column", "Medal"}, {"trans_dict", {{"\"", ""}, {"*", ""}}}}, kMedal), cyclists());
  EXPECT_EQ(col_text(c.table, "Medal"), (std::vector<std::string>{"2", "1", "3", "5"}));
  auto f = apply(phys("filter_columns", {{"rel_columns", {"Medal", "Date"}}}, LogicalOp::filter({"Medal", "Date"})),
                 cyclists());
  EXPECT_EQ(f.table.column_names(), (std::vector<std::string>{"Medal", "Date"}));
}

TEST(Apply, InferCallback) {
  InferFn fn = [](const PhysicalOp&, const std::vector<programmer::InferExample>& ex,
                  const std::map<std::size_t, std::map<std::string, std::string>>& rows, bool numeric) {
    EXPECT_EQ(ex.size(), 3u);
    EXPECT_FALSE(numeric);
    EXPECT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows.begin()->second.at("Cyclist"), "Dav. ITA");
    programmer::InferResult r;
    r.values[1] = Value::str("ITA");
    return r;
  };
  auto first = apply(phys("extract", {{"column", "Cyclist"}, {"func", kParen}}, kCountry), cyclists());
  auto p = *programmer::infer_op(kCountry, 2);
  auto r = apply(p, cyclists(), &first.partial, &fn);
  EXPECT_EQ(col_text(r.table, "Country"), (std::vector<std::string>{"ESP", "ITA", "ITA", "GBR"}));
  EXPECT_EQ(r.cells_failed, 0u);
}

TEST(Datetime, Layouts) {
  std::string err;
  auto fmt = [&](const char* in, const char* f) { return reformat_datetime(in, f, err).value_or("<fail>"); };
  EXPECT_EQ(fmt("Feb-10", "%m-%d"), "02-10");
  EXPECT_EQ(fmt("14-Feb", "%m-%d"), "02-14");
  EXPECT_EQ(fmt("March 3, 2009", "%Y-%m-%d"), "2009-03-03");
  EXPECT_EQ(fmt("14 Feb 2012", "%Y-%m-%d"), "2012-02-14");
  EXPECT_EQ(fmt("2011/05/20", "%d.%m.%Y"), "20.05.2011");
  EXPECT_EQ(fmt("2011-05-20", "%B %d, %Y"), "May 20, 2011");
  EXPECT_EQ(fmt("25/12", "%m-%d"), "12-25");
  EXPECT_EQ(fmt("2009-03-03", "%y"), "09");
  EXPECT_EQ(fmt("not a date", "%Y"), "<fail>");
  EXPECT_FALSE(err.empty());
  EXPECT_EQ(fmt("2019-02-30", "%Y-%m-%d"), "<fail>");
}

TEST(RunPlan, PrecheckThenRuntimeThenClean) {
  Fixture f;
  f.script.on("programmer.augment.step1", tqtest::call("extract", R"({"column": "Cyclists", "func": "lambda x: x"})"))
      .on("programmer.augment.step1.repair1",
          tqtest::call("extract", json{{"column", "Cyclist"}, {"func", kParen}}.dump()))
      .on("programmer.augment.step1.repair2",
          tqtest::call("extract", R"j({"column": "Cyclist", "func": "lambda x: x.split(' ')[-1].strip('()')"})j"));
  plan::LogicalPlan lp{{kCountry}, std::nullopt};
  auto res = run_plan(lp, "q", cyclists(), f.ctx, 3);
  ASSERT_EQ(res.steps.size(), 1u);
  const auto& at = res.steps[0].attempts;
  ASSERT_EQ(at.size(), 3u);
  EXPECT_FALSE(at[0].precheck.ok());
  EXPECT_FALSE(at[0].executed);
  EXPECT_TRUE(at[1].executed);
  EXPECT_EQ(at[1].cells_failed, 1u);
  EXPECT_EQ(at[2].cells_failed, 0u);
  EXPECT_FALSE(res.steps[0].degraded);
  EXPECT_EQ(col_text(res.table, "Country"), (std::vector<std::string>{"ESP", "ITA", "ITA", "GBR"}));
  ASSERT_EQ(res.learned.size(), 1u);
  EXPECT_EQ(res.learned[0].outcome, memory::Outcome::Repaired);
  // The repair prompt names the failing row.
  const auto& repair = f.script.last("programmer.augment.step1.repair2").messages.back().content;
  EXPECT_NE(repair.find("row 1: \"Dav. ITA\""), std::string::npos);
}

TEST(RunPlan, EscalatesToInferAfterTwoRuntimeFailures) {
  Fixture f;
  f.script.on("programmer.augment.step1", tqtest::call("extract", json{{"column", "Cyclist"}, {"func", kParen}}.dump()))
      .on("programmer.augment.step1.repair1", tqtest::call("extract", json{{"column", "Cyclist"}, {"func", kParen}}.dump()))
      .on("programmer.augment.step1.infer2", "row 1: ITA");
  plan::LogicalPlan lp{{kCountry}, std::nullopt};
  auto res = run_plan(lp, "q", cyclists(), f.ctx, 3);
  const auto& at = res.steps[0].attempts;
  ASSERT_EQ(at.size(), 3u);
  EXPECT_EQ(at[2].physical.function, "infer");
  EXPECT_TRUE(at[2].physical.provenance.inferred);
  EXPECT_EQ(col_text(res.table, "Country"), (std::vector<std::string>{"ESP", "ITA", "ITA", "GBR"}));
  EXPECT_TRUE(res.learned.empty());
  const auto& prompt = f.script.last("programmer.augment.step1.infer2").messages.back().content;
  EXPECT_NE(prompt.find("Dav. ITA"), std::string::npos);
  EXPECT_NE(prompt.find("Alej (ESP)"), std::string::npos);  // solved rows serve as examples
}

TEST(RunPlan, DegradedStepKeepsBestTable) {
  Fixture f;
  f.script.on("programmer.augment.step1", tqtest::call("extract", json{{"column", "Cyclist"}, {"func", kParen}}.dump()));
  plan::LogicalPlan lp{{kCountry}, std::nullopt};
  auto res = run_plan(lp, "q", cyclists(), f.ctx, 0);
  EXPECT_TRUE(res.steps[0].degraded);
  EXPECT_EQ(col_text(res.table, "Country"), (std::vector<std::string>{"ESP", "", "ITA", "GBR"}));
}

TEST(RunPlan, WhollyFailedStepLeavesTable) {
  Fixture f;
  f.script.on("programmer.normalize.step1", tqtest::call("to_numerical", R"j({"column": "Medal", "func": "lambda x: int('q')"})j"));
  plan::LogicalPlan lp{{kMedal}, std::nullopt};
  auto res = run_plan(lp, "q", cyclists(), f.ctx, 0);
  EXPECT_TRUE(res.steps[0].degraded);
  EXPECT_EQ(res.table, cyclists());
}

TEST(RunPlan, FilterFailureAborts) {
  Fixture f;
  f.script.on("programmer.filter.step1", tqtest::call("filter_columns", R"({"rel_columns": ["Nope"]})"))
      .on("programmer.filter.step1.repair1", tqtest::call("filter_columns", R"({"rel_columns": ["Nope"]})"));
  plan::LogicalPlan lp{{LogicalOp::filter({"Medal"})}, std::nullopt};
  RunResult progress;
  try {
    run_plan(lp, "q", cyclists(), f.ctx, 1, &progress);
    FAIL();
  } catch (const PlanAborted& e) {
    EXPECT_EQ(e.step(), 1u);
  }
  ASSERT_EQ(progress.steps.size(), 1u);
  EXPECT_EQ(progress.steps[0].attempts.size(), 2u);
}

TEST(RunPlan, UnparseableCallIsRetriedThenDegrades) {
  Fixture f;
  f.script.on("programmer.normalize.step1", "I would convert it.")
      .on("programmer.normalize.step1.retry", "still no call");
  plan::LogicalPlan lp{{kMedal}, std::nullopt};
  auto res = run_plan(lp, "q", cyclists(), f.ctx, 3);
  EXPECT_TRUE(res.steps[0].degraded);
  EXPECT_TRUE(res.steps[0].attempts.empty());
  EXPECT_FALSE(res.steps[0].note.empty());
  EXPECT_EQ(res.table, cyclists());
}

TEST(RunPlan, MemoryDemonstrations) {
  memory::Pool pool;
  pool.add({"convert Medal to integers | Medal | \"2\"; 1; 3*", "function: to_numerical\nargs: {}",
            memory::Outcome::Succeeded, 0});
  Fixture f;
  f.ctx.memory = &pool;
  std::string prompt = programmer::physical_prompt(kMedal, "q", cyclists(), f.ctx);
  EXPECT_NE(prompt.find("Solved examples:"), std::string::npos);
  f.ctx.demonstrations = 0;
  EXPECT_EQ(programmer::physical_prompt(kMedal, "q", cyclists(), f.ctx).find("Solved examples:"), std::string::npos);
}

TEST(Programmer, ParseInferred) {
  EXPECT_EQ(programmer::parse_inferred(" '1,200' ", true), Value::integer(1200));
  EXPECT_EQ(programmer::parse_inferred("None", false), Value::null());
  EXPECT_EQ(programmer::parse_inferred("ITA", true), Value::str("ITA"));
  EXPECT_EQ(programmer::parse_inferred("12", false), Value::str("12"));
}

// Programmer prompts carry at most 20 distinct values per column, so their size
// does not grow with the number of rows.
TEST(TokenEconomy, PromptIndependentOfRowCount) {
  Fixture f;
  auto make = [](std::size_t rows) {
    std::vector<std::vector<std::string>> body;
    for (std::size_t r = 0; r < rows; ++r) {
      body.push_back({"Rider " + std::to_string(r) + " (C" + std::to_string(r % 40) + ")", std::to_string(r % 7) + "*"});
    }
    return from_rows({"Cyclist", "Medal"}, body);
  };
  std::size_t base = 0;
  for (std::size_t rows : {25u, 100u, 1000u, 5000u}) {
    Table t = make(rows);
    for (const auto& op : {kCountry, kMedal}) {
      std::string prompt = programmer::physical_prompt(op, "q", t, f.ctx);
      EXPECT_EQ(prompt.find(serialize_markdown(t)), std::string::npos);
      EXPECT_EQ(prompt.find("Rider 24 "), std::string::npos);
    }
    std::size_t tokens = count_tokens(programmer::physical_prompt(kMedal, "q", t, f.ctx));
    if (!base) base = tokens;
    EXPECT_EQ(tokens, base) << rows;
    EXPECT_LT(tokens, token_estimate(t) / 2 + 200);
  }
}
