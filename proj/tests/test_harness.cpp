#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"
#include "tqprep/harness.hpp"

using namespace tqprep;
using namespace tqprep::harness;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using Answers = std::vector<std::string>;

}  // namespace

TEST(Matcher, ToleranceUnitAndBooleanPairs) {
  EXPECT_TRUE(match_answer({"7.4499"}, {"7.45"}));
  EXPECT_TRUE(match_answer({"4 years"}, {"4"}));
  EXPECT_TRUE(match_answer({"1"}, {"yes"}));
}

TEST(Matcher, AdversarialNonMatches) {
  const std::vector<std::pair<Answers, Answers>> cases = {
      {{"7.44"}, {"7.45"}},          {{"3"}, {"4"}},
      {{"ITA"}, {"ESP"}},            {{"yes"}, {"no"}},
      {{"0"}, {"yes"}},              {{"2"}, {"yes"}},
      {{"a", "b"}, {"a"}},           {{"a", "a"}, {"a", "b"}},
      {{""}, {"0"}},                 {{"4 years"}, {"5"}},
      {{"New York"}, {"New"}},       {{"1999"}, {"1998"}},
      {{"3.6"}, {"3.5"}},            {{"10"}, {"100"}},
      {{"none"}, {"0"}},             {{"4.5 kg"}, {"4"}},
      {{"-5"}, {"5"}},               {{"ITA", "ESP"}, {"ITA", "GBR"}},
      {{"1e3"}, {"100"}},            {{}, {}},
  };
  ASSERT_EQ(cases.size(), 20u);
  for (const auto& [pred, gold] : cases) {
    EXPECT_FALSE(match_answer(pred, gold)) << (pred.empty() ? "<empty>" : pred[0]) << " vs "
                                           << (gold.empty() ? "<empty>" : gold[0]);
  }
}

TEST(Matcher, Rules) {
  EXPECT_TRUE(match_answer({"  Robert   Lewandowski "}, {"robert lewandowski"}));
  EXPECT_TRUE(match_answer({"'ITA'"}, {"ita"}));
  EXPECT_TRUE(match_answer({"Kane", "Salah", "Vardy"}, {"Salah", "Kane", "Vardy"}));
  EXPECT_TRUE(match_answer({"3.0"}, {"3"}));
  EXPECT_TRUE(match_answer({"3.6"}, {"4"}));  // tolerance follows the gold's precision
  EXPECT_TRUE(match_answer({"1230"}, {"1.23e3"}));
  EXPECT_TRUE(match_answer({"true"}, {"yes"}));
  EXPECT_TRUE(match_answer({"a", "b", "a"}, {"a", "a", "b"}));
  EXPECT_EQ(normalize_answer(" \"Hello  World\" "), "hello world");
}

TEST(Dataset, ParseAndErrors) {
  auto insts = parse_jsonl(
      R"({"id": "q1", "question": "?", "table": {"header": ["A", "A"], "rows": [["1", "2"]]}, "answers": ["1"], "options": {"planner": "direct"}})"
      "\n\n"
      R"({"id": "q2", "question": "?", "table": {"header": ["A"], "rows": []}, "answers": ["x"], "tags": ["t"]})");
  ASSERT_EQ(insts.size(), 2u);
  EXPECT_EQ(insts[0].table.column_names(), (std::vector<std::string>{"A", "A_2"}));
  EXPECT_EQ(insts[0].planner, PlannerMode::Direct);
  EXPECT_EQ(insts[1].tags, std::vector<std::string>{"t"});
  auto round = parse_jsonl(to_json(insts[0]).dump());
  EXPECT_EQ(round[0].table, insts[0].table);

  try {
    parse_jsonl(R"({"id": "q1", "table": {"header": ["A"], "rows": []}, "answers": []})");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.field(), "question");
    EXPECT_EQ(e.line(), 1u);
  }
  const std::string ok = R"({"id": "q1", "question": "?", "table": {"header": ["A"], "rows": []}, "answers": ["1"]})";
  EXPECT_THROW(parse_jsonl(ok + "\n" + ok), SchemaError);
  EXPECT_THROW(parse_jsonl("{oops"), SchemaError);
  EXPECT_THROW(parse_jsonl(R"({"id": "q", "question": "?", "table": {"header": ["A"], "rows": [["1","2"]]}, "answers": ["1"]})"),
               TableError);
  EXPECT_THROW(parse_jsonl(R"({"id": "q", "question": "?", "table": {"header": ["A"], "rows": []}, "answers": ["1"], "options": {"planner": "x"}})"),
               SchemaError);
}

TEST(ConfigJson, RoundTripAndUnknownKeys) {
  Config c;
  c.planner = PlannerMode::Direct;
  c.rounds = 1;
  c.memory = false;
  c.retrieval = memory::Mode::Semantic;
  Config back = Config::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(c.to_json()["memory"], "off");
  EXPECT_FALSE(Config::from_json(json{{"memory", false}}).memory);
  EXPECT_THROW(Config::from_json(json{{"round", 2}}), ConfigError);
  EXPECT_THROW(Config::from_json(json{{"rounds", "two"}}), ConfigError);
  EXPECT_THROW(Config::from_json(json::array()), ConfigError);
}

TEST(TableJson, TypedRoundTrip) {
  Table t = from_columns("w", {{"a", {Value(), Value::boolean(true), Value::integer(3)}},
                               {"b", {Value::real(2.5), Value::str("x"), Value::str("3")}}});
  EXPECT_EQ(table_from_json(table_to_json(t)), t);
}

TEST(RunInstance, WorkedExampleTrace) {
  RunInput in;
  in.id = "cyclists";
  in.question = "Which country has the most medals in total in February?";
  in.table = read_csv_file(tqtest::data_dir() + "/worked/cyclists.csv");
  llm::ReplayProvider provider(llm::load_transcript(tqtest::data_dir() + "/worked/transcripts/cyclists.jsonl"));
  auto out = run_instance(in, provider, tqtest::assets(), nullptr);
  ASSERT_FALSE(out.failure) << out.failure->message;
  EXPECT_EQ(out.predicted, std::vector<std::string>{"ITA"});
  EXPECT_TRUE(out.provider_warnings.empty());
  const json& tr = out.trace;
  EXPECT_EQ(tr["schema"], "tqprep.trace/1");
  EXPECT_EQ(tr["plan"]["ops"].size(), 4u);
  EXPECT_EQ(tr["steps"].size(), 4u);
  EXPECT_EQ(tr["input"]["bucket"], "Small");
  EXPECT_EQ(tr["llm"]["calls"], out.calls);
  EXPECT_EQ(out.learned.size(), 3u);
  EXPECT_EQ(stable_view(replay_trace(tr, tqtest::assets())).dump(), stable_view(tr).dump());
  EXPECT_FALSE(stable_view(tr).contains("timing"));
}

TEST(RunInstance, FailuresLandInTheTrace) {
  RunInput in;
  in.question = "q";
  in.table = from_rows({"A"}, {{"1"}});
  llm::ReplayProvider empty({});
  auto out = run_instance(in, empty, tqtest::assets(), nullptr);
  ASSERT_TRUE(out.failure);
  EXPECT_EQ(out.failure->stage, "planner");
  EXPECT_TRUE(out.failure->provider);
  EXPECT_FALSE(out.trace["failure"].is_null());

  tqtest::TagScript s;
  s.on("planner.sketch", "SELECT A FROM w").on("programmer.filter.step1", tqtest::call("filter_columns", R"({"rel_columns": ["A"]})"))
      .on("analyzer.sql", "SELECT B FROM w");
  auto bad = run_instance(in, s, tqtest::assets(), nullptr);
  ASSERT_TRUE(bad.failure);
  EXPECT_EQ(bad.failure->stage, "analyzer");
  EXPECT_FALSE(bad.failure->provider);
  ASSERT_TRUE(bad.prepared);
}

TEST(Bench, MiniDatasetDeterministicAcrossWorkers) {
  auto insts = load_jsonl(tqtest::data_dir() + "/mini/dataset.jsonl");
  ProviderFactory factory = [](const Instance& i) -> std::unique_ptr<llm::Provider> {
    return std::make_unique<llm::ReplayProvider>(
        llm::load_transcript(tqtest::data_dir() + "/mini/transcripts/" + i.id + ".jsonl"));
  };
  BenchOptions one;
  BenchOptions four;
  four.workers = 4;
  auto a = run_benchmark(insts, one, factory, tqtest::assets(), nullptr);
  auto b = run_benchmark(insts, four, factory, tqtest::assets(), nullptr);
  EXPECT_EQ(stable_view(a.report).dump(), stable_view(b.report).dump());
  EXPECT_EQ(a.report["accuracy"], 1.0);
  EXPECT_EQ(a.report["accuracy_fraction"], "20/20");
  for (const char* b_name : {"Small", "Medium", "Large"}) EXPECT_GT(a.report["buckets"][b_name]["total"], 0);
  EXPECT_EQ(a.learned, b.learned);
  EXPECT_FALSE(summarize_report(a.report).empty());
  EXPECT_THROW(run_benchmark({}, one, factory, tqtest::assets(), nullptr), ConfigError);
}

TEST(Bench, BundledReportMatchesFreshRun) {
  json bundled = json::parse(slurp(tqtest::data_dir() + "/mini/report.json"));
  auto insts = load_jsonl(tqtest::data_dir() + "/mini/dataset.jsonl");
  ProviderFactory factory = [](const Instance& i) -> std::unique_ptr<llm::Provider> {
    return std::make_unique<llm::ReplayProvider>(
        llm::load_transcript(tqtest::data_dir() + "/mini/transcripts/" + i.id + ".jsonl"));
  };
  auto fresh = run_benchmark(insts, BenchOptions{}, factory, tqtest::assets(), nullptr);
  bundled.erase("source");
  EXPECT_EQ(stable_view(fresh.report).dump(), stable_view(bundled).dump());
}
