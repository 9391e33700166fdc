// Command-line entry point: prep, answer, bench, replay, convert.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tqprep/convert.hpp"
#include "tqprep/harness.hpp"
#include "tqprep/llm.hpp"
#include "tqprep/memory.hpp"
#include "tqprep/table.hpp"

#ifndef TQPREP_DEFAULT_ASSETS
#define TQPREP_DEFAULT_ASSETS "assets/prompts"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tqprep;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kProvider = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string provider = "http";
  std::string transcripts;
  std::string config_file;
  int rounds = 3;
  std::string planner = "coc";
  std::string memory = "on";
  std::string retrieval = "lexical";
  bool strict_filter = false;
  std::string record_dir;
  std::string assets_dir;
  std::string memory_file;

  CLI::Option* rounds_opt = nullptr;
  CLI::Option* planner_opt = nullptr;
  CLI::Option* memory_opt = nullptr;
  CLI::Option* retrieval_opt = nullptr;
  CLI::Option* strict_opt = nullptr;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--provider", c.provider, "Model provider")->check(CLI::IsMember({"http", "scripted"}));
  app->add_option("--transcripts", c.transcripts, "Transcript file, or directory of <id>.jsonl files");
  app->add_option("--config", c.config_file, "Flat JSON config file");
  c.rounds_opt = app->add_option("--rounds", c.rounds, "Repair rounds per step")->check(CLI::NonNegativeNumber);
  c.planner_opt = app->add_option("--planner", c.planner, "Planner")->check(CLI::IsMember({"coc", "direct"}));
  c.memory_opt = app->add_option("--memory", c.memory, "Use the memory pool")->check(CLI::IsMember({"on", "off"}));
  c.retrieval_opt =
      app->add_option("--retrieval", c.retrieval, "Memory retrieval")->check(CLI::IsMember({"lexical", "semantic"}));
  c.strict_opt = app->add_flag("--strict-filter", c.strict_filter, "Drop consumed UDF sources from the Filter");
  app->add_option("--record-transcripts", c.record_dir, "Write each run's exchange to DIR/<id>.jsonl");
  app->add_option("--assets", c.assets_dir, "Prompt and exemplar directory");
  app->add_option("--memory-file", c.memory_file, "Memory pool JSONL; learned records are appended");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

harness::Config resolve_config(const Common& c) {
  harness::Config cfg;
  if (!c.config_file.empty()) {
    json j;
    try {
      j = json::parse(read_file(c.config_file));
    } catch (const json::parse_error& e) {
      throw harness::ConfigError("config " + c.config_file + ": " + e.what());
    }
    cfg = harness::Config::from_json(j);
  }
  json over = json::object();
  if (c.rounds_opt->count()) over["rounds"] = c.rounds;
  if (c.planner_opt->count()) over["planner"] = c.planner;
  if (c.memory_opt->count()) over["memory"] = c.memory;
  if (c.retrieval_opt->count()) over["retrieval"] = c.retrieval;
  if (c.strict_opt->count()) over["strict_filter"] = c.strict_filter;
  json merged = cfg.to_json();
  merged.update(over);
  return harness::Config::from_json(merged);
}

Assets load_assets(const Common& c) {
  std::string dir = c.assets_dir;
  if (dir.empty()) {
    const char* env = std::getenv("TQPREP_ASSETS");
    dir = env ? env : TQPREP_DEFAULT_ASSETS;
  }
  return Assets::load(dir);
}

std::string transcript_path(const std::string& where, const std::string& id) {
  if (where.empty()) throw llm::LlmError(llm::LlmError::Kind::Config, "--provider scripted needs --transcripts");
  if (fs::is_directory(where)) return (fs::path(where) / (id + ".jsonl")).string();
  return where;
}

std::unique_ptr<llm::Provider> make_provider(const Common& c, const std::string& id) {
  if (c.provider == "scripted") {
    return std::make_unique<llm::ReplayProvider>(llm::load_transcript(transcript_path(c.transcripts, id)));
  }
  return std::make_unique<llm::HttpProvider>(llm::HttpConfig::from_env());
}

void record(const Common& c, const std::string& id, const std::vector<llm::TranscriptEntry>& entries) {
  if (c.record_dir.empty()) return;
  write_file((fs::path(c.record_dir) / (id + ".jsonl")).string(), llm::dump_transcript(entries));
}

memory::Pool load_pool(const Common& c) {
  memory::Pool pool;
  if (!c.memory_file.empty()) pool.load_jsonl(c.memory_file);
  return pool;
}

void save_pool(const Common& c, const harness::Config& cfg, memory::Pool& pool,
               const std::vector<memory::MemoryRecord>& learned) {
  if (c.memory_file.empty() || !cfg.memory || learned.empty()) return;
  for (const auto& r : learned) pool.add(r);
  pool.save_jsonl(c.memory_file);
}

void print_warnings(const std::vector<std::string>& provider_warnings, const json& trace) {
  for (const auto& w : provider_warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& w : trace.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << "\n";
  for (const auto& s : trace.at("steps")) {
    if (s.at("degraded").get<bool>()) {
      std::cerr << "warning: step " << s.at("logical").dump() << " degraded\n";
    }
  }
}

int failure_exit(const harness::RunOutput& out) {
  if (!out.failure) return kOk;
  std::cerr << "error: " << out.failure->stage << " failed: " << out.failure->message << "\n";
  return out.failure->provider ? kProvider : kData;
}

// prep and answer
int run_single(const Common& c, const std::string& table_path, const std::string& question, std::string id,
               const std::string& out_csv, const std::string& trace_path, bool analyze) {
  auto cfg = resolve_config(c);
  auto assets = load_assets(c);
  Table t = read_csv_file(table_path);
  if (id.empty()) id = fs::path(table_path).stem().string();
  auto provider = make_provider(c, id);
  auto pool = load_pool(c);

  harness::RunInput in{id, question, t, cfg, analyze};
  auto out = harness::run_instance(in, *provider, assets, &pool);
  record(c, id, out.transcript);
  print_warnings(out.provider_warnings, out.trace);
  if (!trace_path.empty()) write_file(trace_path, out.trace.dump(2) + "\n");
  if (out.prepared && !out_csv.empty()) {
    write_file(out_csv, write_csv(*out.prepared));
    std::cerr << "prepared table written to " << out_csv << " (" << out.prepared->row_count() << " rows, "
              << out.prepared->column_count() << " columns)\n";
  }
  if (analyze && !out.failure) {
    for (const auto& v : out.predicted) std::cout << v << "\n";
  }
  save_pool(c, cfg, pool, out.learned);
  return failure_exit(out);
}

std::string relative_to(const std::string& path, const fs::path& base) {
  if (path.empty()) return "";
  return fs::relative(fs::absolute(path), fs::absolute(base)).generic_string();
}

harness::BenchResult bench_core(const Common& c, const harness::Config& cfg, const std::string& dataset,
                                std::size_t workers, const memory::Pool& pool) {
  auto instances = harness::load_jsonl(dataset);
  if (instances.empty()) throw UsageError("dataset " + dataset + " has no instances");
  auto assets = load_assets(c);
  harness::BenchOptions opts;
  opts.config = cfg;
  opts.workers = workers;
  opts.on_transcript = [&](const harness::Instance& inst, const std::vector<llm::TranscriptEntry>& e) {
    record(c, inst.id, e);
  };
  auto factory = [&](const harness::Instance& inst) { return make_provider(c, inst.id); };
  return harness::run_benchmark(std::move(instances), opts, factory, assets, &pool);
}

int run_bench(const Common& c, const std::string& dataset, const std::string& report_path,
              const std::string& traces_dir, std::size_t workers) {
  auto cfg = resolve_config(c);
  auto pool = load_pool(c);
  auto res = bench_core(c, cfg, dataset, workers, pool);

  // Enough to re-run the benchmark from the report alone.
  fs::path base = fs::path(report_path).has_parent_path() ? fs::path(report_path).parent_path() : fs::path(".");
  std::string replay_transcripts = !c.record_dir.empty() ? c.record_dir : c.transcripts;
  res.report["source"] = {{"dataset", relative_to(dataset, base)},
                          {"transcripts", relative_to(replay_transcripts, base)},
                          {"memory", cfg.memory ? pool.snapshot() : json::array()}};
  write_file(report_path, res.report.dump(2) + "\n");
  if (!traces_dir.empty()) {
    for (const auto& t : res.traces) {
      write_file((fs::path(traces_dir) / (t.at("id").get<std::string>() + ".trace.json")).string(), t.dump(2) + "\n");
    }
  }
  std::cout << harness::summarize_report(res.report);
  save_pool(c, cfg, pool, res.learned);
  return kOk;
}

std::string first_difference(const json& a, const json& b) {
  auto patch = json::diff(a, b);
  if (patch.empty()) return "";
  return patch.front().value("op", "") + " " + patch.front().value("path", "");
}

int run_replay(const Common& c, const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw harness::ConfigError(path + ": " + e.what());
  }
  std::string schema = doc.value("schema", "");
  json again;
  if (schema == "tqprep.trace/1") {
    again = harness::replay_trace(doc, load_assets(c));
  } else if (schema == "tqprep.report/1") {
    fs::path base = fs::path(path).has_parent_path() ? fs::path(path).parent_path() : fs::path(".");
    const json& src = doc.at("source");
    std::string transcripts = src.at("transcripts").get<std::string>();
    if (transcripts.empty()) throw harness::ConfigError("report has no transcripts to replay from");
    Common rc = c;
    rc.provider = "scripted";
    rc.transcripts = (base / transcripts).string();
    rc.record_dir.clear();
    memory::Pool pool;
    for (const auto& r : src.at("memory")) pool.restore(memory::record_from_json(r));
    auto cfg = harness::Config::from_json(doc.at("config"));
    auto dataset = (base / src.at("dataset").get<std::string>()).string();
    auto res = bench_core(rc, cfg, dataset, 1, pool);
    res.report["source"] = src;
    again = std::move(res.report);
  } else {
    throw harness::ConfigError(path + " is neither a trace nor a report");
  }
  std::string before = harness::stable_view(doc).dump(2);
  std::string after = harness::stable_view(again).dump(2);
  if (before == after) {
    std::cout << "identical\n";
    return kOk;
  }
  std::cout << "differs: " << first_difference(harness::stable_view(doc), harness::stable_view(again)) << "\n";
  return kData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Question-aware table preparation for tabular question answering"};
  app.require_subcommand(1);

  Common prep_c, answer_c, bench_c, replay_c;
  std::string table, question, id, out_csv = "prepared.csv", trace_path = "trace.json";
  auto* prep = app.add_subcommand("prep", "Prepare a table for a question");
  prep->add_option("--table", table, "Input CSV")->required();
  prep->add_option("--question", question, "Question")->required();
  prep->add_option("--id", id, "Run id (default: table file stem)");
  prep->add_option("--out", out_csv, "Prepared CSV");
  prep->add_option("--trace", trace_path, "Trace JSON");
  add_common(prep, prep_c);

  std::string a_table, a_question, a_id, a_out, a_trace;
  auto* answer = app.add_subcommand("answer", "Prepare a table and answer the question");
  answer->add_option("--table", a_table, "Input CSV")->required();
  answer->add_option("--question", a_question, "Question")->required();
  answer->add_option("--id", a_id, "Run id (default: table file stem)");
  answer->add_option("--out", a_out, "Prepared CSV");
  answer->add_option("--trace", a_trace, "Trace JSON");
  add_common(answer, answer_c);

  std::string dataset, report_path = "report.json", traces_dir;
  std::size_t workers = 1;
  auto* bench = app.add_subcommand("bench", "Run a dataset and write an accuracy report");
  bench->add_option("--dataset", dataset, "Dataset JSONL")->required();
  bench->add_option("--report", report_path, "Report JSON");
  bench->add_option("--traces", traces_dir, "Directory for per-instance traces");
  bench->add_option("--workers", workers, "Concurrent instances")->check(CLI::PositiveNumber);
  add_common(bench, bench_c);

  std::string replay_path;
  auto* replay = app.add_subcommand("replay", "Re-run a trace or report and compare");
  replay->add_option("file", replay_path, "Trace or report JSON")->required();
  replay->add_option("--assets", replay_c.assets_dir, "Prompt and exemplar directory");

  std::string conv_format, conv_input, conv_tables, conv_out;
  auto* convert = app.add_subcommand("convert", "Convert an official dataset layout to JSONL");
  convert->add_option("--format", conv_format, "Source layout")->required()->check(CLI::IsMember({"wikitq", "tabfact"}));
  convert->add_option("--input", conv_input, "Question file (TSV or JSON)")->required();
  convert->add_option("--tables", conv_tables, "Root directory that table paths are relative to")->required();
  convert->add_option("--out", conv_out, "Output JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (prep->parsed()) return run_single(prep_c, table, question, id, out_csv, trace_path, false);
    if (answer->parsed()) return run_single(answer_c, a_table, a_question, a_id, a_out, a_trace, true);
    if (bench->parsed()) return run_bench(bench_c, dataset, report_path, traces_dir, workers);
    if (replay->parsed()) return run_replay(replay_c, replay_path);
    if (convert->parsed()) {
      auto conv = conv_format == "wikitq" ? convert::wikitq(conv_input, conv_tables)
                                          : convert::tabfact(conv_input, conv_tables);
      write_file(conv_out, convert::to_jsonl(conv.instances));
      std::cout << convert::describe(conv.stats) << "\n";
      for (const auto& w : conv.warnings) std::cerr << "warning: " << w << "\n";
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const llm::LlmError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return kProvider;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
