#include "tqprep/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "tqprep/analyzer.hpp"
#include "tqprep/digest.hpp"
#include "tqprep/executor.hpp"
#include "tqprep/planner.hpp"
#include "tqprep/programmer.hpp"
#include "tqprep/text.hpp"

namespace tqprep::harness {

using nlohmann::json;

const char* planner_name(PlannerMode m) { return m == PlannerMode::Coc ? "coc" : "direct"; }

namespace {

PlannerMode planner_from(const std::string& s) {
  if (s == "coc") return PlannerMode::Coc;
  if (s == "direct") return PlannerMode::Direct;
  throw ConfigError("planner must be 'coc' or 'direct', got '" + s + "'");
}

std::string cell_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

}  // namespace

// ---------------------------------------------------------------- datasets

std::vector<Instance> parse_jsonl(std::string_view text, const std::string& origin) {
  std::vector<Instance> out;
  std::set<std::string> ids;
  std::size_t lineno = 0;
  for (const auto& raw : text::split_lines(text)) {
    ++lineno;
    if (text::trim(raw).empty()) continue;
    auto where = [&](const std::string& field) { return origin + ":" + std::to_string(lineno) + ": " + field; };
    json j;
    try {
      j = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw SchemaError(lineno, "", where("invalid JSON (") + e.what() + ")");
    }
    if (!j.is_object()) throw SchemaError(lineno, "", where("expected a JSON object"));
    auto need = [&](const char* field) -> const json& {
      if (!j.contains(field)) throw SchemaError(lineno, field, where(std::string("missing field '") + field + "'"));
      return j.at(field);
    };

    Instance inst;
    const json& id = need("id");
    if (!id.is_string() && !id.is_number_integer()) throw SchemaError(lineno, "id", where("id must be a string"));
    inst.id = cell_text(id);
    if (inst.id.empty()) throw SchemaError(lineno, "id", where("id is empty"));
    if (!ids.insert(inst.id).second) throw SchemaError(lineno, "id", where("duplicate id '" + inst.id + "'"));

    const json& q = need("question");
    if (!q.is_string()) throw SchemaError(lineno, "question", where("question must be a string"));
    inst.question = q.get<std::string>();

    const json& tab = need("table");
    if (!tab.is_object() || !tab.contains("header") || !tab.at("header").is_array()) {
      throw SchemaError(lineno, "table.header", where("table.header must be an array"));
    }
    if (!tab.contains("rows") || !tab.at("rows").is_array()) {
      throw SchemaError(lineno, "table.rows", where("table.rows must be an array"));
    }
    std::vector<std::string> header;
    for (const auto& h : tab.at("header")) header.push_back(cell_text(h));
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : tab.at("rows")) {
      if (!r.is_array()) throw SchemaError(lineno, "table.rows", where("each row must be an array"));
      std::vector<std::string> row;
      for (const auto& c : r) row.push_back(cell_text(c));
      rows.push_back(std::move(row));
    }
    try {
      inst.table = from_rows(header, rows);
    } catch (const TableError& e) {
      throw TableError(e.kind(), e.subject(), "instance '" + inst.id + "': " + e.what());
    }

    const json& answers = need("answers");
    if (!answers.is_array() || answers.empty()) {
      throw SchemaError(lineno, "answers", where("answers must be a non-empty array"));
    }
    for (const auto& a : answers) inst.gold.push_back(cell_text(a));

    if (j.contains("tags")) {
      if (!j.at("tags").is_array()) throw SchemaError(lineno, "tags", where("tags must be an array"));
      for (const auto& t : j.at("tags")) inst.tags.push_back(cell_text(t));
    }
    if (j.contains("options")) {
      const json& o = j.at("options");
      if (!o.is_object()) throw SchemaError(lineno, "options", where("options must be an object"));
      if (o.contains("planner")) {
        try {
          inst.planner = planner_from(cell_text(o.at("planner")));
        } catch (const ConfigError& e) {
          throw SchemaError(lineno, "options.planner", where(e.what()));
        }
      }
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<Instance> load_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open dataset " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_jsonl(ss.str(), path);
}

json to_json(const Instance& inst) {
  json rows = json::array();
  for (std::size_t r = 0; r < inst.table.row_count(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < inst.table.column_count(); ++c) row.push_back(inst.table.cell(r, c).to_text());
    rows.push_back(std::move(row));
  }
  json j{{"id", inst.id},
         {"question", inst.question},
         {"table", {{"header", inst.table.column_names()}, {"rows", rows}}},
         {"answers", inst.gold}};
  if (!inst.tags.empty()) j["tags"] = inst.tags;
  if (inst.planner) j["options"] = {{"planner", planner_name(*inst.planner)}};
  return j;
}

// ---------------------------------------------------------------- matcher

std::string normalize_answer(std::string_view s) {
  std::string out = text::to_lower_ascii(text::collapse_whitespace(s));
  if (out.size() >= 2 && (out.front() == '"' || out.front() == '\'') && out.back() == out.front()) {
    out = text::collapse_whitespace(out.substr(1, out.size() - 2));
  }
  return out;
}

namespace {

std::optional<std::string> boolean_of(const std::string& s) {
  if (s == "1" || s == "true" || s == "yes") return "yes";
  if (s == "0" || s == "false" || s == "no") return "no";
  return std::nullopt;
}

std::optional<double> number_of(const std::string& s) {
  auto v = parse_number(s);
  if (!v) return std::nullopt;
  return v->as_number();
}

// Half a unit in the last decimal place written in the gold text.
double tolerance_of(const std::string& gold) {
  int frac = 0;
  int exp = 0;
  auto dot = gold.find('.');
  auto e = gold.find_first_of("eE");
  if (dot != std::string::npos) {
    std::size_t end = e == std::string::npos ? gold.size() : e;
    if (end > dot) frac = static_cast<int>(end - dot - 1);
  }
  if (e != std::string::npos) {
    auto x = parse_number(gold.substr(e + 1));
    if (x && x->is_int()) exp = static_cast<int>(x->as_int());
  }
  return 0.5 * std::pow(10.0, -(frac - exp));
}

std::optional<double> pred_number(const std::string& p) {
  if (auto n = number_of(p)) return n;
  auto sp = p.rfind(' ');
  if (sp == std::string::npos) return std::nullopt;
  std::string unit = p.substr(sp + 1);
  bool alpha = !unit.empty() && std::all_of(unit.begin(), unit.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  });
  if (!alpha) return std::nullopt;
  return number_of(p.substr(0, sp));
}

bool value_match(const std::string& p, const std::string& g) {
  if (p == g) return true;
  auto gn = number_of(g);
  if (!gn) return false;
  auto pn = pred_number(p);
  return pn && std::fabs(*pn - *gn) < tolerance_of(g);
}

bool augment(std::size_t u, const std::vector<std::vector<bool>>& adj, std::vector<int>& owner,
             std::vector<bool>& seen) {
  for (std::size_t v = 0; v < adj[u].size(); ++v) {
    if (!adj[u][v] || seen[v]) continue;
    seen[v] = true;
    if (owner[v] < 0 || augment(static_cast<std::size_t>(owner[v]), adj, owner, seen)) {
      owner[v] = static_cast<int>(u);
      return true;
    }
  }
  return false;
}

}  // namespace

bool match_answer(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() || gold.empty() || pred.size() != gold.size()) return false;
  std::vector<std::string> p, g;
  for (const auto& s : pred) p.push_back(normalize_answer(s));
  for (const auto& s : gold) g.push_back(normalize_answer(s));
  bool boolean_gold = std::all_of(g.begin(), g.end(), [](const std::string& s) { return boolean_of(s).has_value(); });
  if (boolean_gold) {
    for (auto& s : g) s = *boolean_of(s);
    for (auto& s : p) {
      if (auto b = boolean_of(s)) s = *b;
    }
  }
  const std::size_t n = p.size();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) adj[i][k] = value_match(p[i], g[k]);
  }
  std::vector<int> owner(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<bool> seen(n, false);
    if (!augment(i, adj, owner, seen)) return false;
  }
  return true;
}

// ---------------------------------------------------------------- config

json Config::to_json() const {
  return json{{"planner", planner_name(planner)},
              {"rounds", rounds},
              {"memory", memory ? "on" : "off"},
              {"strict_filter", strict_filter},
              {"retrieval", retrieval == memory::Mode::Lexical ? "lexical" : "semantic"},
              {"demonstrations", demonstrations},
              {"temperature", temperature},
              {"max_input_tokens", max_input_tokens}};
}

Config Config::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  Config c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "planner") {
        c.planner = planner_from(v.get<std::string>());
      } else if (key == "rounds") {
        c.rounds = v.get<int>();
        if (c.rounds < 0) throw ConfigError("rounds must be >= 0");
      } else if (key == "memory") {
        if (v.is_boolean()) {
          c.memory = v.get<bool>();
        } else {
          auto s = v.get<std::string>();
          if (s != "on" && s != "off") throw ConfigError("memory must be 'on' or 'off'");
          c.memory = s == "on";
        }
      } else if (key == "strict_filter") {
        c.strict_filter = v.get<bool>();
      } else if (key == "retrieval") {
        auto s = v.get<std::string>();
        if (s != "lexical" && s != "semantic") throw ConfigError("retrieval must be 'lexical' or 'semantic'");
        c.retrieval = s == "lexical" ? memory::Mode::Lexical : memory::Mode::Semantic;
      } else if (key == "demonstrations") {
        c.demonstrations = v.get<std::size_t>();
      } else if (key == "temperature") {
        c.temperature = v.get<double>();
        if (!(c.temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
      } else if (key == "max_input_tokens") {
        c.max_input_tokens = v.get<std::size_t>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------- tables as JSON

namespace {

json value_json(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Null: return nullptr;
    case Value::Kind::Bool: return v.as_bool();
    case Value::Kind::Int: return v.as_int();
    case Value::Kind::Float: return v.as_float();
    case Value::Kind::Str: return v.as_str();
  }
  return nullptr;
}

Value value_from(const json& j) {
  if (j.is_null()) return Value::null();
  if (j.is_boolean()) return Value::boolean(j.get<bool>());
  if (j.is_number_integer()) return Value::integer(j.get<std::int64_t>());
  if (j.is_number()) return Value::real(j.get<double>());
  if (j.is_string()) return Value::str(j.get<std::string>());
  throw std::invalid_argument("table cell must be null, boolean, number or string");
}

}  // namespace

json table_to_json(const Table& t) {
  json rows = json::array();
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < t.column_count(); ++c) row.push_back(value_json(t.cell(r, c)));
    rows.push_back(std::move(row));
  }
  return json{{"name", t.name()}, {"columns", t.column_names()}, {"rows", rows}};
}

Table table_from_json(const json& j) {
  auto names = j.at("columns").get<std::vector<std::string>>();
  std::vector<std::pair<std::string, std::vector<Value>>> cols;
  for (const auto& n : names) cols.push_back({n, {}});
  for (const auto& row : j.at("rows")) {
    if (row.size() != names.size()) throw std::invalid_argument("table row width differs from column count");
    for (std::size_t c = 0; c < names.size(); ++c) cols[c].second.push_back(value_from(row.at(c)));
  }
  return from_columns(j.at("name").get<std::string>(), std::move(cols));
}

// ---------------------------------------------------------------- one run

namespace {

json plan_json(const plan::LogicalPlan& lp, PlannerMode mode) {
  json ops = json::array();
  json lines = json::array();
  for (const auto& op : lp.ops) {
    ops.push_back(plan::to_json(op));
    lines.push_back(plan::format_op(op));
  }
  json j{{"planner", planner_name(mode)}, {"ops", ops}, {"text", lines}};
  j["sketch"] = lp.sketch ? json(sql::pretty_print(*lp.sketch)) : json(nullptr);
  return j;
}

json failure_json(const std::optional<Failure>& f) {
  if (!f) return nullptr;
  return json{{"stage", f->stage}, {"message", f->message}, {"provider", f->provider}};
}

}  // namespace

RunOutput run_instance(const RunInput& in, llm::Provider& provider, const Assets& assets, const memory::Pool* pool) {
  auto t0 = std::chrono::steady_clock::now();
  RunOutput out;
  llm::Session session(provider);
  std::vector<std::string> warnings;
  const Config& cfg = in.config;
  const memory::Pool* mem = cfg.memory && pool && !pool->empty() ? pool : nullptr;

  json trace{{"schema", "tqprep.trace/1"},
             {"id", in.id},
             {"question", in.question},
             {"input",
              {{"table", table_to_json(in.table)},
               {"digest", table_digest(in.table)},
               {"tokens", token_estimate(in.table)},
               {"bucket", bucket_name(size_bucket(in.table))}}},
             {"config", cfg.to_json()},
             {"analyze", in.analyze},
             {"memory", mem ? mem->snapshot() : json::array()}};

  auto fail = [&](const char* stage, const std::exception& e, bool provider_error) {
    out.failure = Failure{stage, e.what(), provider_error};
  };

  std::optional<plan::LogicalPlan> lp;
  planner::Context pctx{session, assets, warnings, cfg.temperature, cfg.max_input_tokens};
  try {
    lp = cfg.planner == PlannerMode::Coc ? planner::plan_coc(in.question, in.table, pctx, cfg.strict_filter)
                                         : planner::plan_direct(in.question, in.table, pctx);
  } catch (const llm::LlmError& e) {
    fail("planner", e, true);
  } catch (const std::exception& e) {
    fail("planner", e, false);
  }
  trace["plan"] = lp ? plan_json(*lp, cfg.planner) : json(nullptr);

  json steps = json::array();
  if (lp) {
    programmer::Context gctx{session, assets, mem, cfg.retrieval, cfg.demonstrations, cfg.temperature,
                             cfg.max_input_tokens};
    exec::RunResult progress;
    try {
      auto rr = exec::run_plan(*lp, in.question, in.table, gctx, cfg.rounds, &progress);
      out.prepared = rr.table;
      out.learned = rr.learned;
      progress = std::move(rr);
    } catch (const llm::LlmError& e) {
      fail("executor", e, true);
    } catch (const std::exception& e) {
      fail("executor", e, false);
    }
    for (const auto& s : progress.steps) steps.push_back(exec::to_json(s));
  }
  trace["steps"] = steps;
  if (out.prepared) {
    trace["prepared"] = {{"digest", table_digest(*out.prepared)},
                         {"columns", out.prepared->column_names()},
                         {"rows", out.prepared->row_count()}};
  } else {
    trace["prepared"] = nullptr;
  }

  trace["answer"] = nullptr;
  if (in.analyze && out.prepared) {
    analyzer::Context actx{session, assets, cfg.temperature, cfg.max_input_tokens};
    try {
      auto answered = analyzer::answer_with_query(in.question, *out.prepared, actx);
      out.predicted = answered.answer.values;
      trace["answer"] = {{"sql", sql::pretty_print(answered.query)}, {"values", out.predicted}};
    } catch (const llm::LlmError& e) {
      fail("analyzer", e, true);
    } catch (const std::exception& e) {
      fail("analyzer", e, false);
    }
  }

  out.transcript = session.recording();
  out.calls = session.calls();
  out.input_tokens = session.input_tokens();
  out.provider_warnings = session.take_warnings();
  json transcript = json::array();
  for (const auto& e : out.transcript) transcript.push_back(llm::to_json(e));

  trace["warnings"] = warnings;
  trace["failure"] = failure_json(out.failure);
  trace["llm"] = {{"calls", out.calls}, {"input_tokens", out.input_tokens}};
  trace["transcript"] = transcript;
  auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  trace["timing"] = {{"ms", std::round(ms * 1000.0) / 1000.0}};
  out.trace = std::move(trace);
  return out;
}

// ---------------------------------------------------------------- benchmark

namespace {

json bucket_json(std::size_t total, std::size_t matched) {
  json j{{"total", total}, {"matched", matched}};
  j["accuracy"] = total ? json(static_cast<double>(matched) / static_cast<double>(total)) : json(nullptr);
  return j;
}

}  // namespace

BenchResult run_benchmark(std::vector<Instance> instances, const BenchOptions& opts, const ProviderFactory& factory,
                          const Assets& assets, const memory::Pool* pool) {
  auto t0 = std::chrono::steady_clock::now();
  if (instances.empty()) throw ConfigError("dataset has no instances");
  std::sort(instances.begin(), instances.end(), [](const Instance& a, const Instance& b) { return a.id < b.id; });

  // Providers are resolved up front so a missing transcript fails before any work.
  std::vector<std::unique_ptr<llm::Provider>> providers;
  for (const auto& inst : instances) providers.push_back(factory(inst));

  std::vector<RunOutput> outputs(instances.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < instances.size(); i = next++) {
      const Instance& inst = instances[i];
      RunInput in{inst.id, inst.question, inst.table, opts.config, true};
      if (inst.planner) in.config.planner = *inst.planner;
      outputs[i] = run_instance(in, *providers[i], assets, pool);
    }
  };
  std::size_t workers = std::max<std::size_t>(1, std::min(opts.workers, instances.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  BenchResult res;
  json rows = json::array();
  std::size_t matched_total = 0, calls = 0, tokens = 0;
  std::map<SizeBucket, std::pair<std::size_t, std::size_t>> buckets{
      {SizeBucket::Small, {0, 0}}, {SizeBucket::Medium, {0, 0}}, {SizeBucket::Large, {0, 0}}};
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Instance& inst = instances[i];
    RunOutput& o = outputs[i];
    bool matched = !o.failure && match_answer(o.predicted, inst.gold);
    SizeBucket b = size_bucket(inst.table);
    buckets[b].first += 1;
    buckets[b].second += matched ? 1 : 0;
    matched_total += matched ? 1 : 0;
    calls += o.calls;
    tokens += o.input_tokens;
    rows.push_back({{"id", inst.id},
                    {"question", inst.question},
                    {"bucket", bucket_name(b)},
                    {"planner", o.trace["plan"].is_null() ? json(nullptr) : o.trace["plan"]["planner"]},
                    {"predicted", o.predicted},
                    {"gold", inst.gold},
                    {"matched", matched},
                    {"failure", failure_json(o.failure)},
                    {"calls", o.calls},
                    {"input_tokens", o.input_tokens},
                    {"degraded_steps", std::count_if(o.trace["steps"].begin(), o.trace["steps"].end(),
                                                     [](const json& s) { return s["degraded"].get<bool>(); })}});
    if (opts.on_transcript) opts.on_transcript(inst, o.transcript);
    for (auto& r : o.learned) res.learned.push_back(std::move(r));
    res.traces.push_back(std::move(o.trace));
  }
  json bucket_report = json::object();
  for (const auto& [b, counts] : buckets) bucket_report[bucket_name(b)] = bucket_json(counts.first, counts.second);
  json report{{"schema", "tqprep.report/1"},
              {"config", opts.config.to_json()},
              {"instances", rows},
              {"total", instances.size()},
              {"matched", matched_total},
              {"accuracy", static_cast<double>(matched_total) / static_cast<double>(instances.size())},
              {"accuracy_fraction", std::to_string(matched_total) + "/" + std::to_string(instances.size())},
              {"buckets", bucket_report},
              {"llm", {{"calls", calls}, {"input_tokens", tokens}}}};
  auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  report["timing"] = {{"ms", std::round(ms * 1000.0) / 1000.0}};
  res.report = std::move(report);
  return res;
}

std::string summarize_report(const json& report) {
  std::ostringstream os;
  os << "accuracy " << report.at("accuracy_fraction").get<std::string>() << " = "
     << format_double(report.at("accuracy").get<double>()) << "\n";
  for (const auto& [name, b] : report.at("buckets").items()) {
    os << "  " << name << ": " << b.at("matched").get<std::size_t>() << "/" << b.at("total").get<std::size_t>()
       << "\n";
  }
  os << "model calls " << report.at("llm").at("calls").get<std::size_t>() << ", input tokens "
     << report.at("llm").at("input_tokens").get<std::size_t>() << "\n";
  for (const auto& row : report.at("instances")) {
    if (row.at("matched").get<bool>()) continue;
    os << "  miss " << row.at("id").get<std::string>();
    if (!row.at("failure").is_null()) {
      os << " [" << row.at("failure").at("stage").get<std::string>() << "] "
         << row.at("failure").at("message").get<std::string>();
    } else {
      os << " predicted " << row.at("predicted").dump() << " gold " << row.at("gold").dump();
    }
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------- replay

json replay_trace(const json& trace, const Assets& assets) {
  if (!trace.is_object() || trace.value("schema", "") != "tqprep.trace/1") {
    throw ConfigError("not a trace document");
  }
  RunInput in;
  in.id = trace.at("id").get<std::string>();
  in.question = trace.at("question").get<std::string>();
  in.table = table_from_json(trace.at("input").at("table"));
  in.config = Config::from_json(trace.at("config"));
  in.analyze = trace.at("analyze").get<bool>();
  memory::Pool pool;
  for (const auto& r : trace.at("memory")) pool.restore(memory::record_from_json(r));
  std::vector<llm::TranscriptEntry> entries;
  for (const auto& e : trace.at("transcript")) entries.push_back(llm::entry_from_json(e));
  llm::ReplayProvider provider(std::move(entries));
  return run_instance(in, provider, assets, &pool).trace;
}

json stable_view(json doc) {
  if (doc.is_object()) {
    doc.erase("timing");
    for (auto& [k, v] : doc.items()) v = stable_view(std::move(v));
  } else if (doc.is_array()) {
    for (auto& v : doc) v = stable_view(std::move(v));
  }
  return doc;
}

}  // namespace tqprep::harness
