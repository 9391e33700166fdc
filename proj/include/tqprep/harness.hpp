#pragma once

// Datasets, the answer matcher, single-instance pipeline runs with traces,
// benchmark reports and replay.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tqprep/assets.hpp"
#include "tqprep/llm.hpp"
#include "tqprep/memory.hpp"
#include "tqprep/table.hpp"

namespace tqprep::harness {

class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::size_t line, std::string field, const std::string& message)
      : std::runtime_error(message), line_(line), field_(std::move(field)) {}
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PlannerMode { Coc, Direct };
const char* planner_name(PlannerMode m);

struct Instance {
  std::string id;
  std::string question;
  Table table;
  std::vector<std::string> gold;
  std::vector<std::string> tags;
  std::optional<PlannerMode> planner;  // per-instance override
};

// One JSON object per line: {id, question, table: {header, rows}, answers, tags?, options?: {planner}}.
// Blank lines are skipped. Ragged tables raise TableError naming the instance.
std::vector<Instance> parse_jsonl(std::string_view text, const std::string& origin = "<text>");
std::vector<Instance> load_jsonl(const std::string& path);
nlohmann::json to_json(const Instance& inst);

// Lowercase, trim, collapse whitespace, strip one pair of surrounding quotes.
std::string normalize_answer(std::string_view s);
// Order-insensitive multiset match with boolean, numeric-tolerance and unit rules.
bool match_answer(const std::vector<std::string>& pred, const std::vector<std::string>& gold);

struct Config {
  PlannerMode planner = PlannerMode::Coc;
  int rounds = 3;
  bool memory = true;
  bool strict_filter = false;
  memory::Mode retrieval = memory::Mode::Lexical;
  std::size_t demonstrations = 2;
  double temperature = 0.01;
  std::size_t max_input_tokens = 8192;

  nlohmann::json to_json() const;
  // Flat object with the keys of to_json(); unknown keys are a ConfigError.
  static Config from_json(const nlohmann::json& j);
};

struct Failure {
  std::string stage;  // planner | executor | analyzer
  std::string message;
  bool provider = false;  // caused by the model gateway
};

struct RunInput {
  std::string id;  // may be empty
  std::string question;
  Table table;
  Config config;
  bool analyze = true;
};

struct RunOutput {
  nlohmann::json trace;
  std::optional<Table> prepared;
  std::vector<std::string> predicted;
  std::optional<Failure> failure;
  std::vector<memory::MemoryRecord> learned;
  std::vector<llm::TranscriptEntry> transcript;
  std::size_t calls = 0;
  std::size_t input_tokens = 0;
  std::vector<std::string> provider_warnings;  // e.g. digest drift; kept out of the trace
};

// Plans, prepares and (optionally) answers one question. Never throws for
// pipeline failures; those land in RunOutput::failure and the trace.
RunOutput run_instance(const RunInput& in, llm::Provider& provider, const Assets& assets,
                       const memory::Pool* pool);

nlohmann::json table_to_json(const Table& t);
Table table_from_json(const nlohmann::json& j);

using ProviderFactory = std::function<std::unique_ptr<llm::Provider>(const Instance&)>;

struct BenchOptions {
  Config config;
  std::size_t workers = 1;
  // Called with each instance's recorded exchange, in id order.
  std::function<void(const Instance&, const std::vector<llm::TranscriptEntry>&)> on_transcript;
};

struct BenchResult {
  nlohmann::json report;
  std::vector<memory::MemoryRecord> learned;  // merged in id order
  std::vector<nlohmann::json> traces;          // in id order
};

// Every instance sees the same memory snapshot. Empty datasets are a ConfigError.
BenchResult run_benchmark(std::vector<Instance> instances, const BenchOptions& opts, const ProviderFactory& factory,
                          const Assets& assets, const memory::Pool* pool);

// Short human summary of a report.
std::string summarize_report(const nlohmann::json& report);

// Re-runs a trace from its embedded inputs and transcript.
nlohmann::json replay_trace(const nlohmann::json& trace, const Assets& assets);

// Drops volatile fields (timing) so documents can be compared byte for byte.
nlohmann::json stable_view(nlohmann::json doc);

}  // namespace tqprep::harness
