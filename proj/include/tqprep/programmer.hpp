#pragma once

// Physical plan generation: choose a pool function and its arguments,
// repair it from error reports, and fill cells through the model.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tqprep/assets.hpp"
#include "tqprep/llm.hpp"
#include "tqprep/memory.hpp"
#include "tqprep/plan.hpp"
#include "tqprep/table.hpp"

namespace tqprep::programmer {

class PhysicalParseFailure : public std::runtime_error {
 public:
  PhysicalParseFailure(const std::string& message, std::string raw)
      : std::runtime_error(message), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

struct ErrorItem {
  std::string kind;
  std::string message;
  std::vector<std::pair<std::size_t, std::string>> samples;  // row index, cell text
  std::size_t count = 0;                                      // cells affected
  friend bool operator==(const ErrorItem&, const ErrorItem&) = default;
};

struct ErrorReport {
  enum class Phase { Precheck, Runtime };
  Phase phase = Phase::Runtime;
  std::vector<ErrorItem> items;
  bool empty() const { return items.empty(); }
  friend bool operator==(const ErrorReport&, const ErrorReport&) = default;
};

ErrorReport from_precheck(const plan::PrecheckReport& r);
std::string render(const ErrorReport& r);
nlohmann::json to_json(const ErrorReport& r);

struct Context {
  llm::Session& llm;
  const Assets& assets;
  const memory::Pool* memory = nullptr;  // null or empty: no demonstrations
  memory::Mode retrieval = memory::Mode::Lexical;
  std::size_t demonstrations = 2;
  double temperature = 0.01;
  std::size_t max_input_tokens = 8192;
};

// Tag stem for a step, e.g. "programmer.augment.step1".
std::string step_tag(const plan::LogicalOp& op, std::size_t step);

// Memory key for an op over the given table.
std::string memory_key(const plan::LogicalOp& op, const Table& t);

// The user prompt for generate_physical; exposed for prompt-size checks.
std::string physical_prompt(const plan::LogicalOp& op, const std::string& question, const Table& t,
                            const Context& ctx);

plan::PhysicalOp generate_physical(const plan::LogicalOp& op, const std::string& question, const Table& t,
                                   std::size_t step, Context& ctx);

plan::PhysicalOp repair(const plan::PhysicalOp& p, const ErrorReport& report, const std::string& question,
                        const Table& t, std::size_t step, int round, Context& ctx);

// The pool's infer call for an op; no model call is made here.
std::optional<plan::PhysicalOp> infer_op(const plan::LogicalOp& op, int round);

struct InferExample {
  std::map<std::string, std::string> inputs;
  std::string output;
};

struct InferResult {
  std::map<std::size_t, Value> values;  // row -> value
  std::vector<std::size_t> unmatched;
};

// One prompt with up to 8 solved examples and the failed rows; the reply has
// one "row <idx>: <value>" line per row.
InferResult infer_cells(const plan::LogicalOp& op, const std::vector<InferExample>& examples,
                        const std::map<std::size_t, std::map<std::string, std::string>>& failed_rows,
                        bool numeric_target, const std::string& tag, Context& ctx);

// Lenient cell parsing used for inferred values.
Value parse_inferred(const std::string& text, bool numeric_target);

}  // namespace tqprep::programmer
