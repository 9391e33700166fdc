#pragma once

// Runs physical operations with pre-diagnosis, execution and bounded repair.

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tqprep/memory.hpp"
#include "tqprep/plan.hpp"
#include "tqprep/programmer.hpp"
#include "tqprep/table.hpp"

namespace tqprep::exec {

// Reads a date/time in the target layout or one of the fallback layouts and
// writes it in `format`. Returns nullopt and sets error on failure.
std::optional<std::string> reformat_datetime(std::string_view input, std::string_view format, std::string& error);

// Longest key first, left to right, non-overlapping.
std::string clean_string(std::string_view s, const std::map<std::string, std::string>& dict);

// State of the column a step writes: values plus which rows are still unresolved.
struct Partial {
  std::vector<Value> values;
  std::vector<bool> failed;
  std::size_t failed_count() const;
};

using InferFn = std::function<programmer::InferResult(
    const plan::PhysicalOp&, const std::vector<programmer::InferExample>&,
    const std::map<std::size_t, std::map<std::string, std::string>>&, bool numeric_target)>;

struct ApplyResult {
  Table table;
  programmer::ErrorReport report;  // empty when every cell succeeded
  std::size_t cells_failed = 0;
  Partial partial;
};

// Caller contract: precheck(p, t) is empty. Never throws for data problems;
// rows that a prior attempt resolved are kept when this attempt fails on them.
ApplyResult apply(const plan::PhysicalOp& p, const Table& t, const Partial* prior = nullptr,
                  const InferFn* infer = nullptr);

struct Attempt {
  plan::PhysicalOp physical;
  plan::PrecheckReport precheck;
  bool executed = false;
  programmer::ErrorReport runtime;
  std::size_t cells_failed = 0;
};

struct StepRecord {
  plan::LogicalOp logical;
  std::vector<Attempt> attempts;
  bool degraded = false;
  std::string note;  // why a step degraded, when not obvious from attempts
  std::string result_digest;
};

class PlanAborted : public std::runtime_error {
 public:
  PlanAborted(std::size_t step, const std::string& message) : std::runtime_error(message), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

struct RunResult {
  Table table;
  std::vector<StepRecord> steps;
  std::vector<memory::MemoryRecord> learned;  // to be added to the pool by the caller
};

// Forward-only loop over the plan. `rounds` bounds repair calls per step.
// Throws PlanAborted when a Filter step cannot be made to work; partial
// progress is available through `progress` when given.
RunResult run_plan(const plan::LogicalPlan& plan, const std::string& question, const Table& t,
                   programmer::Context& ctx, int rounds, RunResult* progress = nullptr);

nlohmann::json to_json(const StepRecord& s);

}  // namespace tqprep::exec
