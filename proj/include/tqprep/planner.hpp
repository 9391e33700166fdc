#pragma once

// Logical plan generation: Chain-of-Clauses (sketch, then one prompt per clause)
// and the single-prompt direct baseline.

#include <stdexcept>
#include <string>
#include <vector>

#include "tqprep/assets.hpp"
#include "tqprep/llm.hpp"
#include "tqprep/plan.hpp"
#include "tqprep/sql.hpp"
#include "tqprep/table.hpp"

namespace tqprep::planner {

class SketchParseFailure : public std::runtime_error {
 public:
  SketchParseFailure(const std::string& message, std::string raw)
      : std::runtime_error(message), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

struct Context {
  llm::Session& llm;
  const Assets& assets;
  std::vector<std::string>& warnings;
  double temperature = 0.01;
  std::size_t max_input_tokens = 8192;
};

// Pulls a sketch or query out of a response: fenced ```sql block, then the
// whole text, then the first line starting with SELECT.
std::vector<std::string> sql_candidates(const std::string& response);

sql::SqlQuery generate_sketch(const std::string& question, const Table& t, Context& ctx);

// tag_index numbers the clause in the transcript tag planner.clause.<i>.
std::vector<plan::LogicalOp> suggest_ops_for_clause(const sql::SketchClause& clause, const Table& t,
                                                    std::size_t tag_index, Context& ctx);

// Base columns in table order, then derived aliases. Strict mode drops UDF
// sources that nothing else reads and puts each alias in its source's place.
plan::LogicalOp derive_filter(const sql::SqlQuery& sketch, const Table& t, bool strict = false);

plan::LogicalPlan plan_coc(const std::string& question, const Table& t, Context& ctx, bool strict_filter = false);
plan::LogicalPlan plan_direct(const std::string& question, const Table& t, Context& ctx);

// Parses operation lines. Returns false when the response holds neither an
// operation nor a "None" line.
bool parse_ops_response(const std::string& response, std::vector<plan::LogicalOp>& ops,
                        std::vector<std::string>& warnings);

// Exposed for tests: keep the first of ops with equal kind, target and description.
std::vector<plan::LogicalOp> dedup_ops(const std::vector<plan::LogicalOp>& ops);

}  // namespace tqprep::planner
