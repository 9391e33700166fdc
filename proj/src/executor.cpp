#include "tqprep/executor.hpp"

#include <algorithm>
#include <set>

#include "tqprep/digest.hpp"

namespace tqprep::exec {

using nlohmann::json;
using plan::LogicalOp;
using plan::OpKind;
using plan::PhysicalOp;
using programmer::ErrorItem;
using programmer::ErrorReport;

std::size_t Partial::failed_count() const { return static_cast<std::size_t>(std::count(failed.begin(), failed.end(), true)); }

namespace {

struct CellFailure {
  std::size_t row;
  std::string kind;
  std::string message;
  std::string sample;
};

// Groups failures by kind and message, first occurrence first, five samples each.
ErrorReport summarize(const std::vector<CellFailure>& failures) {
  ErrorReport rep;
  rep.phase = ErrorReport::Phase::Runtime;
  for (const auto& f : failures) {
    auto it = std::find_if(rep.items.begin(), rep.items.end(),
                           [&](const ErrorItem& i) { return i.kind == f.kind && i.message == f.message; });
    if (it == rep.items.end()) {
      rep.items.push_back({f.kind, f.message, {}, 0});
      it = rep.items.end() - 1;
    }
    ++it->count;
    if (it->samples.size() < 5) it->samples.emplace_back(f.row, f.sample);
  }
  return rep;
}

std::map<std::string, Value> row_map(const Table& t, const std::set<std::string>& keys, std::size_t r) {
  std::map<std::string, Value> m;
  for (const auto& k : keys) m.emplace(k, t.column(k)[r]);
  return m;
}

std::string row_sample(const std::map<std::string, Value>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = v.to_text();
  return j.dump();
}

bool want_result(const std::string& fn, const Value& v, std::string& message) {
  if (fn == "to_numerical" && !v.is_numeric()) {
    message = std::string("to_numerical produced a ") + kind_name(v.kind()) + " instead of a number";
    return false;
  }
  if (fn == "map_to_boolean" && !v.is_bool()) {
    message = std::string("map_to_boolean produced a ") + kind_name(v.kind()) + " instead of True/False";
    return false;
  }
  if (fn == "concatenate" && !v.is_str()) {
    message = std::string("concatenate produced a ") + kind_name(v.kind()) + " instead of a string";
    return false;
  }
  return true;
}

}  // namespace

ApplyResult apply(const PhysicalOp& p, const Table& t, const Partial* prior, const InferFn* infer) {
  const LogicalOp& op = p.implements;
  const std::size_t n = t.row_count();
  ApplyResult out;

  if (p.function == "filter_columns") {
    out.table = keep_columns(t, p.list_arg("rel_columns"));
    return out;
  }

  const bool augment = op.kind == OpKind::Augment;
  Partial cur;
  cur.failed.assign(n, false);
  if (augment) {
    cur.values.assign(n, Value::null());
  } else {
    cur.values = t.column(op.column);
  }
  std::vector<CellFailure> failures;
  auto fail = [&](std::size_t r, std::string kind, std::string msg, std::string sample) {
    cur.failed[r] = true;
    failures.push_back({r, std::move(kind), std::move(msg), std::move(sample)});
  };

  const std::string& fn = p.function;
  if (fn == "extract" || fn == "to_numerical") {
    auto e = p.transform("func");
    const auto& col = t.column(p.str_arg("column"));
    for (std::size_t r = 0; r < n; ++r) {
      const Value& in = col[r];
      // Already-numeric cells and Nulls need no conversion.
      if (fn == "to_numerical" && (in.is_null() || in.is_numeric())) continue;
      try {
        Value v = e.mode == texpr::Mode::Row ? texpr::eval_row(e, {}) : texpr::eval_scalar(e, in);
        std::string msg;
        if (!want_result(fn, v, msg)) {
          fail(r, "ResultTypeError", msg, in.to_text());
          continue;
        }
        cur.values[r] = std::move(v);
      } catch (const texpr::EvalError& err) {
        fail(r, "EvalError", err.what(), in.to_text());
      }
    }
  } else if (fn == "calculate" || fn == "map_to_boolean" || fn == "concatenate") {
    auto e = p.transform("func");
    auto keys = texpr::referenced_keys(e);
    for (std::size_t r = 0; r < n; ++r) {
      auto row = row_map(t, keys, r);
      try {
        Value v = texpr::eval_row(e, row);
        std::string msg;
        if (!want_result(fn, v, msg)) {
          fail(r, "ResultTypeError", msg, row_sample(row));
          continue;
        }
        cur.values[r] = std::move(v);
      } catch (const texpr::EvalError& err) {
        fail(r, "EvalError", err.what(), row_sample(row));
      }
    }
  } else if (fn == "format_datetime") {
    std::string fmt = p.str_arg("format");
    for (std::size_t r = 0; r < n; ++r) {
      const Value& in = cur.values[r];
      if (in.is_null()) continue;
      std::string err;
      if (auto s = reformat_datetime(in.to_text(), fmt, err)) {
        cur.values[r] = Value::str(*s);
      } else {
        fail(r, "FormatError", err + " (target format " + fmt + ")", in.to_text());
      }
    }
  } else if (fn == "clean_string") {
    auto dict = p.args.at("trans_dict").get<std::map<std::string, std::string>>();
    for (std::size_t r = 0; r < n; ++r) {
      if (cur.values[r].is_str()) cur.values[r] = Value::str(clean_string(cur.values[r].as_str(), dict));
    }
  } else if (fn == "infer") {
    if (!infer) throw std::logic_error("infer requested without a model callback");
    std::vector<std::string> inputs = augment ? p.list_arg("source_columns") : std::vector<std::string>{op.column};
    auto input_map = [&](std::size_t r) {
      std::map<std::string, std::string> m;
      for (const auto& c : inputs) m[c] = t.column(c)[r].to_text();
      return m;
    };
    std::vector<programmer::InferExample> examples;
    std::map<std::size_t, std::map<std::string, std::string>> todo;
    bool numeric = true;
    for (std::size_t r = 0; r < n; ++r) {
      bool unresolved = prior ? prior->failed[r] : true;
      if (unresolved) {
        todo[r] = input_map(r);
      } else if (examples.size() < 8) {
        examples.push_back({input_map(r), prior->values[r].to_text()});
        if (!prior->values[r].is_numeric()) numeric = false;
      }
    }
    if (prior) cur.values = prior->values;
    if (!todo.empty()) {
      auto res = (*infer)(p, examples, todo, numeric);
      for (const auto& [r, v] : res.values) cur.values[r] = v;
      for (auto r : res.unmatched) {
        std::string sample = json(todo[r]).dump();
        fail(r, "InferParseFailure", "the model gave no value for this row", sample);
        if (!augment) cur.values[r] = t.column(op.column)[r];
      }
    }
  } else {
    throw std::logic_error("apply called with unknown function " + fn);
  }

  // Keep cells an earlier attempt already resolved.
  if (prior && fn != "infer") {
    std::vector<CellFailure> still;
    for (const auto& f : failures) {
      if (!prior->failed[f.row]) {
        cur.values[f.row] = prior->values[f.row];
        cur.failed[f.row] = false;
      } else {
        still.push_back(f);
      }
    }
    failures = std::move(still);
  }

  out.report = summarize(failures);
  out.cells_failed = cur.failed_count();
  out.table = augment ? add_column(t, op.new_column, cur.values) : t.with_column(op.column, cur.values);
  out.partial = std::move(cur);
  return out;
}

namespace {

InferFn make_infer(programmer::Context& ctx, std::size_t step, int round) {
  return [&ctx, step, round](const PhysicalOp& p, const std::vector<programmer::InferExample>& examples,
                             const std::map<std::size_t, std::map<std::string, std::string>>& rows, bool numeric) {
    std::string tag = programmer::step_tag(p.implements, step) + ".infer" + std::to_string(round);
    return programmer::infer_cells(p.implements, examples, rows, numeric, tag, ctx);
  };
}

}  // namespace

RunResult run_plan(const plan::LogicalPlan& lp, const std::string& question, const Table& input,
                   programmer::Context& ctx, int rounds, RunResult* progress) {
  if (rounds < 0) throw std::invalid_argument("rounds must be >= 0");
  RunResult res;
  res.table = input;
  auto publish = [&] {
    if (progress) *progress = res;
  };

  for (std::size_t i = 0; i < lp.ops.size(); ++i) {
    const LogicalOp& op = lp.ops[i];
    const std::size_t step = i + 1;
    const Table& ti = res.table;
    StepRecord rec;
    rec.logical = op;

    std::optional<Partial> best;
    std::optional<Table> best_table;
    int runtime_failures = 0;
    std::optional<PhysicalOp> p;
    try {
      p = programmer::generate_physical(op, question, ti, step, ctx);
    } catch (const programmer::PhysicalParseFailure& e) {
      rec.note = e.what();
    }

    for (int round = 0; p; ++round) {
      Attempt a;
      a.physical = *p;
      a.precheck = plan::precheck(*p, ti);
      ErrorReport feedback;
      if (!a.precheck.ok()) {
        feedback = programmer::from_precheck(a.precheck);
        runtime_failures = 0;
      } else {
        InferFn infer = make_infer(ctx, step, round);
        ApplyResult r = apply(*p, ti, best ? &*best : nullptr, &infer);
        a.executed = true;
        a.runtime = r.report;
        a.cells_failed = r.cells_failed;
        best_table = std::move(r.table);
        if (op.kind != OpKind::Filter) best = std::move(r.partial);
        feedback = a.runtime;
        if (a.cells_failed == 0) {
          rec.attempts.push_back(std::move(a));
          break;
        }
        ++runtime_failures;
      }
      rec.attempts.push_back(std::move(a));
      if (round >= rounds) break;

      auto escalated = runtime_failures >= 2 ? programmer::infer_op(op, round + 1) : std::nullopt;
      if (escalated) {
        p = std::move(escalated);
        continue;
      }
      try {
        p = programmer::repair(*p, feedback, question, ti, step, round + 1, ctx);
      } catch (const programmer::PhysicalParseFailure& e) {
        rec.note = e.what();
        p.reset();
      }
    }

    bool clean = !rec.attempts.empty() && rec.attempts.back().executed && rec.attempts.back().cells_failed == 0;
    rec.degraded = !clean;
    if (op.kind == OpKind::Filter && !clean) {
      rec.result_digest = table_digest(res.table);
      res.steps.push_back(std::move(rec));
      publish();
      throw PlanAborted(step, "Filter step " + std::to_string(step) + " could not be executed");
    }
    // A step that never executed, or failed on every row, leaves the table as it was.
    bool wholly_failed = best && ti.row_count() > 0 && best->failed_count() == ti.row_count();
    if (best_table && !wholly_failed) res.table = std::move(*best_table);
    if (clean && op.kind != OpKind::Filter && !rec.attempts.back().physical.provenance.inferred) {
      const auto& last = rec.attempts.back().physical;
      res.learned.push_back({programmer::memory_key(op, ti), plan::encode(last),
                             rec.attempts.size() == 1 ? memory::Outcome::Succeeded : memory::Outcome::Repaired, 0});
    }
    rec.result_digest = table_digest(res.table);
    res.steps.push_back(std::move(rec));
    publish();
  }
  return res;
}

json to_json(const StepRecord& s) {
  json attempts = json::array();
  for (const auto& a : s.attempts) {
    json issues = json::array();
    for (const auto& i : a.precheck.issues) {
      issues.push_back({{"kind", plan::issue_kind_name(i.kind)}, {"arg", i.arg}, {"message", i.message}});
    }
    json j{{"physical", plan::to_json(a.physical)}, {"precheck", issues}, {"executed", a.executed}};
    if (a.executed) {
      j["runtime"] = programmer::to_json(a.runtime);
      j["cells_failed"] = a.cells_failed;
    }
    attempts.push_back(std::move(j));
  }
  json j{{"logical", plan::to_json(s.logical)},
         {"attempts", attempts},
         {"degraded", s.degraded},
         {"result_digest", s.result_digest}};
  if (!s.note.empty()) j["note"] = s.note;
  return j;
}

}  // namespace tqprep::exec
