#pragma once

// Refinement between an optimized and an original block: globals equal,
// aligned locals related by a round-off bound, leftover locals equal, and
// return values related by the same bound.

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fmatv/binary64.hpp"
#include "fmatv/denotation.hpp"
#include "fmatv/error_model.hpp"
#include "fmatv/ir.hpp"
#include "fmatv/value.hpp"
#include "fmatv/wellformed.hpp"

namespace fmatv {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Alignment

/// Manual correspondence between the two blocks' locals. `value_pairs` are
/// (optimized, original) ids whose values must be related by the bound; the
/// fresh sets name the block-local writes excluded from leftover equality.
struct AlignmentSpec {
  std::vector<std::pair<LocalId, LocalId>> value_pairs;
  std::set<LocalId> fresh_optimized;
  std::set<LocalId> fresh_original;
};

inline LocalId parse_local_name(const std::string& s) {
  if (s.size() < 2 || s[0] != '%') throw ConfigError("alignment: local id must look like %N or %name, got '" + s + "'");
  const std::string body = s.substr(1);
  if (std::all_of(body.begin(), body.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    return LocalId::anon(std::stoull(body));
  try {
    return LocalId::named(body);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("alignment: ") + e.what());
  }
}

/// {"pairs": [["%4","%5"]], "fresh_optimized": ["%4"], "fresh_original": ["%4","%5"]}
inline AlignmentSpec parse_alignment(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("alignment: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("alignment: top level must be an object");
  for (const char* key : {"pairs", "fresh_optimized", "fresh_original"})
    if (!j.contains(key) || !j[key].is_array()) throw ConfigError(std::string("alignment: missing array '") + key + "'");
  AlignmentSpec a;
  for (const auto& p : j["pairs"]) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
      throw ConfigError("alignment: each pair must be [\"%opt\", \"%orig\"]");
    a.value_pairs.emplace_back(parse_local_name(p[0]), parse_local_name(p[1]));
  }
  auto read_set = [](const nlohmann::json& arr, std::set<LocalId>& out) {
    for (const auto& s : arr) {
      if (!s.is_string()) throw ConfigError("alignment: fresh sets hold strings");
      out.insert(parse_local_name(s));
    }
  };
  read_set(j["fresh_optimized"], a.fresh_optimized);
  read_set(j["fresh_original"], a.fresh_original);
  return a;
}

inline nlohmann::json to_json(const AlignmentSpec& a) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [o, g] : a.value_pairs) pairs.push_back({o.str(), g.str()});
  nlohmann::json fo = nlohmann::json::array(), fg = nlohmann::json::array();
  for (const auto& id : a.fresh_optimized) fo.push_back(id.str());
  for (const auto& id : a.fresh_original) fg.push_back(id.str());
  return {{"pairs", pairs}, {"fresh_optimized", fo}, {"fresh_original", fg}};
}

/// Paired ids must be fresh on their side, and no fresh id may be a parameter.
inline void validate_alignment(const AlignmentSpec& a, const FunctionDef& optimized, const FunctionDef& original) {
  for (const auto& [o, g] : a.value_pairs) {
    if (!a.fresh_optimized.contains(o)) throw ConfigError("alignment: " + o.str() + " is paired but not in fresh_optimized");
    if (!a.fresh_original.contains(g)) throw ConfigError("alignment: " + g.str() + " is paired but not in fresh_original");
  }
  auto disjoint = [](const std::set<LocalId>& fresh, const FunctionDef& f, const char* side) {
    for (const auto& p : f.params)
      if (fresh.contains(p.id)) throw ConfigError(std::string("alignment: ") + side + " fresh set contains parameter " + p.id.str());
  };
  disjoint(a.fresh_optimized, optimized, "optimized");
  disjoint(a.fresh_original, original, "original");
  disjoint(a.fresh_optimized, original, "optimized");
  disjoint(a.fresh_original, optimized, "original");
}

/// Pairs every instruction result with itself.
inline AlignmentSpec identity_alignment(const FunctionDef& f) {
  AlignmentSpec a;
  for (const auto& inst : f.body.blk_code) {
    a.value_pairs.emplace_back(inst.dest, inst.dest);
    a.fresh_optimized.insert(inst.dest);
    a.fresh_original.insert(inst.dest);
  }
  return a;
}

// ---------------------------------------------------------------------------
// Configuration

enum class FinitenessMode { Strict, Lenient };
enum class BoundSource { PaperFormula, DerivedBound, Both };

inline const char* to_string(FinitenessMode m) { return m == FinitenessMode::Strict ? "strict" : "lenient"; }
inline const char* to_string(BoundSource s) {
  switch (s) {
    case BoundSource::PaperFormula: return "paper";
    case BoundSource::DerivedBound: return "derived";
    case BoundSource::Both: return "both";
  }
  return "?";
}

struct RefinementConfig {
  // Lenient reads the finiteness conditions as hypotheses: a non-finite
  // operand or difference makes the value clause hold vacuously. Strict
  // requires them.
  FinitenessMode finiteness_mode = FinitenessMode::Lenient;
  BoundSource bound_source = BoundSource::Both;
  ErrorModelParams params;
};

// ---------------------------------------------------------------------------
// Value relations

/// |p1 - p2| rounded to nearest-even.
inline Binary64 observed_difference(Binary64 p1, Binary64 p2) { return b64_sub(p1, p2).abs(); }

inline bool double_refine(const Value& d1, const Value& d2, Binary64 bound, const RefinementConfig& cfg) {
  if (d1.is_poison() && d2.is_poison()) return d1.poison_type() == d2.poison_type();
  if (d1.is_double() && d2.is_double()) {
    const Binary64 p1 = d1.as_double(), p2 = d2.as_double();
    const Binary64 diff = b64_sub(p1, p2);
    const bool finite = is_finite(p1) && is_finite(p2) && is_finite(diff);
    if (!finite) return cfg.finiteness_mode == FinitenessMode::Lenient;
    return diff.abs().to_double() <= bound.to_double();
  }
  return false;
}

/// Absent on either side is a failure.
inline bool opt_double_refine(const Value* x, const Value* y, Binary64 bound, const RefinementConfig& cfg) {
  return x && y && double_refine(*x, *y, bound, cfg);
}

struct LocalRefineOutcome {
  bool holds = true;
  std::optional<std::size_t> failed_pair;  // first failing pair index
  bool leftover_mismatch = false;
  std::vector<std::string> offending_ids;
};

/// Both envs with every fresh id removed.
inline std::pair<LocalEnv, LocalEnv> leftovers(const LocalEnv& opt_env, const LocalEnv& orig_env, const AlignmentSpec& align) {
  LocalEnv a = opt_env, b = orig_env;
  for (const auto* set : {&align.fresh_optimized, &align.fresh_original})
    for (const auto& id : *set) {
      a.remove(id);
      b.remove(id);
    }
  return {std::move(a), std::move(b)};
}

/// `pair_bounds[i]` is the bound for `align.value_pairs[i]`.
inline LocalRefineOutcome local_refine_detailed(const LocalEnv& opt_env, const LocalEnv& orig_env, const AlignmentSpec& align,
                                                std::span<const Binary64> pair_bounds, const RefinementConfig& cfg) {
  LocalRefineOutcome out;
  for (std::size_t i = 0; i < align.value_pairs.size(); ++i) {
    const auto& [o, g] = align.value_pairs[i];
    if (!opt_double_refine(opt_env.find(o), orig_env.find(g), pair_bounds[i], cfg)) {
      out.holds = false;
      if (!out.failed_pair) out.failed_pair = i;
      out.offending_ids.push_back(o.str() + "~" + g.str());
    }
  }
  auto [a, b] = leftovers(opt_env, orig_env, align);
  if (a != b) {
    out.holds = false;
    out.leftover_mismatch = true;
    // Name the ids whose bindings differ.
    std::set<LocalId> ids;
    for (const auto& [k, v] : a.entries()) ids.insert(k);
    for (const auto& [k, v] : b.entries()) ids.insert(k);
    for (const auto& id : ids) {
      const Value* x = a.find(id);
      const Value* y = b.find(id);
      if (!x || !y || !(*x == *y)) out.offending_ids.push_back(id.str());
    }
    if (out.offending_ids.empty()) out.offending_ids.push_back("<binding order>");
  }
  return out;
}

inline bool local_refine(const LocalEnv& opt_env, const LocalEnv& orig_env, const AlignmentSpec& align, Binary64 bound,
                         const RefinementConfig& cfg) {
  std::vector<Binary64> bounds(align.value_pairs.size(), bound);
  return local_refine_detailed(opt_env, orig_env, align, bounds, cfg).holds;
}

// ---------------------------------------------------------------------------
// Expression recovery

class RecoverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symbolic value of every local defined in the block, params as variables.
inline std::map<LocalId, FpExpr> recover_all(const FunctionDef& f) {
  std::map<LocalId, FpExpr> defs;
  for (const auto& p : f.params) defs[p.id] = FpExpr::var(p.id.str());
  auto lift = [&](const Expr& e) -> FpExpr {
    if (e.is_literal()) return FpExpr::constant(e.literal_value());
    auto it = defs.find(e.local_id());
    if (it == defs.end()) throw RecoverError("unsupported: " + e.local_id().str() + " is not defined in the block");
    return it->second;
  };
  for (const auto& inst : f.body.blk_code) {
    if (inst.is_binop()) {
      const FBinop& b = inst.binop();
      if (!b.fm_flags.empty()) throw RecoverError("unsupported: fast-math flags on " + inst.dest.str());
      FpExpr l = lift(b.lhs), r = lift(b.rhs);
      switch (b.op) {
        case BinOp::FMul: defs[inst.dest] = FpExpr::mul(std::move(l), std::move(r)); break;
        case BinOp::FAdd: defs[inst.dest] = FpExpr::add(std::move(l), std::move(r)); break;
        case BinOp::FSub: defs[inst.dest] = FpExpr::sub(std::move(l), std::move(r)); break;
      }
    } else {
      const IntrinsicCall& c = inst.call();
      if (c.callee.name != kFmulAddName || c.args.size() != 3)
        throw RecoverError("unsupported: call to " + c.callee.str());
      defs[inst.dest] = FpExpr::fma(lift(c.args[0].value), lift(c.args[1].value), lift(c.args[2].value));
    }
  }
  return defs;
}

inline FpExpr recover_local(const FunctionDef& f, const LocalId& id) {
  auto defs = recover_all(f);
  auto it = defs.find(id);
  if (it == defs.end()) throw RecoverError("unsupported: " + id.str() + " is not defined in " + f.name.str());
  return it->second;
}

/// The returned value as an expression over the parameters.
inline FpExpr recover_expr(const FunctionDef& f) {
  const Expr& ret = f.body.blk_term.value;
  if (ret.is_literal()) return FpExpr::constant(ret.literal_value());
  return recover_local(f, ret.local_id());
}

/// Leaves (x, y, z) when one tree is x*y + z (either operand order of the
/// add) and the other is fma(x, y, z) over the same leaves.
inline std::optional<std::array<FpExpr, 3>> match_fma_pair(const FpExpr& original, const FpExpr& optimized) {
  using Op = FpExpr::Op;
  auto leaf = [](const FpExpr& e) { return e.op == Op::Var || e.op == Op::Const; };
  auto as_mul_add = [&](const FpExpr& e) -> std::optional<std::array<FpExpr, 3>> {
    if (e.op != Op::Add) return std::nullopt;
    for (int k = 0; k < 2; ++k) {
      const FpExpr& m = e.operands[k];
      const FpExpr& z = e.operands[1 - k];
      if (m.op == Op::Mul && leaf(m.operands[0]) && leaf(m.operands[1]) && leaf(z))
        return std::array<FpExpr, 3>{m.operands[0], m.operands[1], z};
    }
    return std::nullopt;
  };
  auto as_fma = [&](const FpExpr& e) -> std::optional<std::array<FpExpr, 3>> {
    if (e.op != Op::Fma || !leaf(e.operands[0]) || !leaf(e.operands[1]) || !leaf(e.operands[2])) return std::nullopt;
    return std::array<FpExpr, 3>{e.operands[0], e.operands[1], e.operands[2]};
  };
  for (int swap = 0; swap < 2; ++swap) {
    const FpExpr& x = swap ? optimized : original;
    const FpExpr& y = swap ? original : optimized;
    auto ma = as_mul_add(x);
    auto fm = as_fma(y);
    if (ma && fm && *ma == *fm) return ma;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Verdicts

enum class VerdictStatus { Pass, Fail, Unsupported };
enum class FailedClause { None, Globals, Locals, Return, Evaluation };

inline const char* to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Pass: return "pass";
    case VerdictStatus::Fail: return "fail";
    case VerdictStatus::Unsupported: return "unsupported";
  }
  return "?";
}
inline const char* to_string(FailedClause c) {
  switch (c) {
    case FailedClause::None: return "none";
    case FailedClause::Globals: return "globals";
    case FailedClause::Locals: return "locals";
    case FailedClause::Return: return "return";
    case FailedClause::Evaluation: return "evaluation";
  }
  return "?";
}

/// Bounds computed for one compared pair of values.
struct PairBounds {
  Binary64 used = kPositiveZero;
  std::optional<Binary64> paper;
  std::optional<Binary64> derived;
};

struct Verdict {
  VerdictStatus status = VerdictStatus::Pass;
  FailedClause clause = FailedClause::None;
  std::vector<std::string> offending_ids;
  std::string message;
  std::vector<Value> inputs;
  std::optional<Value> optimized_result;
  std::optional<Value> original_result;
  std::optional<Binary64> observed_diff;  // |p1 - p2| on the return values when finite
  std::optional<PairBounds> return_bounds;
  bool poison_branch = false;
  // The derived bound relates every compared pair but the closed-form FMA
  // bound does not.
  bool paper_discrepancy = false;
};

inline nlohmann::json value_json(const Value& v) {
  if (v.is_poison()) return {{"kind", "poison"}, {"type", to_string(v.poison_type())}};
  return {{"hex", to_hex(v.as_double())}, {"decimal", to_decimal(v.as_double())}};
}
inline nlohmann::json binary64_json(Binary64 b) { return {{"hex", to_hex(b)}, {"decimal", to_decimal(b)}}; }

inline nlohmann::json to_json(const Verdict& v) {
  nlohmann::json j;
  j["status"] = to_string(v.status);
  j["failed_clause"] = to_string(v.clause);
  j["offending_ids"] = v.offending_ids;
  if (!v.message.empty()) j["message"] = v.message;
  auto& in = j["inputs"] = nlohmann::json::array();
  for (const auto& x : v.inputs) in.push_back(value_json(x));
  if (v.optimized_result) j["optimized_result"] = value_json(*v.optimized_result);
  if (v.original_result) j["original_result"] = value_json(*v.original_result);
  j["observed_diff"] = v.observed_diff ? binary64_json(*v.observed_diff) : nlohmann::json(nullptr);
  if (v.return_bounds) {
    j["bound_used"] = binary64_json(v.return_bounds->used);
    j["bound_paper"] = v.return_bounds->paper ? binary64_json(*v.return_bounds->paper) : nlohmann::json(nullptr);
    j["bound_derived"] = v.return_bounds->derived ? binary64_json(*v.return_bounds->derived) : nlohmann::json(nullptr);
  }
  j["poison_branch"] = v.poison_branch;
  j["paper_discrepancy"] = v.paper_discrepancy;
  return j;
}

// ---------------------------------------------------------------------------
// Equivalence check

/// Checks refinement between two fixed blocks for many inputs. Expression
/// recovery and shape matching happen once, at construction.
class EquivChecker {
 public:
  EquivChecker(FunctionDef optimized, FunctionDef original, AlignmentSpec align, RefinementConfig cfg)
      : opt_(std::move(optimized)), orig_(std::move(original)), align_(std::move(align)), cfg_(cfg) {
    for (const auto* f : {&opt_, &orig_}) {
      if (auto err = check_wellformed(*f)) {
        unsupported_ = f->name.str() + ": " + std::string(to_string(err->kind)) + ": " + err->message;
        return;
      }
    }
    if (opt_.params != orig_.params) {
      unsupported_ = "parameter lists differ";
      return;
    }
    for (std::size_t i = 0; i < opt_.params.size(); ++i) param_index_.emplace_back(opt_.params[i].id.str(), i);

    std::optional<std::map<LocalId, FpExpr>> opt_defs, orig_defs;
    try {
      opt_defs = recover_all(opt_);
    } catch (const RecoverError& e) {
      recover_problem_ = opt_.name.str() + ": " + e.what();
    }
    try {
      orig_defs = recover_all(orig_);
    } catch (const RecoverError& e) {
      recover_problem_ = orig_.name.str() + ": " + e.what();
    }
    auto expr_of = [](const std::optional<std::map<LocalId, FpExpr>>& defs, const Expr& e) -> std::optional<FpExpr> {
      if (e.is_literal()) return FpExpr::constant(e.literal_value());
      if (!defs) return std::nullopt;
      auto it = defs->find(e.local_id());
      if (it == defs->end()) return std::nullopt;
      return it->second;
    };
    for (const auto& [o, g] : align_.value_pairs)
      plans_.push_back(make_plan(expr_of(opt_defs, Expr::local(o)), expr_of(orig_defs, Expr::local(g))));
    ret_plan_ = make_plan(expr_of(opt_defs, opt_.body.blk_term.value), expr_of(orig_defs, orig_.body.blk_term.value));
  }

  const std::optional<std::string>& unsupported_reason() const { return unsupported_; }
  const FunctionDef& optimized() const { return opt_; }
  const FunctionDef& original() const { return orig_; }
  const RefinementConfig& config() const { return cfg_; }

  Verdict check(const GlobalEnv& g, const LocalEnv& l, std::span<const Value> args) const {
    Verdict v;
    v.inputs.assign(args.begin(), args.end());
    if (unsupported_) {
      v.status = VerdictStatus::Unsupported;
      v.message = *unsupported_;
      return v;
    }

    std::optional<std::pair<MachineState, Trace>> run_opt, run_orig;
    try {
      run_opt = interp_cfg2(opt_, g, l, args);
    } catch (const EvalError& e) {
      return eval_failure(std::move(v), "optimized", e);
    }
    try {
      run_orig = interp_cfg2(orig_, g, l, args);
    } catch (const EvalError& e) {
      return eval_failure(std::move(v), "original", e);
    }
    const MachineState& s1 = run_opt->first;
    const MachineState& s2 = run_orig->first;
    v.optimized_result = s1.result;
    v.original_result = s2.result;

    bool unsupported_bound = false;
    auto bounds_for = [&](const PairPlan& plan, const Value& a, const Value& b) -> PairBounds {
      PairBounds pb;
      if (!(a.is_double() && b.is_double())) return pb;
      if (cfg_.bound_source != BoundSource::DerivedBound && plan.fma_leaves) pb.paper = closed_form_bound(*plan.fma_leaves, args);
      if (cfg_.bound_source != BoundSource::PaperFormula) pb.derived = derived_bound(plan, args);
      const std::optional<Binary64>& chosen = cfg_.bound_source == BoundSource::PaperFormula ? pb.paper : pb.derived;
      if (!chosen) unsupported_bound = true;
      else pb.used = *chosen;
      return pb;
    };
    auto discrepancy = [&](const PairBounds& pb, const Value& a, const Value& b) {
      return cfg_.bound_source == BoundSource::Both && pb.paper && pb.derived && double_refine(a, b, *pb.derived, cfg_) &&
             !double_refine(a, b, *pb.paper, cfg_);
    };

    // Aligned locals.
    std::vector<Binary64> pair_bounds;
    pair_bounds.reserve(plans_.size());
    for (std::size_t i = 0; i < plans_.size(); ++i) {
      const Value* a = s1.locals.find(align_.value_pairs[i].first);
      const Value* b = s2.locals.find(align_.value_pairs[i].second);
      PairBounds pb = a && b ? bounds_for(plans_[i], *a, *b) : PairBounds{};
      if (a && b && discrepancy(pb, *a, *b)) v.paper_discrepancy = true;
      pair_bounds.push_back(pb.used);
    }

    // Return values.
    PairBounds rb = bounds_for(ret_plan_, s1.result, s2.result);
    if (unsupported_bound) {
      v.status = VerdictStatus::Unsupported;
      v.message = cfg_.bound_source == BoundSource::PaperFormula
                      ? "closed-form FMA bound needs an x*y+z / fma(x,y,z) pair"
                      : "cannot derive a bound: " + recover_problem_;
      return v;
    }
    if (s1.result.is_double() && s2.result.is_double()) {
      const Binary64 p1 = s1.result.as_double(), p2 = s2.result.as_double();
      const Binary64 d = b64_sub(p1, p2);
      if (is_finite(p1) && is_finite(p2) && is_finite(d)) v.observed_diff = d.abs();
      if (discrepancy(rb, s1.result, s2.result)) v.paper_discrepancy = true;
      v.return_bounds = rb;
    }
    v.poison_branch = s1.result.is_poison() && s2.result.is_poison();

    if (!(s1.globals == s2.globals)) return fail(std::move(v), FailedClause::Globals, {"<globals>"}, "global environments differ");

    auto lr = local_refine_detailed(s1.locals, s2.locals, align_, pair_bounds, cfg_);
    if (!lr.holds) {
      return fail(std::move(v), FailedClause::Locals, lr.offending_ids,
                  lr.leftover_mismatch && !lr.failed_pair ? "unaligned locals differ" : "aligned locals not related");
    }

    bool ret_ok = false;
    if (s1.result.is_double() && s2.result.is_double()) ret_ok = double_refine(s1.result, s2.result, rb.used, cfg_);
    else if (s1.result.is_poison() && s2.result.is_poison()) ret_ok = s1.result.poison_type() == s2.result.poison_type();
    if (!ret_ok) return fail(std::move(v), FailedClause::Return, {"<ret>"}, "return values not related");
    return v;
  }

 private:
  struct PairPlan {
    std::optional<FpExpr> opt_expr;
    std::optional<FpExpr> orig_expr;
    bool same_vars = true;
    std::optional<std::array<FpExpr, 3>> fma_leaves;
  };

  static PairPlan make_plan(std::optional<FpExpr> opt_expr, std::optional<FpExpr> orig_expr) {
    PairPlan p;
    if (opt_expr && orig_expr) {
      std::set<std::string> a, b;
      opt_expr->collect_vars(a);
      orig_expr->collect_vars(b);
      p.same_vars = a == b;
      p.fma_leaves = match_fma_pair(*orig_expr, *opt_expr);
    }
    p.opt_expr = std::move(opt_expr);
    p.orig_expr = std::move(orig_expr);
    return p;
  }

  double magnitude(const std::string& name, std::span<const Value> args) const {
    for (const auto& [n, i] : param_index_)
      if (n == name) return args[i].is_double() ? std::fabs(args[i].as_double().to_double()) : upward::kInf;
    return upward::kInf;
  }

  double leaf_magnitude(const FpExpr& e, std::span<const Value> args) const {
    return e.op == FpExpr::Op::Const ? std::fabs(e.value.to_double()) : magnitude(e.name, args);
  }

  Binary64 closed_form_bound(const std::array<FpExpr, 3>& leaves, std::span<const Value> args) const {
    const double b = epsilon_fma_paper(leaf_magnitude(leaves[0], args), leaf_magnitude(leaves[1], args),
                                       leaf_magnitude(leaves[2], args), cfg_.params);
    return std::isnan(b) ? kPositiveInf : b64(b);
  }

  std::optional<Binary64> derived_bound(const PairPlan& plan, std::span<const Value> args) const {
    if (!plan.opt_expr || !plan.orig_expr) return std::nullopt;
    // Trees over different inputs are not the same real function; no
    // round-off budget applies and the values must agree exactly.
    if (!plan.same_vars) return kPositiveZero;
    auto lookup = [&](const std::string& n) { return magnitude(n, args); };
    return eval_bound(detail::derive_bound_with(*plan.orig_expr, *plan.opt_expr, lookup, cfg_.params, false));
  }

  static Verdict fail(Verdict v, FailedClause c, std::vector<std::string> ids, std::string msg) {
    v.status = VerdictStatus::Fail;
    v.clause = c;
    v.offending_ids = std::move(ids);
    v.message = std::move(msg);
    return v;
  }

  static Verdict eval_failure(Verdict v, const char* side, const EvalError& e) {
    return fail(std::move(v), FailedClause::Evaluation, {side},
                std::string(side) + " block failed: " + to_string(e.kind()) + ": " + e.what());
  }

  FunctionDef opt_;
  FunctionDef orig_;
  AlignmentSpec align_;
  RefinementConfig cfg_;
  std::optional<std::string> unsupported_;
  std::string recover_problem_;
  std::vector<std::pair<std::string, std::size_t>> param_index_;
  std::vector<PairPlan> plans_;
  PairPlan ret_plan_;
};

/// Single-input refinement check between an optimized and an original block.
inline Verdict check_equiv(const FunctionDef& f_opt, const FunctionDef& f_orig, const GlobalEnv& g, const LocalEnv& l,
                           std::span<const Value> args, const AlignmentSpec& align, const RefinementConfig& cfg = {}) {
  return EquivChecker(f_opt, f_orig, align, cfg).check(g, l, args);
}

}  // namespace fmatv
