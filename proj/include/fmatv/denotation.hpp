#pragma once

// Finite event-trace denotation of a basic block and its interpretation over
// global and local environments.

#include <algorithm>
#include <functional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fmatv/binary64.hpp"
#include "fmatv/ir.hpp"
#include "fmatv/value.hpp"

namespace fmatv {

// ---------------------------------------------------------------------------
// Events and traces

struct LocalWrite {
  LocalId id;
  Value v;
  friend bool operator==(const LocalWrite&, const LocalWrite&) = default;
};
struct LocalRead {
  LocalId id;
  Value v;
  friend bool operator==(const LocalRead&, const LocalRead&) = default;
};
struct IntrinsicEvent {
  GlobalId name;
  std::vector<Value> args;
  Value result;
  friend bool operator==(const IntrinsicEvent&, const IntrinsicEvent&) = default;
};
struct Tau {
  friend bool operator==(const Tau&, const Tau&) = default;
};
struct RetEvent {
  Value v;
  friend bool operator==(const RetEvent&, const RetEvent&) = default;
};

using Event = std::variant<LocalWrite, LocalRead, IntrinsicEvent, Tau, RetEvent>;

struct Trace {
  std::vector<Event> events;
  friend bool operator==(const Trace&, const Trace&) = default;
};

inline Trace strip_taus(const Trace& t) {
  Trace out;
  out.events.reserve(t.events.size());
  std::copy_if(t.events.begin(), t.events.end(), std::back_inserter(out.events),
               [](const Event& e) { return !std::holds_alternative<Tau>(e); });
  return out;
}

inline std::string render_event(const Event& e) {
  auto show = [](const Value& v) {
    if (v.is_poison()) return v.str();
    return v.str() + " (" + to_decimal(v.as_double()) + ")";
  };
  return std::visit(
      [&](const auto& ev) -> std::string {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, LocalWrite>) {
          return "LocalWrite " + ev.id.str() + " <- " + show(ev.v);
        } else if constexpr (std::is_same_v<T, LocalRead>) {
          return "LocalRead " + ev.id.str() + " -> " + show(ev.v);
        } else if constexpr (std::is_same_v<T, IntrinsicEvent>) {
          std::string s = "IntrinsicCall " + ev.name.str() + "(";
          for (std::size_t i = 0; i < ev.args.size(); ++i) s += (i ? ", " : "") + ev.args[i].str();
          return s + ") -> " + show(ev.result);
        } else if constexpr (std::is_same_v<T, Tau>) {
          return "Tau";
        } else {
          return "Ret " + show(ev.v);
        }
      },
      e);
}

/// One event per line.
inline std::string render_trace(const Trace& t) {
  std::string out;
  for (const auto& e : t.events) out += render_event(e) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Environments

/// Association list, most recent binding first.
class LocalEnv {
 public:
  using Entry = std::pair<LocalId, Value>;

  LocalEnv() = default;
  LocalEnv(std::initializer_list<Entry> entries) : entries_(entries) {}

  void prepend(LocalId id, Value v) { entries_.insert(entries_.begin(), Entry{std::move(id), std::move(v)}); }

  const Value* find(const LocalId& id) const {
    for (const auto& [k, v] : entries_)
      if (k == id) return &v;
    return nullptr;
  }

  /// Drops every binding of `id`.
  void remove(const LocalId& id) {
    std::erase_if(entries_, [&](const Entry& e) { return e.first == id; });
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  friend bool operator==(const LocalEnv&, const LocalEnv&) = default;

 private:
  std::vector<Entry> entries_;
};

inline constexpr const char* kFmulAddName = "llvm.fmuladd.f64";

struct GlobalEnv {
  std::vector<std::pair<GlobalId, Value>> entries;
  std::set<std::string> intrinsics{kFmulAddName};

  friend bool operator==(const GlobalEnv&, const GlobalEnv&) = default;
};

struct MachineState {
  GlobalEnv globals;
  LocalEnv locals;
  Value result;
};

// ---------------------------------------------------------------------------
// Errors

class EvalError : public std::runtime_error {
 public:
  enum class Kind { UndefinedLocal, IntrinsicError, UnknownIntrinsic, ArityMismatch };
  EvalError(Kind k, const std::string& msg) : std::runtime_error(msg), kind_(k) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline const char* to_string(EvalError::Kind k) {
  switch (k) {
    case EvalError::Kind::UndefinedLocal: return "UndefinedLocal";
    case EvalError::Kind::IntrinsicError: return "IntrinsicError";
    case EvalError::Kind::UnknownIntrinsic: return "UnknownIntrinsic";
    case EvalError::Kind::ArityMismatch: return "ArityMismatch";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Intrinsics

/// LLVM-level prototype of an intrinsic.
struct IntrinsicDecl {
  GlobalId name;
  DType ret;
  std::vector<DType> params;
  bool varargs = false;
};

inline const IntrinsicDecl& fmul_add_64() {
  static const IntrinsicDecl d{GlobalId(kFmulAddName), DType::Double, {DType::Double, DType::Double, DType::Double}, false};
  return d;
}

/// Semantics of llvm.fmuladd.f64: a single-rounding fused multiply-add.
/// Poison in any argument poisons the result.
inline Value llvm_fmuladd_f64(std::span<const Value> args) {
  static const std::string kMsg = "llvm_fmuladd_f64 got incorrect inputs";
  if (args.size() != 3) throw EvalError(EvalError::Kind::IntrinsicError, kMsg);
  for (const auto& a : args)
    if (a.is_poison() && a.poison_type() != DType::Double) throw EvalError(EvalError::Kind::IntrinsicError, kMsg);
  if (std::any_of(args.begin(), args.end(), [](const Value& v) { return v.is_poison(); })) return Value::poison();
  return Value::dbl(b64_fma(args[0].as_double(), args[1].as_double(), args[2].as_double()));
}

using SemanticFunction = Value (*)(std::span<const Value>);

/// Intrinsics with known semantics, or nullptr.
inline SemanticFunction lookup_intrinsic(const std::string& name) {
  if (name == kFmulAddName) return &llvm_fmuladd_f64;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Denotation

/// Evaluates an operand. LocalRef operands record a LocalRead into `events`.
inline Value eval_expr(const Expr& e, const LocalEnv& locals, std::vector<Event>* events = nullptr) {
  if (e.is_literal()) return Value::dbl(e.literal_value());
  const Value* v = locals.find(e.local_id());
  if (!v) throw EvalError(EvalError::Kind::UndefinedLocal, "undefined local " + e.local_id().str());
  if (events) events->push_back(LocalRead{e.local_id(), *v});
  return *v;
}

inline Value apply_binop(BinOp op, const Value& l, const Value& r) {
  if (l.is_poison() || r.is_poison()) return Value::poison();
  const Binary64 x = l.as_double(), y = r.as_double();
  switch (op) {
    case BinOp::FMul: return Value::dbl(b64_mul(x, y));
    case BinOp::FAdd: return Value::dbl(b64_add(x, y));
    case BinOp::FSub: return Value::dbl(b64_sub(x, y));
  }
  return Value::poison();
}

/// Runs one instruction, extending `locals` and returning the events it emits.
inline std::vector<Event> denote_instr(const Instruction& inst, LocalEnv& locals, const GlobalEnv& globals) {
  std::vector<Event> events;
  Value result;
  if (inst.is_binop()) {
    const FBinop& b = inst.binop();
    const Value l = eval_expr(b.lhs, locals, &events);
    const Value r = eval_expr(b.rhs, locals, &events);
    result = apply_binop(b.op, l, r);
  } else {
    const IntrinsicCall& c = inst.call();
    SemanticFunction fn = globals.intrinsics.contains(c.callee.name) ? lookup_intrinsic(c.callee.name) : nullptr;
    if (!fn) throw EvalError(EvalError::Kind::UnknownIntrinsic, "unknown intrinsic " + c.callee.str());
    std::vector<Value> args;
    args.reserve(c.args.size());
    for (const auto& a : c.args) args.push_back(eval_expr(a.value, locals, &events));
    result = fn(args);
    events.push_back(IntrinsicEvent{c.callee, args, result});
  }
  locals.prepend(inst.dest, result);
  events.push_back(LocalWrite{inst.dest, result});
  return events;
}

/// Interprets the function's block starting from globals `g` and locals `l`.
/// Parameters are bound in front of `l`; globals come back unchanged since
/// the subset has no global writes.
inline std::pair<MachineState, Trace> interp_cfg2(const FunctionDef& f, const GlobalEnv& g, const LocalEnv& l,
                                                  std::span<const Value> args) {
  if (args.size() != f.params.size())
    throw EvalError(EvalError::Kind::ArityMismatch, f.name.str() + " expects " + std::to_string(f.params.size()) +
                                                        " arguments, got " + std::to_string(args.size()));
  LocalEnv locals = l;
  for (std::size_t i = f.params.size(); i-- > 0;) locals.prepend(f.params[i].id, args[i]);

  Trace trace;
  const auto& code = f.body.blk_code;
  for (std::size_t i = 0; i < code.size(); ++i) {
    if (i) trace.events.push_back(Tau{});
    auto evs = denote_instr(code[i], locals, g);
    trace.events.insert(trace.events.end(), std::make_move_iterator(evs.begin()), std::make_move_iterator(evs.end()));
  }
  Value result = eval_expr(f.body.blk_term.value, locals, &trace.events);
  trace.events.push_back(RetEvent{result});
  return {MachineState{g, std::move(locals), std::move(result)}, std::move(trace)};
}

/// The block's trace with no pre-existing locals or globals.
inline Trace denote_block(const FunctionDef& f, std::span<const Value> args) {
  return interp_cfg2(f, GlobalEnv{}, LocalEnv{}, args).second;
}

}  // namespace fmatv
