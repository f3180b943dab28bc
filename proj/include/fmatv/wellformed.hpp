#pragma once

#include <optional>
#include <set>
#include <string>

#include "fmatv/ir.hpp"

namespace fmatv {

enum class WellformednessKind { UndefinedLocal, DuplicateDest, DuplicateParam, NonEmptyPhis, UnsupportedFlags };

inline const char* to_string(WellformednessKind k) {
  switch (k) {
    case WellformednessKind::UndefinedLocal: return "UndefinedLocal";
    case WellformednessKind::DuplicateDest: return "DuplicateDest";
    case WellformednessKind::DuplicateParam: return "DuplicateParam";
    case WellformednessKind::NonEmptyPhis: return "NonEmptyPhis";
    case WellformednessKind::UnsupportedFlags: return "UnsupportedFlags";
  }
  return "?";
}

struct WellformednessError {
  WellformednessKind kind;
  std::optional<LocalId> id;
  std::string message;
};

/// Returns the first violation in source order, or nullopt.
inline std::optional<WellformednessError> check_wellformed(const FunctionDef& f) {
  using K = WellformednessKind;
  const BasicBlock& b = f.body;
  if (!b.blk_phis.empty())
    return WellformednessError{K::NonEmptyPhis, b.blk_phis.front().dest, "phi nodes are not supported"};

  std::set<LocalId> defined;
  for (const auto& p : f.params) {
    if (!defined.insert(p.id).second)
      return WellformednessError{K::DuplicateParam, p.id, "duplicate parameter " + p.id.str()};
  }
  auto check_use = [&](const Expr& e) -> std::optional<WellformednessError> {
    if (!e.is_literal() && !defined.contains(e.local_id()))
      return WellformednessError{K::UndefinedLocal, e.local_id(), "use of undefined local " + e.local_id().str()};
    return std::nullopt;
  };

  for (const auto& inst : b.blk_code) {
    if (inst.is_binop() && !inst.binop().fm_flags.empty())
      return WellformednessError{K::UnsupportedFlags, inst.dest,
                                 "fast-math flag '" + inst.binop().fm_flags.front() + "' on " + inst.dest.str()};
    for (const auto& e : inst.operands())
      if (auto err = check_use(e)) return err;
    if (!defined.insert(inst.dest).second)
      return WellformednessError{K::DuplicateDest, inst.dest, "redefinition of " + inst.dest.str()};
  }
  return check_use(b.blk_term.value);
}

}  // namespace fmatv
