#pragma once

// Canonical `.ll` printer. Literals are always emitted as 16-digit hex bit
// patterns so that parse(print(f)) reproduces f bit for bit.

#include <sstream>
#include <string>

#include "fmatv/ir.hpp"

namespace fmatv {

inline std::string print_expr(const Expr& e) {
  return e.is_literal() ? to_hex(e.literal_value()) : e.local_id().str();
}

inline std::string print_instruction(const Instruction& inst) {
  std::ostringstream os;
  os << inst.dest.str() << " = ";
  if (inst.is_binop()) {
    const FBinop& b = inst.binop();
    os << to_string(b.op);
    for (const auto& flag : b.fm_flags) os << ' ' << flag;
    os << ' ' << to_string(b.ty) << ' ' << print_expr(b.lhs) << ", " << print_expr(b.rhs);
  } else {
    const IntrinsicCall& c = inst.call();
    if (c.tail) os << "tail ";
    os << "call " << to_string(c.ret_ty) << ' ' << c.callee.str() << '(';
    for (std::size_t i = 0; i < c.args.size(); ++i) {
      if (i) os << ", ";
      os << to_string(c.args[i].ty) << ' ' << print_expr(c.args[i].value);
    }
    os << ')';
  }
  return os.str();
}

inline std::string print_block(const FunctionDef& f) {
  std::ostringstream os;
  os << "define double " << f.name.str() << '(';
  for (std::size_t i = 0; i < f.params.size(); ++i) {
    if (i) os << ", ";
    os << to_string(f.params[i].ty) << ' ' << f.params[i].id.str();
  }
  os << ") {\n";
  const BasicBlock& b = f.body;
  if (b.blk_id != LocalId::anon(f.params.size()))
    os << (b.blk_id.is_anon() ? std::to_string(b.blk_id.index()) : b.blk_id.name()) << ":\n";
  for (const auto& inst : b.blk_code) os << "  " << print_instruction(inst) << '\n';
  os << "  ret " << to_string(b.blk_term.ty) << ' ' << print_expr(b.blk_term.value) << "\n}\n";
  return os.str();
}

inline std::string print_module(const Module& m) {
  std::ostringstream os;
  for (std::size_t i = 0; i < m.functions.size(); ++i) {
    if (i) os << '\n';
    os << print_block(m.functions[i]);
  }
  for (const auto& d : m.declarations) {
    os << "\ndeclare double " << d.str();
    os << (d.name == "llvm.fmuladd.f64" ? "(double, double, double)\n" : "(...)\n");
  }
  return os.str();
}

}  // namespace fmatv
