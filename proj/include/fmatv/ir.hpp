#pragma once

// AST for the supported LLVM IR subset: single-block functions over doubles
// with fmul/fadd/fsub and calls to double-valued intrinsics.

#include <cctype>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fmatv/binary64.hpp"

namespace fmatv {

/// A local register: `%<n>` (anonymous) or `%<name>`.
class LocalId {
 public:
  static LocalId anon(std::uint64_t index) { return LocalId(index); }
  static LocalId named(std::string name) {
    if (name.empty()) throw std::invalid_argument("LocalId: empty name");
    for (char ch : name)
      if (std::isspace(static_cast<unsigned char>(ch))) throw std::invalid_argument("LocalId: whitespace in name");
    return LocalId(std::move(name));
  }

  bool is_anon() const { return std::holds_alternative<std::uint64_t>(kind_); }
  std::uint64_t index() const { return std::get<std::uint64_t>(kind_); }
  const std::string& name() const { return std::get<std::string>(kind_); }

  /// `%4`, `%x`.
  std::string str() const { return "%" + (is_anon() ? std::to_string(index()) : name()); }

  friend bool operator==(const LocalId&, const LocalId&) = default;
  friend auto operator<=>(const LocalId&, const LocalId&) = default;

 private:
  explicit LocalId(std::uint64_t i) : kind_(i) {}
  explicit LocalId(std::string s) : kind_(std::move(s)) {}
  std::variant<std::uint64_t, std::string> kind_;
};

struct GlobalId {
  std::string name;

  GlobalId() = default;
  explicit GlobalId(std::string n) : name(std::move(n)) {
    if (name.empty()) throw std::invalid_argument("GlobalId: empty name");
  }
  std::string str() const { return "@" + name; }
  friend bool operator==(const GlobalId&, const GlobalId&) = default;
  friend auto operator<=>(const GlobalId&, const GlobalId&) = default;
};

enum class DType { Double };

inline const char* to_string(DType) { return "double"; }

struct Expr {
  std::variant<Binary64, LocalId> kind;

  static Expr literal(Binary64 v) { return Expr{v}; }
  static Expr local(LocalId id) { return Expr{std::move(id)}; }

  bool is_literal() const { return std::holds_alternative<Binary64>(kind); }
  Binary64 literal_value() const { return std::get<Binary64>(kind); }
  const LocalId& local_id() const { return std::get<LocalId>(kind); }

  friend bool operator==(const Expr&, const Expr&) = default;
};

enum class BinOp { FMul, FAdd, FSub };

inline const char* to_string(BinOp op) {
  switch (op) {
    case BinOp::FMul: return "fmul";
    case BinOp::FAdd: return "fadd";
    case BinOp::FSub: return "fsub";
  }
  return "?";
}

struct FBinop {
  BinOp op = BinOp::FAdd;
  std::vector<std::string> fm_flags;
  DType ty = DType::Double;
  Expr lhs;
  Expr rhs;
  friend bool operator==(const FBinop&, const FBinop&) = default;
};

struct CallArg {
  DType ty = DType::Double;
  Expr value;
  friend bool operator==(const CallArg&, const CallArg&) = default;
};

struct IntrinsicCall {
  GlobalId callee;
  DType ret_ty = DType::Double;
  std::vector<CallArg> args;
  bool tail = false;
  friend bool operator==(const IntrinsicCall&, const IntrinsicCall&) = default;
};

struct Instruction {
  LocalId dest = LocalId::anon(0);
  std::variant<FBinop, IntrinsicCall> body;

  bool is_binop() const { return std::holds_alternative<FBinop>(body); }
  const FBinop& binop() const { return std::get<FBinop>(body); }
  const IntrinsicCall& call() const { return std::get<IntrinsicCall>(body); }

  /// Operand expressions in source order.
  std::vector<Expr> operands() const {
    if (is_binop()) return {binop().lhs, binop().rhs};
    std::vector<Expr> out;
    for (const auto& a : call().args) out.push_back(a.value);
    return out;
  }

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct Terminator {
  DType ty = DType::Double;
  Expr value;
  friend bool operator==(const Terminator&, const Terminator&) = default;
};

// The parser never produces phis; the type exists so the well-formedness
// checker can reject hand-built blocks that carry them.
struct PhiNode {
  LocalId dest = LocalId::anon(0);
  DType ty = DType::Double;
  friend bool operator==(const PhiNode&, const PhiNode&) = default;
};

struct BasicBlock {
  LocalId blk_id = LocalId::anon(0);
  std::vector<PhiNode> blk_phis;
  std::vector<Instruction> blk_code;
  Terminator blk_term;
  std::optional<std::string> blk_comments;

  // Comments are bookkeeping only and do not survive printing.
  friend bool operator==(const BasicBlock& a, const BasicBlock& b) {
    return a.blk_id == b.blk_id && a.blk_phis == b.blk_phis && a.blk_code == b.blk_code && a.blk_term == b.blk_term;
  }
};

struct Param {
  DType ty = DType::Double;
  LocalId id = LocalId::anon(0);
  friend bool operator==(const Param&, const Param&) = default;
};

struct FunctionDef {
  GlobalId name;
  std::vector<Param> params;
  BasicBlock body;
  friend bool operator==(const FunctionDef&, const FunctionDef&) = default;
};

struct Module {
  std::vector<FunctionDef> functions;
  std::vector<GlobalId> declarations;
};

}  // namespace fmatv
