#include <gtest/gtest.h>

#include <random>
#include <string>

#include "fmatv/denotation.hpp"
#include "fmatv/parser.hpp"
#include "fmatv/printer.hpp"
#include "fmatv/wellformed.hpp"
#include "support/fixtures.hpp"

using namespace fmatv;

namespace {

Expr L(std::uint64_t n) { return Expr::local(LocalId::anon(n)); }

}  // namespace

TEST(Parser, FmaBlockStructure) {
  Module m = parse_module(fixtures::kFmaText);
  ASSERT_EQ(m.functions.size(), 1u);
  const FunctionDef& f = m.functions[0];
  EXPECT_EQ(f.name.name, "f1");
  ASSERT_EQ(f.params.size(), 3u);
  for (std::uint64_t i = 0; i < 3; ++i) EXPECT_EQ(f.params[i].id, LocalId::anon(i));
  EXPECT_EQ(f.body.blk_id, LocalId::anon(3));
  EXPECT_TRUE(f.body.blk_phis.empty());
  ASSERT_EQ(f.body.blk_code.size(), 1u);

  const Instruction& inst = f.body.blk_code[0];
  EXPECT_EQ(inst.dest, LocalId::anon(4));
  ASSERT_FALSE(inst.is_binop());
  const IntrinsicCall& c = inst.call();
  EXPECT_EQ(c.callee.name, "llvm.fmuladd.f64");
  EXPECT_TRUE(c.tail);
  EXPECT_EQ(c.ret_ty, DType::Double);
  ASSERT_EQ(c.args.size(), 3u);
  for (std::uint64_t i = 0; i < 3; ++i) {
    EXPECT_EQ(c.args[i].ty, DType::Double);
    EXPECT_EQ(c.args[i].value, L(i));
  }
  EXPECT_EQ(f.body.blk_term.value, L(4));
  ASSERT_EQ(m.declarations.size(), 1u);
  EXPECT_EQ(m.declarations[0].name, "llvm.fmuladd.f64");
}

TEST(Parser, NonFmaBlockStructure) {
  const FunctionDef f = fixtures::nonfma_block();
  ASSERT_EQ(f.body.blk_code.size(), 2u);
  const Instruction& mul = f.body.blk_code[0];
  const Instruction& add = f.body.blk_code[1];
  EXPECT_EQ(mul.dest, LocalId::anon(4));
  ASSERT_TRUE(mul.is_binop());
  EXPECT_EQ(mul.binop().op, BinOp::FMul);
  EXPECT_EQ(mul.binop().lhs, L(0));
  EXPECT_EQ(mul.binop().rhs, L(1));
  EXPECT_TRUE(mul.binop().fm_flags.empty());
  EXPECT_EQ(add.dest, LocalId::anon(5));
  ASSERT_TRUE(add.is_binop());
  EXPECT_EQ(add.binop().op, BinOp::FAdd);
  EXPECT_EQ(add.binop().lhs, L(4));
  EXPECT_EQ(add.binop().rhs, L(2));
  EXPECT_EQ(f.body.blk_term.value, L(5));
}

TEST(Parser, MinimalBlock) {
  const FunctionDef f = fixtures::parse_one("define double @f() { ret double 0.0 }");
  EXPECT_TRUE(f.params.empty());
  EXPECT_TRUE(f.body.blk_code.empty());
  ASSERT_TRUE(f.body.blk_term.value.is_literal());
  EXPECT_EQ(f.body.blk_term.value.literal_value(), kPositiveZero);
}

TEST(Parser, LiteralForms) {
  const FunctionDef f = fixtures::parse_one(R"(define double @g(double %x) {
entry:
  %a = fmul double %x, 0x3FF8000000000000
  %b = fadd double %a, -2.5e-3
  %c = fsub double %b, 1.0
  ret double %c
})");
  EXPECT_EQ(f.params[0].id, LocalId::named("x"));
  EXPECT_EQ(f.body.blk_id, LocalId::named("entry"));
  EXPECT_EQ(f.body.blk_code[0].binop().rhs.literal_value(), b64(1.5));
  EXPECT_EQ(f.body.blk_code[1].binop().rhs.literal_value(), b64(-2.5e-3));
  EXPECT_EQ(f.body.blk_code[2].binop().op, BinOp::FSub);
}

TEST(Parser, FastMathFlagsAreKept) {
  std::string text = fixtures::kNonFmaText;
  text.replace(text.find("fadd double"), 11, "fadd fast double");
  const FunctionDef f = fixtures::parse_one(text);
  EXPECT_EQ(f.body.blk_code[1].binop().fm_flags, std::vector<std::string>{"fast"});
}

TEST(Parser, Rejections) {
  auto fails_with = [](const std::string& text, const std::string& needle) {
    try {
      parse_module(text);
    } catch (const ParseError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  EXPECT_TRUE(fails_with("define double @f(double %0) {\n  br label %2\n2:\n  ret double %0\n}", "unsupported: control flow"));
  EXPECT_TRUE(fails_with("define double @f(double %0) {\n  ret double %0\n2:\n  ret double %0\n}", "unsupported: control flow"));
  EXPECT_TRUE(fails_with("define double @f(double %0) {\n  %2 = phi double [ %0, %1 ]\n  ret double %2\n}", "phi"));
  EXPECT_TRUE(fails_with("define float @f(float %0) {\n  ret float %0\n}", "unsupported type"));
  EXPECT_TRUE(fails_with("define double @f(double %0) {\n  %2 = fadd double %0, 0x3FF0\n  ret double %2\n}", "16 digits"));
  EXPECT_TRUE(fails_with("define double @f(double %0) {\n  %2 = fdiv double %0, %0\n  ret double %2\n}",
                         "unsupported instruction"));
  EXPECT_TRUE(fails_with("define double @f(double %0) {\n  %2 = fadd double %0, %0\n", "terminator"));
  EXPECT_TRUE(fails_with(
      "define double @f(double %0) {\n  %2 = call fast double @llvm.fmuladd.f64(double %0, double %0, double %0)\n  ret "
      "double %2\n}",
      "fast-math flags on call"));
}

TEST(Parser, ErrorCarriesPosition) {
  try {
    parse_module("define double @f() {\n  ret i32 0\n}");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 7);
  }
}

TEST(Printer, Literals) {
  EXPECT_EQ(print_expr(Expr::literal(kPositiveZero)), "0x0000000000000000");
  EXPECT_EQ(print_expr(Expr::literal(b64(1.0))), "0x3FF0000000000000");
  EXPECT_EQ(print_expr(Expr::literal(kNegativeZero)), "0x8000000000000000");
}

TEST(Printer, RoundTripSamplePair) {
  for (const auto* text : {&fixtures::kFmaText, &fixtures::kNonFmaText}) {
    const Module m = parse_module(*text);
    const Module again = parse_module(print_module(m));
    ASSERT_EQ(again.functions.size(), m.functions.size());
    EXPECT_EQ(again.functions[0], m.functions[0]);
    EXPECT_EQ(again.declarations, m.declarations);
    EXPECT_EQ(print_module(again), print_module(m));
  }
}

TEST(Printer, CanonicalFmaText) {
  EXPECT_EQ(print_block(fixtures::fma_block()),
            "define double @f1(double %0, double %1, double %2) {\n"
            "  %4 = tail call double @llvm.fmuladd.f64(double %0, double %1, double %2)\n"
            "  ret double %4\n}\n");
}

TEST(Wellformed, SampleBlocksAccepted) {
  EXPECT_FALSE(check_wellformed(fixtures::fma_block()));
  EXPECT_FALSE(check_wellformed(fixtures::nonfma_block()));
}

TEST(Wellformed, UndefinedLocal) {
  std::string text = fixtures::kNonFmaText;
  text.replace(text.find("fadd double %4"), 14, "fadd double %9");
  auto err = check_wellformed(fixtures::parse_one(text));
  ASSERT_TRUE(err);
  EXPECT_EQ(err->kind, WellformednessKind::UndefinedLocal);
  EXPECT_EQ(err->id, LocalId::anon(9));
}

TEST(Wellformed, FastFlagRejected) {
  std::string text = fixtures::kNonFmaText;
  text.replace(text.find("fadd double"), 11, "fadd fast double");
  auto err = check_wellformed(fixtures::parse_one(text));
  ASSERT_TRUE(err);
  EXPECT_EQ(err->kind, WellformednessKind::UnsupportedFlags);
}

TEST(Wellformed, DuplicatesAndPhis) {
  auto err = check_wellformed(
      fixtures::parse_one("define double @f(double %0) {\n  %2 = fadd double %0, %0\n  %2 = fmul double %2, %2\n  ret double %2\n}"));
  ASSERT_TRUE(err);
  EXPECT_EQ(err->kind, WellformednessKind::DuplicateDest);

  err = check_wellformed(fixtures::parse_one("define double @f(double %x, double %x) {\n  ret double %x\n}"));
  ASSERT_TRUE(err);
  EXPECT_EQ(err->kind, WellformednessKind::DuplicateParam);

  FunctionDef f = fixtures::fma_block();
  f.body.blk_phis.push_back(PhiNode{LocalId::anon(7), DType::Double});
  err = check_wellformed(f);
  ASSERT_TRUE(err);
  EXPECT_EQ(err->kind, WellformednessKind::NonEmptyPhis);
}

TEST(LocalIdNames, Validation) {
  EXPECT_THROW(LocalId::named(""), std::invalid_argument);
  EXPECT_THROW(LocalId::named("a b"), std::invalid_argument);
  EXPECT_EQ(LocalId::named("tmp").str(), "%tmp");
  EXPECT_EQ(LocalId::anon(12).str(), "%12");
}

namespace {

// Random straight-line block over `nparams` params. With `allow_bad`, operands
// may name ids that are never defined or defined later.
FunctionDef random_block(std::mt19937_64& rng, bool allow_bad) {
  std::uniform_int_distribution<int> nparams_d(0, 3), ninst_d(0, 6), op_d(0, 3), lit_d(0, 5);
  const int np = nparams_d(rng), ni = ninst_d(rng);
  FunctionDef f;
  f.name = GlobalId("r");
  for (int i = 0; i < np; ++i) f.params.push_back(Param{DType::Double, LocalId::anon(i)});
  f.body.blk_id = LocalId::anon(np);
  const std::uint64_t first = np + 1;
  auto operand = [&](std::uint64_t defined_upto) {
    if (lit_d(rng) == 0) return Expr::literal(Binary64{rng()});
    const std::uint64_t pool = allow_bad ? first + ni + 2 : defined_upto;
    if (pool == 0) return Expr::literal(b64(1.0));
    std::uint64_t id = std::uniform_int_distribution<std::uint64_t>(0, pool - 1)(rng);
    if (!allow_bad && id >= static_cast<std::uint64_t>(np)) id = first + (id - np);
    else if (allow_bad && id == static_cast<std::uint64_t>(np)) id = first + ni + 5;
    return Expr::local(LocalId::anon(id));
  };
  for (int i = 0; i < ni; ++i) {
    const std::uint64_t defined = np + i;
    Instruction inst;
    inst.dest = LocalId::anon(first + i);
    const int op = op_d(rng);
    if (op == 3) {
      IntrinsicCall c{GlobalId(kFmulAddName), DType::Double, {}, (rng() & 1) != 0};
      for (int k = 0; k < 3; ++k) c.args.push_back(CallArg{DType::Double, operand(defined)});
      inst.body = c;
    } else {
      inst.body = FBinop{static_cast<BinOp>(op), {}, DType::Double, operand(defined), operand(defined)};
    }
    f.body.blk_code.push_back(inst);
  }
  f.body.blk_term.value = operand(np + ni);
  return f;
}

}  // namespace

TEST(Wellformed, AgreesWithInterpreterOnRandomBlocks) {
  std::mt19937_64 rng(7);
  int accepted = 0, rejected = 0;
  for (int iter = 0; iter < 4000; ++iter) {
    const FunctionDef f = random_block(rng, (iter & 1) != 0);
    std::vector<Value> args(f.params.size(), Value::dbl(0.5));
    bool undefined = false;
    try {
      interp_cfg2(f, GlobalEnv{}, LocalEnv{}, args);
    } catch (const EvalError& e) {
      ASSERT_EQ(e.kind(), EvalError::Kind::UndefinedLocal) << e.what();
      undefined = true;
    }
    const auto err = check_wellformed(f);
    EXPECT_EQ(static_cast<bool>(err), undefined) << print_block(f);
    (err ? rejected : accepted)++;
  }
  EXPECT_GT(accepted, 500);
  EXPECT_GT(rejected, 500);
}

TEST(Printer, RoundTripRandomBlocks) {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 2000; ++iter) {
    const FunctionDef f = random_block(rng, false);
    ASSERT_FALSE(check_wellformed(f));
    const std::string text = print_block(f);
    const FunctionDef g = fixtures::parse_one(text);
    ASSERT_EQ(g, f) << text;
  }
}
