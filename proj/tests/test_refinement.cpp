#include <gtest/gtest.h>

#include <random>

#include "fmatv/refinement.hpp"
#include "fmatv/sampler.hpp"
#include "support/fixtures.hpp"

using namespace fmatv;

namespace {

const LocalId k4 = LocalId::anon(4), k5 = LocalId::anon(5), k7 = LocalId::anon(7);
const RefinementConfig kLenient{};
const RefinementConfig kStrict{FinitenessMode::Strict, BoundSource::Both, {}};

std::vector<Value> args3(double a, double b, double c) { return {Value::dbl(a), Value::dbl(b), Value::dbl(c)}; }

Verdict check_sample_pair(std::span<const Value> args, const RefinementConfig& cfg = kLenient) {
  return check_equiv(fixtures::fma_block(), fixtures::nonfma_block(), GlobalEnv{}, LocalEnv{}, args, fixtures::sample_alignment(), cfg);
}

std::string mutate(std::string text, const std::string& from, const std::string& to) {
  text.replace(text.find(from), from.size(), to);
  return text;
}

}  // namespace

TEST(DoubleRefine, PoisonPoison) {
  EXPECT_TRUE(double_refine(Value::poison(), Value::poison(), kPositiveZero, kLenient));
  EXPECT_TRUE(double_refine(Value::poison(), Value::poison(), kPositiveZero, kStrict));
}

TEST(DoubleRefine, MixedIsFalse) {
  for (const auto& cfg : {kLenient, kStrict}) {
    EXPECT_FALSE(double_refine(Value::dbl(1.0), Value::poison(), kPositiveInf, cfg));
    EXPECT_FALSE(double_refine(Value::poison(), Value::dbl(1.0), kPositiveInf, cfg));
  }
}

TEST(DoubleRefine, ReflexiveAtZeroBound) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    const Binary64 x{rng()};
    if (!is_finite(x)) continue;
    ASSERT_TRUE(double_refine(Value::dbl(x), Value::dbl(x), kPositiveZero, kStrict)) << to_hex(x);
  }
}

TEST(DoubleRefine, BoundComparison) {
  const Value one = Value::dbl(1.0), next = Value::dbl(Binary64{kOne.bits + 1});
  const Binary64 ulp = b64(0x1p-52);
  EXPECT_TRUE(double_refine(one, next, ulp, kStrict));
  EXPECT_FALSE(double_refine(one, next, b64(0x1p-53), kStrict));
  EXPECT_EQ(observed_difference(next.as_double(), one.as_double()), ulp);
}

TEST(DoubleRefine, MonotoneInBound) {
  std::mt19937_64 rng(2);
  const SamplerConfig s{};
  for (std::uint64_t i = 0; i < 20000; ++i) {
    const auto in = sample_input(s, i, 3);
    const Value x = in[0], y = Value::dbl(b64_add(in[0].as_double(), in[1].as_double()));
    const Binary64 b1{rng() & 0x7FEFFFFFFFFFFFFFULL}, b2{b1.bits + (rng() % 1000)};
    if (double_refine(x, y, b1, kStrict)) ASSERT_TRUE(double_refine(x, y, b2, kStrict));
  }
}

TEST(DoubleRefine, StrictAndLenientDifferOnlyOnNonFinite) {
  std::mt19937_64 rng(3);
  int differ = 0;
  for (int i = 0; i < 200000; ++i) {
    // Full exponent range plus forced specials.
    Binary64 p{rng()}, q{rng()};
    if (i % 50 == 0) p = kPositiveInf;
    const Value x = Value::dbl(p), y = Value::dbl(q);
    const bool nonfinite = !is_finite(p) || !is_finite(q) || !is_finite(b64_sub(p, q));
    const bool d = double_refine(x, y, kPositiveInf, kStrict) != double_refine(x, y, kPositiveInf, kLenient);
    ASSERT_EQ(d, nonfinite) << to_hex(p) << " " << to_hex(q);
    differ += d;
  }
  EXPECT_GT(differ, 1000);
  // The subtraction alone can overflow.
  const Value big = Value::dbl(kMaxFinite), nbig = Value::dbl(kMaxFinite.negate());
  EXPECT_TRUE(double_refine(big, nbig, kPositiveZero, kLenient));
  EXPECT_FALSE(double_refine(big, nbig, kPositiveInf, kStrict));
}

TEST(OptDoubleRefine, AbsenceFails) {
  const Value v = Value::dbl(1.0);
  EXPECT_FALSE(opt_double_refine(nullptr, &v, kPositiveInf, kLenient));
  EXPECT_FALSE(opt_double_refine(&v, nullptr, kPositiveInf, kLenient));
  EXPECT_FALSE(opt_double_refine(nullptr, nullptr, kPositiveInf, kLenient));
  EXPECT_TRUE(opt_double_refine(&v, &v, kPositiveZero, kLenient));
}

TEST(LocalRefine, RenamedTemporaryInstance) {
  const AlignmentSpec align = fixtures::sample_alignment();
  const Binary64 v2 = b64(0.3);
  const Binary64 v1{v2.bits + 1};
  const LocalEnv opt{{k4, Value::dbl(v1)}};
  const LocalEnv orig{{k5, Value::dbl(v2)}, {k4, Value::dbl(0.25)}};
  EXPECT_TRUE(local_refine(opt, orig, align, b64(1e-16), kStrict));
  EXPECT_FALSE(local_refine(opt, orig, align, kPositiveZero, kStrict));
}

TEST(LocalRefine, EmptyAndLeftovers) {
  EXPECT_TRUE(local_refine(LocalEnv{}, LocalEnv{}, AlignmentSpec{}, kPositiveZero, kStrict));
  const LocalEnv a{{k7, Value::dbl(1.0)}}, b{{k7, Value::dbl(2.0)}};
  EXPECT_FALSE(local_refine(a, b, AlignmentSpec{}, kPositiveInf, kLenient));
  const auto out = local_refine_detailed(a, b, AlignmentSpec{}, {}, kLenient);
  EXPECT_TRUE(out.leftover_mismatch);
  EXPECT_EQ(out.offending_ids, std::vector<std::string>{"%7"});
  // Only present on one side.
  EXPECT_FALSE(local_refine(a, LocalEnv{}, AlignmentSpec{}, kPositiveInf, kLenient));
}

TEST(LocalRefine, LeftoverClauseIsSymmetric) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 3000; ++i) {
    LocalEnv a, b;
    AlignmentSpec al;
    for (std::uint64_t id = 0; id < 6; ++id) {
      const Value v = Value::dbl(static_cast<double>(rng() % 3));
      if (rng() % 4) a.prepend(LocalId::anon(id), v);
      if (rng() % 4) b.prepend(LocalId::anon(id), rng() % 5 ? v : Value::dbl(9.0));
      if (rng() % 3 == 0) al.fresh_optimized.insert(LocalId::anon(id));
      if (rng() % 3 == 0) al.fresh_original.insert(LocalId::anon(id));
    }
    AlignmentSpec swapped{{}, al.fresh_original, al.fresh_optimized};
    const auto o1 = local_refine_detailed(a, b, al, {}, kLenient);
    const auto o2 = local_refine_detailed(b, a, swapped, {}, kLenient);
    ASSERT_EQ(o1.holds, o2.holds);
  }
}

TEST(Alignment, ParseAndValidate) {
  const AlignmentSpec a = fixtures::sample_alignment();
  ASSERT_EQ(a.value_pairs.size(), 1u);
  EXPECT_EQ(a.value_pairs[0], std::make_pair(k4, k5));
  EXPECT_EQ(a.fresh_original, (std::set<LocalId>{k4, k5}));
  EXPECT_NO_THROW(validate_alignment(a, fixtures::fma_block(), fixtures::nonfma_block()));
  EXPECT_EQ(parse_alignment(to_json(a).dump()).value_pairs, a.value_pairs);

  EXPECT_THROW(parse_alignment("{"), ConfigError);
  EXPECT_THROW(parse_alignment(R"({"pairs": []})"), ConfigError);
  EXPECT_THROW(parse_alignment(R"({"pairs": [["4","%5"]], "fresh_optimized": [], "fresh_original": []})"), ConfigError);
  AlignmentSpec bad = a;
  bad.fresh_original.erase(k5);
  EXPECT_THROW(validate_alignment(bad, fixtures::fma_block(), fixtures::nonfma_block()), ConfigError);
  bad = a;
  bad.fresh_optimized.insert(LocalId::anon(0));
  EXPECT_THROW(validate_alignment(bad, fixtures::fma_block(), fixtures::nonfma_block()), ConfigError);
}

TEST(Recover, SamplePairShapes) {
  const FpExpr x = FpExpr::var("%0"), y = FpExpr::var("%1"), z = FpExpr::var("%2");
  EXPECT_EQ(recover_expr(fixtures::nonfma_block()), FpExpr::add(FpExpr::mul(x, y), z));
  EXPECT_EQ(recover_expr(fixtures::fma_block()), FpExpr::fma(x, y, z));
  EXPECT_EQ(recover_expr(fixtures::parse_one("define double @id(double %0) {\n  ret double %0\n}")), x);
  EXPECT_TRUE(match_fma_pair(recover_expr(fixtures::nonfma_block()), recover_expr(fixtures::fma_block())));
  EXPECT_FALSE(match_fma_pair(recover_expr(fixtures::fma_block()), recover_expr(fixtures::fma_block())));
  // c + a*b also matches.
  EXPECT_TRUE(match_fma_pair(FpExpr::add(z, FpExpr::mul(x, y)), FpExpr::fma(x, y, z)));
  EXPECT_FALSE(match_fma_pair(FpExpr::add(z, FpExpr::mul(x, y)), FpExpr::fma(y, x, z)));
}

TEST(Recover, UnknownIntrinsic) {
  const FunctionDef f = fixtures::parse_one(mutate(fixtures::kFmaText, "@llvm.fmuladd.f64(", "@llvm.fmuladd.v2("));
  EXPECT_THROW(recover_expr(f), RecoverError);
}

TEST(CheckEquiv, ExactCase) {
  const Verdict v = check_sample_pair(args3(1, 1, 0));
  EXPECT_EQ(v.status, VerdictStatus::Pass);
  ASSERT_TRUE(v.observed_diff);
  EXPECT_EQ(*v.observed_diff, kPositiveZero);
  ASSERT_TRUE(v.return_bounds);
  EXPECT_TRUE(v.return_bounds->paper);
  EXPECT_TRUE(v.return_bounds->derived);
}

TEST(CheckEquiv, FsubMutationFails) {
  const FunctionDef orig = fixtures::parse_one(mutate(fixtures::kNonFmaText, "fadd", "fsub"));
  const Verdict v = check_equiv(fixtures::fma_block(), orig, GlobalEnv{}, LocalEnv{}, args3(1, 1, 1), fixtures::sample_alignment());
  EXPECT_EQ(v.status, VerdictStatus::Fail);
  EXPECT_EQ(v.clause, FailedClause::Locals);
  EXPECT_EQ(*v.optimized_result, Value::dbl(2.0));
  EXPECT_EQ(*v.original_result, Value::dbl(0.0));
}

TEST(CheckEquiv, PoisonBranch) {
  for (int k = 0; k < 3; ++k) {
    auto args = args3(0.5, 1.5, -2.0);
    args[k] = Value::poison();
    const Verdict v = check_sample_pair(args);
    EXPECT_EQ(v.status, VerdictStatus::Pass);
    EXPECT_TRUE(v.poison_branch);
  }
}

TEST(CheckEquiv, ReflexiveOnWellFormedBlocks) {
  const SamplerConfig s{};
  for (const auto& f : {fixtures::fma_block(), fixtures::nonfma_block()}) {
    EquivChecker checker(f, f, identity_alignment(f), RefinementConfig{FinitenessMode::Strict, BoundSource::DerivedBound, {}});
    for (std::uint64_t i = 0; i < 2000; ++i) {
      const auto args = sample_input(s, i, 3);
      const Verdict v = checker.check(GlobalEnv{}, LocalEnv{}, args);
      ASSERT_EQ(v.status, VerdictStatus::Pass);
      ASSERT_EQ(*v.observed_diff, kPositiveZero);
    }
  }
}

TEST(CheckEquiv, SoundOnSampledInputs) {
  EquivChecker checker(fixtures::fma_block(), fixtures::nonfma_block(), fixtures::sample_alignment(),
                       RefinementConfig{FinitenessMode::Lenient, BoundSource::DerivedBound, {}});
  const SamplerConfig s{};
  int nonzero = 0;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const Verdict v = checker.check(GlobalEnv{}, LocalEnv{}, sample_input(s, i, 3));
    ASSERT_EQ(v.status, VerdictStatus::Pass) << i;
    ASSERT_LE(v.observed_diff->to_double(), v.return_bounds->used.to_double());
    nonzero += v.observed_diff->to_double() != 0;
  }
  EXPECT_GT(nonzero, 100);
}

TEST(CheckEquiv, UnknownIntrinsicIsEvaluationFailure) {
  const FunctionDef opt = fixtures::parse_one(mutate(fixtures::kFmaText, "@llvm.fmuladd.f64(", "@llvm.fmuladd.v2("));
  const Verdict v = check_equiv(opt, fixtures::nonfma_block(), GlobalEnv{}, LocalEnv{}, args3(1, 2, 3), fixtures::sample_alignment());
  EXPECT_EQ(v.status, VerdictStatus::Fail);
  EXPECT_EQ(v.clause, FailedClause::Evaluation);
  EXPECT_NE(v.message.find("UnknownIntrinsic"), std::string::npos);
}

TEST(CheckEquiv, Unsupported) {
  const FunctionDef bad = fixtures::parse_one(mutate(fixtures::kNonFmaText, "fadd double %4", "fadd double %9"));
  EXPECT_EQ(check_equiv(fixtures::fma_block(), bad, GlobalEnv{}, LocalEnv{}, args3(1, 2, 3), fixtures::sample_alignment()).status,
            VerdictStatus::Unsupported);
  const FunctionDef two = fixtures::parse_one("define double @f(double %0, double %1) {\n  %3 = fadd double %0, %1\n  ret double %3\n}");
  EXPECT_EQ(check_equiv(fixtures::fma_block(), two, GlobalEnv{}, LocalEnv{}, args3(1, 2, 3), AlignmentSpec{}).status,
            VerdictStatus::Unsupported);
  // The closed-form bound only covers the x*y + z / fma pair.
  const FunctionDef f = fixtures::nonfma_block();
  EXPECT_EQ(check_equiv(f, f, GlobalEnv{}, LocalEnv{}, args3(1, 2, 3), identity_alignment(f),
                        RefinementConfig{FinitenessMode::Lenient, BoundSource::PaperFormula, {}})
                .status,
            VerdictStatus::Unsupported);
}

TEST(CheckEquiv, StrictModeRejectsOverflow) {
  const auto args = args3(1e308, 10, 1);
  EXPECT_EQ(check_sample_pair(args, kLenient).status, VerdictStatus::Pass);
  EXPECT_EQ(check_sample_pair(args, kStrict).status, VerdictStatus::Fail);
}

TEST(CheckEquiv, GlobalsAndPreexistingLocals) {
  GlobalEnv g;
  g.entries.push_back({GlobalId("x"), Value::dbl(7.0)});
  const LocalEnv l{{LocalId::named("keep"), Value::dbl(3.0)}};
  const auto args = args3(0.1, 0.2, 0.3);
  EXPECT_EQ(check_equiv(fixtures::fma_block(), fixtures::nonfma_block(), g, l, args, fixtures::sample_alignment()).status,
            VerdictStatus::Pass);
}

TEST(VerdictJson, Fields) {
  const auto j = to_json(check_sample_pair(args3(1, 1, 0)));
  EXPECT_EQ(j["status"], "pass");
  EXPECT_EQ(j["observed_diff"]["hex"], "0x0000000000000000");
  EXPECT_EQ(j["inputs"][0]["hex"], "0x3FF0000000000000");
  EXPECT_TRUE(j.contains("bound_derived"));
}
