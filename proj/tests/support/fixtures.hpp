#pragma once

#include <string>

#include "fmatv/parser.hpp"
#include "fmatv/refinement.hpp"

namespace fmatv::fixtures {

// clang -O2 -ffp-contract=on output for `double f1(double a, double b, double c) { return a*b + c; }`
inline const std::string kFmaText = R"(; ModuleID = 'fma.c'
source_filename = "fma.c"

; Function Attrs: mustprogress nofree nosync nounwind willreturn memory(none) uwtable
define noundef double @f1(double noundef %0, double noundef %1, double noundef %2) local_unnamed_addr #0 {
  %4 = tail call double @llvm.fmuladd.f64(double %0, double %1, double %2)
  ret double %4
}

declare double @llvm.fmuladd.f64(double, double, double) #1

attributes #0 = { mustprogress nofree nosync nounwind willreturn memory(none) uwtable }
attributes #1 = { nocallback nofree nosync nounwind speculatable willreturn memory(none) }
)";

// Same source with -ffp-contract=off.
inline const std::string kNonFmaText = R"(; ModuleID = 'nonfma.c'
source_filename = "nonfma.c"

; Function Attrs: mustprogress nofree nosync nounwind willreturn memory(none) uwtable
define noundef double @f1(double noundef %0, double noundef %1, double noundef %2) local_unnamed_addr #0 {
  %4 = fmul double %0, %1
  %5 = fadd double %4, %2
  ret double %5
}

attributes #0 = { mustprogress nofree nosync nounwind willreturn memory(none) uwtable }
)";

inline const std::string kAlignText = R"({"pairs": [["%4", "%5"]], "fresh_optimized": ["%4"], "fresh_original": ["%4", "%5"]})";

inline FunctionDef fma_block() { return parse_module(kFmaText).functions.at(0); }
inline FunctionDef nonfma_block() { return parse_module(kNonFmaText).functions.at(0); }
inline AlignmentSpec sample_alignment() { return parse_alignment(kAlignText); }

inline FunctionDef parse_one(const std::string& text) { return parse_module(text).functions.at(0); }

}  // namespace fmatv::fixtures
