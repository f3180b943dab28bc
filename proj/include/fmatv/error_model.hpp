#pragma once

// Round-off bounds under the delta-eta model: every rounded operation yields
// (exact result)(1 + d) + e with |d| <= delta and |e| <= eta.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmatv/binary64.hpp"
#include "fmatv/upward.hpp"

namespace fmatv {

struct ErrorModelParams {
  double delta = 0x1p-53;   // unit roundoff for binary64, round-to-nearest
  // Half the smallest subnormal is 2^-1075, which binary64 cannot hold; the
  // bound arithmetic carries it rounded up to 2^-1074.
  double eta = 0x1p-1074;

  /// Validates the model ranges; throws std::invalid_argument.
  void validate() const {
    if (!(delta >= 0 && delta < 1)) throw std::invalid_argument("delta must lie in [0, 1)");
    if (!(eta >= 0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be finite and non-negative");
  }
};

/// Straight-line floating-point expression over named inputs.
struct FpExpr {
  enum class Op { Var, Const, Add, Sub, Mul, Fma };

  Op op = Op::Var;
  std::string name;
  Binary64 value;
  std::vector<FpExpr> operands;

  static FpExpr var(std::string n) { return FpExpr{Op::Var, std::move(n), {}, {}}; }
  static FpExpr constant(Binary64 v) { return FpExpr{Op::Const, {}, v, {}}; }
  static FpExpr add(FpExpr l, FpExpr r) { return FpExpr{Op::Add, {}, {}, {std::move(l), std::move(r)}}; }
  static FpExpr sub(FpExpr l, FpExpr r) { return FpExpr{Op::Sub, {}, {}, {std::move(l), std::move(r)}}; }
  static FpExpr mul(FpExpr l, FpExpr r) { return FpExpr{Op::Mul, {}, {}, {std::move(l), std::move(r)}}; }
  static FpExpr fma(FpExpr a, FpExpr b, FpExpr c) {
    return FpExpr{Op::Fma, {}, {}, {std::move(a), std::move(b), std::move(c)}};
  }

  friend bool operator==(const FpExpr&, const FpExpr&) = default;

  std::string str() const {
    switch (op) {
      case Op::Var: return name;
      case Op::Const: return to_hex(value);
      case Op::Add: return "(" + operands[0].str() + " + " + operands[1].str() + ")";
      case Op::Sub: return "(" + operands[0].str() + " - " + operands[1].str() + ")";
      case Op::Mul: return "(" + operands[0].str() + " * " + operands[1].str() + ")";
      case Op::Fma: return "fma(" + operands[0].str() + ", " + operands[1].str() + ", " + operands[2].str() + ")";
    }
    return "?";
  }

  void collect_vars(std::set<std::string>& out) const {
    if (op == Op::Var) out.insert(name);
    for (const auto& e : operands) e.collect_vars(out);
  }
};

/// One rounded operation's share of a bound.
struct BoundTerm {
  std::string tree;       // "original", "optimized" or "comparison"
  std::string node;
  double rounding = 0;    // error introduced by this node's own rounding
  double accumulated = 0; // error bound on this node's computed value
};

struct BoundResult {
  double magnitude_bound = 0;  // upper bound on |rounded - rounded'|, upward-rounded
  double original_error = 0;
  double optimized_error = 0;
  double comparison = 0;
  std::vector<BoundTerm> exact_magnitude_terms;
};

class BoundError : public std::runtime_error {
 public:
  enum class Kind { UnknownVariable, VariableMismatch };
  BoundError(Kind k, const std::string& msg) : std::runtime_error(msg), kind_(k) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

namespace detail {

// Bound arithmetic on non-negative reals; NaN (from inf * 0) saturates to +Inf.
inline double badd(double x, double y) {
  double r = upward::add(x, y);
  return std::isnan(r) ? upward::kInf : r;
}
inline double bmul(double x, double y) {
  double r = upward::mul(x, y);
  return std::isnan(r) ? upward::kInf : r;
}

struct MagErr {
  double mag;  // bound on |exact value|
  double err;  // bound on |computed - exact|
};

// Adds delta * |rounded operand| + eta to the error carried into a rounding.
inline MagErr rounded(double exact_mag, double inherited_err, const ErrorModelParams& p, double& rounding) {
  rounding = badd(bmul(p.delta, badd(exact_mag, inherited_err)), p.eta);
  return {exact_mag, badd(inherited_err, rounding)};
}

template <class Lookup>
MagErr propagate(const FpExpr& e, const Lookup& lookup, const ErrorModelParams& p, const char* tree,
                 std::vector<BoundTerm>* terms) {
  using Op = FpExpr::Op;
  switch (e.op) {
    case Op::Var: {
      const double m = std::fabs(lookup(e.name));
      return {std::isnan(m) ? upward::kInf : m, 0};
    }
    case Op::Const: {
      const double m = std::fabs(e.value.to_double());
      return {std::isnan(m) ? upward::kInf : m, 0};
    }
    default: break;
  }
  std::vector<MagErr> xs;
  xs.reserve(e.operands.size());
  for (const auto& o : e.operands) xs.push_back(propagate(o, lookup, p, tree, terms));

  double exact_mag = 0, inherited = 0, rounding = 0;
  switch (e.op) {
    case Op::Add:
    case Op::Sub:
      exact_mag = badd(xs[0].mag, xs[1].mag);
      inherited = badd(xs[0].err, xs[1].err);
      break;
    case Op::Mul:
      // |x'y' - xy| <= |x| ey + |y| ex + ex ey
      exact_mag = bmul(xs[0].mag, xs[1].mag);
      inherited = badd(badd(bmul(xs[0].mag, xs[1].err), bmul(xs[1].mag, xs[0].err)), bmul(xs[0].err, xs[1].err));
      break;
    case Op::Fma:
      exact_mag = badd(bmul(xs[0].mag, xs[1].mag), xs[2].mag);
      inherited = badd(badd(badd(bmul(xs[0].mag, xs[1].err), bmul(xs[1].mag, xs[0].err)), bmul(xs[0].err, xs[1].err)),
                       xs[2].err);
      break;
    default: break;
  }
  MagErr out = rounded(exact_mag, inherited, p, rounding);
  if (terms) terms->push_back(BoundTerm{tree, e.str(), rounding, out.err});
  return out;
}

template <class Lookup>
BoundResult derive_bound_with(const FpExpr& original, const FpExpr& optimized, const Lookup& lookup,
                              const ErrorModelParams& p, bool record_terms) {
  BoundResult r;
  std::vector<BoundTerm>* terms = record_terms ? &r.exact_magnitude_terms : nullptr;
  const MagErr a = propagate(original, lookup, p, "original", terms);
  const MagErr b = propagate(optimized, lookup, p, "optimized", terms);
  r.original_error = a.err;
  r.optimized_error = b.err;
  // Identical trees round identically, so their results coincide.
  const double diff = original == optimized ? 0.0 : badd(a.err, b.err);
  // The refinement compares a rounded subtraction of the two results.
  const double shared = std::max({a.mag, b.mag, diff});
  r.comparison = badd(bmul(p.delta, shared), p.eta);
  r.magnitude_bound = badd(diff, r.comparison);
  if (terms) terms->push_back(BoundTerm{"comparison", "sub", r.comparison, r.magnitude_bound});
  return r;
}

}  // namespace detail

/// The closed-form FMA bound, evaluated term by term with upward rounding:
/// (|abc| d + e + |ab|(2d + d^2) + e(1 + d) + |c| d + e)(1 + d) + e.
inline double epsilon_fma_paper(double abs_a, double abs_b, double abs_c, const ErrorModelParams& p = {}) {
  using detail::badd;
  using detail::bmul;
  const double d = p.delta, e = p.eta;
  const double ab = bmul(abs_a, abs_b);
  const double abc = bmul(ab, abs_c);
  const double one_plus_d = badd(1.0, d);
  double s = bmul(abc, d);
  s = badd(s, e);
  s = badd(s, bmul(ab, badd(2 * d, bmul(d, d))));
  s = badd(s, bmul(e, one_plus_d));
  s = badd(s, bmul(abs_c, d));
  s = badd(s, e);
  return badd(bmul(s, one_plus_d), e);
}

/// Propagates magnitude/error pairs through both trees and bounds the rounded
/// difference of their results. Inputs (Var/Const leaves) carry no error.
/// Throws BoundError when a variable has no magnitude or the trees range over
/// different variable sets.
inline BoundResult derive_bound(const FpExpr& original, const FpExpr& optimized,
                                const std::map<std::string, double>& mags, const ErrorModelParams& p = {}) {
  std::set<std::string> va, vb;
  original.collect_vars(va);
  optimized.collect_vars(vb);
  if (va != vb) throw BoundError(BoundError::Kind::VariableMismatch, "expressions range over different variables");
  for (const auto& v : va)
    if (!mags.contains(v)) throw BoundError(BoundError::Kind::UnknownVariable, "no magnitude for variable " + v);
  auto lookup = [&](const std::string& n) { return mags.at(n); };
  return detail::derive_bound_with(original, optimized, lookup, p, true);
}

/// The bound as a binary64 that is >= the real-valued bound.
inline Binary64 eval_bound(const BoundResult& b) {
  const double v = b.magnitude_bound;
  if (std::isnan(v)) return kPositiveInf;
  return b64(v <= 0 ? 0.0 : v);
}

}  // namespace fmatv
