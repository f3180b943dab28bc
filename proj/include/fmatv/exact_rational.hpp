#pragma once

// Exact rational arithmetic and correctly rounded conversion to binary64.
// This is the reference every floating-point operation is tested against.

#include <gmpxx.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "fmatv/binary64.hpp"

namespace fmatv {

/// A rational in lowest terms with positive denominator.
class ExactRational {
 public:
  ExactRational() = default;
  ExactRational(long n) : q_(n) {}
  ExactRational(const mpz_class& num, const mpz_class& den) : q_(num, den) {
    if (den == 0) throw std::domain_error("ExactRational: zero denominator");
    q_.canonicalize();
  }
  explicit ExactRational(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }

  /// Lossless injection of a finite binary64 value.
  static ExactRational from_binary64(Binary64 x) {
    if (!is_finite(x)) throw std::domain_error("ExactRational: non-finite binary64");
    return ExactRational(mpq_class(x.to_double()));
  }

  /// 2^k for any integer k.
  static ExactRational pow2(long k) {
    mpz_class one = 1;
    mpz_class p;
    mpz_mul_2exp(p.get_mpz_t(), one.get_mpz_t(), static_cast<mp_bitcnt_t>(k < 0 ? -k : k));
    return k < 0 ? ExactRational(one, p) : ExactRational(p, one);
  }

  mpz_class numerator() const { return q_.get_num(); }
  mpz_class denominator() const { return q_.get_den(); }
  int sign() const { return sgn(q_); }
  const mpq_class& raw() const { return q_; }

  ExactRational abs() const { return ExactRational(mpq_class(::abs(q_))); }

  friend ExactRational operator+(const ExactRational& a, const ExactRational& b) { return ExactRational(mpq_class(a.q_ + b.q_)); }
  friend ExactRational operator-(const ExactRational& a, const ExactRational& b) { return ExactRational(mpq_class(a.q_ - b.q_)); }
  friend ExactRational operator*(const ExactRational& a, const ExactRational& b) { return ExactRational(mpq_class(a.q_ * b.q_)); }
  friend ExactRational operator/(const ExactRational& a, const ExactRational& b) {
    if (b.sign() == 0) throw std::domain_error("ExactRational: division by zero");
    return ExactRational(mpq_class(a.q_ / b.q_));
  }
  ExactRational operator-() const { return ExactRational(mpq_class(-q_)); }

  friend bool operator==(const ExactRational& a, const ExactRational& b) { return a.q_ == b.q_; }
  friend bool operator<(const ExactRational& a, const ExactRational& b) { return a.q_ < b.q_; }
  friend bool operator<=(const ExactRational& a, const ExactRational& b) { return a.q_ <= b.q_; }
  friend bool operator>(const ExactRational& a, const ExactRational& b) { return a.q_ > b.q_; }
  friend bool operator>=(const ExactRational& a, const ExactRational& b) { return a.q_ >= b.q_; }

  std::string to_string() const { return q_.get_str(); }

 private:
  mpq_class q_;
};

enum class RoundingDirection { NearestEven, Upward };

namespace detail {

inline long floor_log2(const mpz_class& n, const mpz_class& d) {
  long e = static_cast<long>(mpz_sizeinbase(n.get_mpz_t(), 2)) - static_cast<long>(mpz_sizeinbase(d.get_mpz_t(), 2));
  // 2^e <= n/d < 2^(e+1) after at most one correction.
  mpz_class lhs = n, rhs = d;
  if (e >= 0)
    mpz_mul_2exp(rhs.get_mpz_t(), rhs.get_mpz_t(), static_cast<mp_bitcnt_t>(e));
  else
    mpz_mul_2exp(lhs.get_mpz_t(), lhs.get_mpz_t(), static_cast<mp_bitcnt_t>(-e));
  if (lhs < rhs) --e;
  return e;
}

}  // namespace detail

/// Rounds an exact rational to binary64: overflow goes to ±Inf (or ±max
/// finite when rounding toward +Inf on the negative side), and tiny values
/// round gradually through the subnormals to a signed zero.
inline Binary64 round_rational(const ExactRational& q, RoundingDirection dir = RoundingDirection::NearestEven) {
  const int s = q.sign();
  if (s == 0) return kPositiveZero;
  const bool negative = s < 0;
  mpz_class n = q.numerator();
  if (negative) n = -n;
  const mpz_class d = q.denominator();

  const long e = detail::floor_log2(n, d);
  if (e > 1023) {
    if (dir == RoundingDirection::Upward && negative) return kMaxFinite.negate();
    return negative ? kNegativeInf : kPositiveInf;
  }
  // Quantum (weight of the last mantissa bit) at this magnitude.
  const long k = (e < -1022 ? -1022 : e) - 52;
  mpz_class num = n, den = d;
  if (k < 0)
    mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<mp_bitcnt_t>(-k));
  else
    mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(k));
  mpz_class m, r;
  mpz_fdiv_qr(m.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());

  bool bump = false;
  if (dir == RoundingDirection::NearestEven) {
    const int c = cmp(mpz_class(2 * r), den);
    bump = c > 0 || (c == 0 && mpz_odd_p(m.get_mpz_t()));
  } else {
    bump = r != 0 && !negative;
  }
  if (bump) m += 1;

  // m <= 2^53, so the conversion is exact and ldexp only rounds on overflow.
  const double magnitude = std::ldexp(m.get_d(), static_cast<int>(k));
  return b64(negative ? -magnitude : magnitude);
}

}  // namespace fmatv
