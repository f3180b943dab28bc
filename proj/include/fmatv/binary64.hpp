#pragma once

// IEEE-754 binary64 values as raw bit patterns, plus the round-to-nearest-even
// arithmetic the blocks are interpreted with.

#include <bit>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

namespace fmatv {

enum class FpClass { Zero, Subnormal, Normal, Infinite, NaN };

/// A binary64 value held as its exact 64-bit pattern. Equality is bitwise, so
/// +0 and -0 differ and NaNs compare by payload.
struct Binary64 {
  std::uint64_t bits = 0;

  static constexpr std::uint64_t kSignMask = 0x8000000000000000ULL;
  static constexpr std::uint64_t kExpMask = 0x7FF0000000000000ULL;
  static constexpr std::uint64_t kFracMask = 0x000FFFFFFFFFFFFFULL;

  constexpr Binary64() = default;
  constexpr explicit Binary64(std::uint64_t b) : bits(b) {}

  static constexpr Binary64 from_double(double d) { return Binary64{std::bit_cast<std::uint64_t>(d)}; }
  constexpr double to_double() const { return std::bit_cast<double>(bits); }

  constexpr bool sign() const { return (bits & kSignMask) != 0; }
  constexpr unsigned biased_exponent() const { return static_cast<unsigned>((bits & kExpMask) >> 52); }
  constexpr std::uint64_t fraction() const { return bits & kFracMask; }

  constexpr FpClass classify() const {
    const unsigned e = biased_exponent();
    if (e == 0x7FF) return fraction() == 0 ? FpClass::Infinite : FpClass::NaN;
    if (e == 0) return fraction() == 0 ? FpClass::Zero : FpClass::Subnormal;
    return FpClass::Normal;
  }
  constexpr bool is_nan() const { return classify() == FpClass::NaN; }
  constexpr Binary64 abs() const { return Binary64{bits & ~kSignMask}; }
  constexpr Binary64 negate() const { return Binary64{bits ^ kSignMask}; }

  friend constexpr bool operator==(Binary64, Binary64) = default;
  friend constexpr auto operator<=>(Binary64, Binary64) = default;
};

inline constexpr Binary64 kPositiveZero{0x0000000000000000ULL};
inline constexpr Binary64 kNegativeZero{0x8000000000000000ULL};
inline constexpr Binary64 kPositiveInf{0x7FF0000000000000ULL};
inline constexpr Binary64 kNegativeInf{0xFFF0000000000000ULL};
inline constexpr Binary64 kQuietNaN{0x7FF8000000000000ULL};
inline constexpr Binary64 kMinSubnormal{0x0000000000000001ULL};
inline constexpr Binary64 kMaxSubnormal{0x000FFFFFFFFFFFFFULL};
inline constexpr Binary64 kMinNormal{0x0010000000000000ULL};
inline constexpr Binary64 kMaxFinite{0x7FEFFFFFFFFFFFFFULL};
inline constexpr Binary64 kOne{0x3FF0000000000000ULL};

inline Binary64 b64(double d) { return Binary64::from_double(d); }

/// True for ±0, subnormals and normals.
constexpr bool is_finite(Binary64 x) { return x.biased_exponent() != 0x7FF; }

// Native binary64 arithmetic. The build disables FP contraction and x86-64
// evaluates in SSE2 double precision, so each call rounds exactly once (RNE).
inline Binary64 b64_add(Binary64 x, Binary64 y) { return b64(x.to_double() + y.to_double()); }
inline Binary64 b64_sub(Binary64 x, Binary64 y) { return b64(x.to_double() - y.to_double()); }
inline Binary64 b64_mul(Binary64 x, Binary64 y) { return b64(x.to_double() * y.to_double()); }
inline Binary64 b64_fma(Binary64 x, Binary64 y, Binary64 z) {
  return b64(std::fma(x.to_double(), y.to_double(), z.to_double()));
}

/// Treats every NaN as one class; otherwise bitwise.
inline bool same_value_class(Binary64 x, Binary64 y) {
  if (x.is_nan() || y.is_nan()) return x.is_nan() && y.is_nan();
  return x == y;
}

/// `0x` followed by 16 uppercase hex digits.
inline std::string to_hex(Binary64 x) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llX", static_cast<unsigned long long>(x.bits));
  return buf;
}

/// Shortest decimal string that parses back to the same bits.
inline std::string to_decimal(Binary64 x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x.to_double());
  if (ec != std::errc{}) return "?";
  return std::string(buf, end);
}

/// Parses a 16-digit hex bit pattern (`0x...`) or a decimal literal rounded
/// to nearest-even. Decimal also accepts `inf`, `-inf` and `nan`.
inline std::optional<Binary64> parse_binary64(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    auto digits = text.substr(2);
    if (digits.size() != 16) return std::nullopt;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, 16);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
    return Binary64{v};
  }
  if (text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double d = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
  if (ptr != text.data() + text.size()) return std::nullopt;
  // from_chars reports out-of-range for overflow/underflow but still rounds
  // correctly; only non-numeric input is an error.
  if (ec == std::errc::result_out_of_range) {
    // libstdc++ leaves d untouched on range errors; recover via strtod.
    std::string s(text);
    d = std::strtod(s.c_str(), nullptr);
  } else if (ec != std::errc{}) {
    return std::nullopt;
  }
  return b64(d);
}

}  // namespace fmatv
