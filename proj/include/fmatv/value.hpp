#pragma once

#include <string>
#include <variant>

#include "fmatv/binary64.hpp"
#include "fmatv/ir.hpp"

namespace fmatv {

struct Poison {
  DType ty = DType::Double;
  friend bool operator==(const Poison&, const Poison&) = default;
};

/// A defined value: a binary64 double or a typed poison.
struct Value {
  std::variant<Binary64, Poison> kind;

  static Value dbl(Binary64 v) { return Value{v}; }
  static Value dbl(double v) { return Value{b64(v)}; }
  static Value poison(DType t = DType::Double) { return Value{Poison{t}}; }

  bool is_double() const { return std::holds_alternative<Binary64>(kind); }
  bool is_poison() const { return std::holds_alternative<Poison>(kind); }
  Binary64 as_double() const { return std::get<Binary64>(kind); }
  DType poison_type() const { return std::get<Poison>(kind).ty; }

  // Bit-exact.
  friend bool operator==(const Value&, const Value&) = default;

  std::string str() const {
    if (is_poison()) return std::string("poison(") + to_string(poison_type()) + ")";
    return to_hex(as_double());
  }
};

/// Parses `poison`, a hex bit pattern, or a decimal literal.
inline std::optional<Value> parse_value(std::string_view text) {
  if (text == "poison") return Value::poison();
  if (auto v = parse_binary64(text)) return Value::dbl(*v);
  return std::nullopt;
}

}  // namespace fmatv
