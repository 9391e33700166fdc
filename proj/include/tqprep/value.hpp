#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace tqprep {

// A single table cell. Float cells are never NaN.
class Value {
 public:
  enum class Kind { Null, Bool, Int, Float, Str };

  Value() = default;
  static Value null() { return Value(); }
  static Value boolean(bool b) { return Value(Repr(b)); }
  static Value integer(std::int64_t i) { return Value(Repr(i)); }
  // Throws std::invalid_argument for NaN.
  static Value real(double d);
  static Value str(std::string s) { return Value(Repr(std::move(s))); }

  Kind kind() const { return static_cast<Kind>(repr_.index()); }
  bool is_null() const { return kind() == Kind::Null; }
  bool is_bool() const { return kind() == Kind::Bool; }
  bool is_int() const { return kind() == Kind::Int; }
  bool is_float() const { return kind() == Kind::Float; }
  bool is_str() const { return kind() == Kind::Str; }
  bool is_numeric() const { return is_int() || is_float(); }

  bool as_bool() const { return std::get<bool>(repr_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(repr_); }
  double as_float() const { return std::get<double>(repr_); }
  const std::string& as_str() const { return std::get<std::string>(repr_); }
  // Int or Float widened to double.
  double as_number() const { return is_int() ? static_cast<double>(as_int()) : as_float(); }

  // Cell text: Null -> "", Bool -> "true"/"false", Float -> shortest round-trip.
  std::string to_text() const;

  friend bool operator==(const Value& a, const Value& b) { return a.repr_ == b.repr_; }

 private:
  using Repr = std::variant<std::monostate, bool, std::int64_t, double, std::string>;
  explicit Value(Repr r) : repr_(std::move(r)) {}
  Repr repr_;
};

const char* kind_name(Value::Kind k);

// Shortest decimal text that round-trips to d; always contains '.', 'e', "inf" or "nan".
std::string format_double(double d);

// Parses a whole string (after trimming ASCII whitespace) as a decimal number.
// Integers without '.'/exponent come back as Int when they fit in 64 bits.
std::optional<Value> parse_number(std::string_view text);

}  // namespace tqprep
