#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace fraudaware {

/// Fixed-point currency in integer cents. All accounting goes through this
/// type so that cash conservation can be asserted exactly.
class Money {
 public:
  constexpr Money() = default;

  static constexpr Money from_cents(std::int64_t cents) { return Money(cents); }
  /// Rounds to the nearest cent (half away from zero).
  static Money from_units(double units);
  /// Exact parse of "123", "123.4" or "123.45" (optional leading '-').
  static Money parse(std::string_view text);

  constexpr std::int64_t cents() const { return cents_; }
  constexpr double units() const { return static_cast<double>(cents_) / 100.0; }

  constexpr Money operator+(Money o) const { return Money(cents_ + o.cents_); }
  constexpr Money operator-(Money o) const { return Money(cents_ - o.cents_); }
  constexpr Money operator-() const { return Money(-cents_); }
  constexpr Money operator*(std::int64_t n) const { return Money(cents_ * n); }
  constexpr Money& operator+=(Money o) {
    cents_ += o.cents_;
    return *this;
  }
  constexpr Money& operator-=(Money o) {
    cents_ -= o.cents_;
    return *this;
  }

  constexpr auto operator<=>(const Money&) const = default;

  /// "1234.50" style rendering, no currency symbol.
  std::string to_string() const;

 private:
  constexpr explicit Money(std::int64_t cents) : cents_(cents) {}
  std::int64_t cents_ = 0;
};

}  // namespace fraudaware
