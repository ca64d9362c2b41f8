#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace miot {

/// Exact non-floating rational number, always kept in lowest terms with a
/// positive denominator.
class Fraction {
 public:
  constexpr Fraction() = default;
  Fraction(std::int64_t numerator, std::int64_t denominator = 1);

  std::int64_t numerator() const { return num_; }
  std::int64_t denominator() const { return den_; }

  Fraction operator+(const Fraction& o) const;
  Fraction operator-(const Fraction& o) const;
  Fraction operator*(const Fraction& o) const;
  Fraction operator/(const Fraction& o) const;

  friend bool operator==(const Fraction&, const Fraction&) = default;
  std::strong_ordering operator<=>(const Fraction& o) const;

  /// Decimal rendering rounded half away from zero to exactly `digits`
  /// fractional digits.
  std::string to_decimal(int digits) const;

  /// Percentage with two decimals, e.g. "79.00%".
  std::string to_percent() const;

  /// Accepts "0.8", "80%", "4/5", "1". Exact; never goes through double.
  static Fraction parse(std::string_view text);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::string to_string(const Fraction& f);

}  // namespace miot
