#include "miot/fraction.h"

#include <cstdlib>
#include <limits>
#include <numeric>

#include "miot/error.h"

namespace miot {
namespace {

using i128 = __int128;

std::int64_t narrow(i128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min()) {
    throw DomainError("fraction overflow");
  }
  return static_cast<std::int64_t>(v);
}

Fraction make(i128 num, i128 den) {
  if (den == 0) throw DomainError("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 a = num < 0 ? -num : num;
  i128 b = den;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  return Fraction(narrow(num), narrow(den));
}

}  // namespace

Fraction::Fraction(std::int64_t numerator, std::int64_t denominator) {
  if (denominator == 0) throw DomainError("zero denominator");
  if (denominator < 0) {
    numerator = -numerator;
    denominator = -denominator;
  }
  const std::int64_t g = std::gcd(numerator, denominator);
  num_ = g > 1 ? numerator / g : numerator;
  den_ = g > 1 ? denominator / g : denominator;
}

Fraction Fraction::operator+(const Fraction& o) const {
  return make(i128(num_) * o.den_ + i128(o.num_) * den_, i128(den_) * o.den_);
}

Fraction Fraction::operator-(const Fraction& o) const {
  return make(i128(num_) * o.den_ - i128(o.num_) * den_, i128(den_) * o.den_);
}

Fraction Fraction::operator*(const Fraction& o) const {
  return make(i128(num_) * o.num_, i128(den_) * o.den_);
}

Fraction Fraction::operator/(const Fraction& o) const {
  return make(i128(num_) * o.den_, i128(den_) * o.num_);
}

std::strong_ordering Fraction::operator<=>(const Fraction& o) const {
  const i128 lhs = i128(num_) * o.den_;
  const i128 rhs = i128(o.num_) * den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string Fraction::to_decimal(int digits) const {
  i128 scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const bool negative = num_ < 0;
  const i128 mag = negative ? -i128(num_) : i128(num_);
  // round half away from zero: floor((2*mag*scale + den) / (2*den))
  const i128 scaled = (2 * mag * scale + den_) / (2 * i128(den_));
  const i128 whole = scaled / scale;
  i128 frac = scaled % scale;

  std::string out = std::to_string(static_cast<long long>(whole));
  if (digits > 0) {
    std::string tail(static_cast<std::size_t>(digits), '0');
    for (int i = digits - 1; i >= 0; --i) {
      tail[static_cast<std::size_t>(i)] = static_cast<char>('0' + static_cast<int>(frac % 10));
      frac /= 10;
    }
    out += '.';
    out += tail;
  }
  if (negative && scaled != 0) out.insert(out.begin(), '-');
  return out;
}

std::string Fraction::to_percent() const { return (*this * Fraction(100)).to_decimal(2) + "%"; }

Fraction Fraction::parse(std::string_view text) {
  auto fail = [&]() -> Fraction {
    throw ParseError("not an exact number: '" + std::string(text) + "'");
  };
  if (text.empty()) return fail();

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const Fraction n = parse(text.substr(0, slash));
    const Fraction d = parse(text.substr(slash + 1));
    if (d == Fraction(0)) return fail();
    return n / d;
  }

  bool percent = false;
  if (text.back() == '%') {
    percent = true;
    text.remove_suffix(1);
  }
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  if (text.empty()) return fail();

  i128 num = 0;
  i128 den = 1;
  bool seen_point = false;
  bool seen_digit = false;
  for (char c : text) {
    if (c == '.') {
      if (seen_point) return fail();
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') return fail();
    seen_digit = true;
    num = num * 10 + (c - '0');
    if (seen_point) den *= 10;
    if (num > i128(std::numeric_limits<std::int64_t>::max()) ||
        den > i128(std::numeric_limits<std::int64_t>::max())) {
      return fail();
    }
  }
  if (!seen_digit) return fail();
  if (negative) num = -num;
  if (percent) den *= 100;
  return make(num, den);
}

std::string to_string(const Fraction& f) {
  return std::to_string(f.numerator()) + "/" + std::to_string(f.denominator());
}

}  // namespace miot
