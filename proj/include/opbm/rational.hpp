#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

#include "opbm/errors.hpp"

namespace opbm {

/// Exact rational over int64, always normalized (gcd 1, positive denominator).
/// Intermediate products run through __int128 and throw on overflow; the
/// library only needs desk-scale values.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den) { assign(num, den); }
  explicit Rational(std::int64_t num) { assign(num, 1); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  Rational operator+(const Rational& o) const {
    return from128(i128(num_) * o.den_ + i128(o.num_) * den_, i128(den_) * o.den_);
  }
  Rational operator-(const Rational& o) const {
    return from128(i128(num_) * o.den_ - i128(o.num_) * den_, i128(den_) * o.den_);
  }
  Rational operator*(const Rational& o) const {
    return from128(i128(num_) * o.num_, i128(den_) * o.den_);
  }
  Rational operator/(const Rational& o) const {
    if (o.num_ == 0) throw Error("rational division by zero");
    return from128(i128(num_) * o.den_, i128(den_) * o.num_);
  }
  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const { return i128(num_) * o.den_ < i128(o.num_) * den_; }
  bool operator<=(const Rational& o) const { return i128(num_) * o.den_ <= i128(o.num_) * den_; }
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator>=(const Rational& o) const { return o <= *this; }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  /// Parses "a/b", a decimal string ("0.25", "3."), or a plain integer.
  /// Decimal strings convert exactly: digits over a power of ten.
  static Rational parse(const std::string& text);

 private:
  using i128 = __int128;

  void assign(std::int64_t num, std::int64_t den) {
    if (den == 0) throw Error("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    num_ = num;
    den_ = den;
  }

  static Rational from128(i128 num, i128 den) {
    if (den == 0) throw Error("rational with zero denominator");
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
    constexpr i128 lim = INT64_MAX;
    if (num > lim || num < -lim || den > lim) throw Error("rational overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(num);
    r.den_ = static_cast<std::int64_t>(den);
    return r;
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline Rational Rational::parse(const std::string& text) {
  if (text.empty()) throw ParseError("empty rational literal");
  auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      std::size_t pa = 0, pb = 0;
      std::int64_t a = std::stoll(text.substr(0, slash), &pa);
      std::string den_part = text.substr(slash + 1);
      std::int64_t b = std::stoll(den_part, &pb);
      if (pa != slash || pb != den_part.size()) throw ParseError("bad rational literal: " + text);
      return Rational(a, b);
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) {
      std::size_t p = 0;
      std::int64_t a = std::stoll(text, &p);
      if (p != text.size()) throw ParseError("bad rational literal: " + text);
      return Rational(a);
    }
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    if (digits.empty() || digits == "-") throw ParseError("bad rational literal: " + text);
    std::size_t p = 0;
    std::int64_t a = std::stoll(digits, &p);
    if (p != digits.size()) throw ParseError("bad rational literal: " + text);
    std::int64_t den = 1;
    for (std::size_t i = 0; i < text.size() - dot - 1; ++i) {
      if (den > INT64_MAX / 10) throw ParseError("rational literal too precise: " + text);
      den *= 10;
    }
    return Rational(a, den);
  } catch (const std::invalid_argument&) {
    throw ParseError("bad rational literal: " + text);
  } catch (const std::out_of_range&) {
    throw ParseError("rational literal out of range: " + text);
  }
}

}  // namespace opbm
