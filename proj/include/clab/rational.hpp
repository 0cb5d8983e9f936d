#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace clab {

// Exact rational on int64, always normalized (den > 0, gcd(num,den) == 1).
// Arithmetic goes through __int128 and reports overflow instead of wrapping;
// the try_* variants return nullopt so simplification can leave a node folded
// only when the fold is exact.
class Rational {
 public:
  constexpr Rational() : num_(0), den_(1) {}
  Rational(std::int64_t n) : num_(n), den_(1) {}
  Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }
  bool negative() const { return num_ < 0; }
  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return (__int128)a.num_ * b.den_ < (__int128)b.num_ * a.den_;
  }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  static std::optional<Rational> make_checked(__int128 n, __int128 d) {
    if (d == 0) return std::nullopt;
    if (d < 0) { n = -n; d = -d; }
    __int128 g = gcd128(n < 0 ? -n : n, d);
    if (g > 1) { n /= g; d /= g; }
    if (!fits(n) || !fits(d)) return std::nullopt;
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }

  static std::optional<Rational> try_add(const Rational& a, const Rational& b) {
    return make_checked((__int128)a.num_ * b.den_ + (__int128)b.num_ * a.den_,
                        (__int128)a.den_ * b.den_);
  }
  static std::optional<Rational> try_sub(const Rational& a, const Rational& b) {
    return make_checked((__int128)a.num_ * b.den_ - (__int128)b.num_ * a.den_,
                        (__int128)a.den_ * b.den_);
  }
  static std::optional<Rational> try_mul(const Rational& a, const Rational& b) {
    return make_checked((__int128)a.num_ * b.num_, (__int128)a.den_ * b.den_);
  }
  static std::optional<Rational> try_div(const Rational& a, const Rational& b) {
    if (b.num_ == 0) return std::nullopt;
    return make_checked((__int128)a.num_ * b.den_, (__int128)a.den_ * b.num_);
  }
  // b^e for integer e; exact or nullopt.
  static std::optional<Rational> try_pow_int(const Rational& b, std::int64_t e) {
    if (e == 0) return Rational(1);
    Rational base = b;
    if (e < 0) {
      if (b.num_ == 0) return std::nullopt;
      base = Rational(b.den_, b.num_);
      e = -e;
    }
    if (e > 256) return std::nullopt;
    Rational acc(1);
    while (e > 0) {
      if (e & 1) {
        auto r = try_mul(acc, base);
        if (!r) return std::nullopt;
        acc = *r;
      }
      e >>= 1;
      if (e) {
        auto r = try_mul(base, base);
        if (!r) return std::nullopt;
        base = *r;
      }
    }
    return acc;
  }

  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Best rational approximation of x with |p/q - x| < tol, via continued
  // fractions. Used to freeze quadrature-derived constants exactly.
  static Rational approximate(double x, double tol);

 private:
  static bool fits(__int128 v) {
    return v >= INT64_MIN && v <= INT64_MAX;
  }
  static __int128 gcd128(__int128 a, __int128 b) {
    while (b) { __int128 t = a % b; a = b; b = t; }
    return a < 0 ? -a : a;
  }
  void normalize() {
    if (den_ == 0) throw std::invalid_argument("Rational: zero denominator");
    if (den_ < 0) { num_ = -num_; den_ = -den_; }
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) { num_ /= g; den_ /= g; }
  }

  std::int64_t num_;
  std::int64_t den_;
};

}  // namespace clab
