#pragma once

// Exact number types shared by every module: arbitrary precision rationals
// and the ring Z[1/2][sqrt 3] that holds all vertex coordinates of the
// Sierpinski construction.

#include <boost/multiprecision/gmp.hpp>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hl {

using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

inline Rational make_rational(long long num, long long den = 1) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  return Rational(num, den);
}

/// 2^e as an exact rational, e may be negative.
inline Rational pow2(int e) {
  BigInt p = 1;
  p <<= (e >= 0 ? e : -e);
  return e >= 0 ? Rational(p) : Rational(BigInt(1), p);
}

inline Rational rational_pow(const Rational& base, unsigned e) {
  Rational out = 1;
  Rational b = base;
  while (e != 0) {
    if (e & 1u) out *= b;
    b *= b;
    e >>= 1;
  }
  return out;
}

/// "num/den" with den > 0; integers still carry "/1".
inline std::string to_string(const Rational& q) {
  return numerator(q).str() + "/" + denominator(q).str();
}

inline Rational parse_rational(std::string_view s) {
  const auto slash = s.find('/');
  try {
    if (slash == std::string_view::npos) return Rational(BigInt(std::string(s)));
    BigInt num(std::string(s.substr(0, slash)));
    BigInt den(std::string(s.substr(slash + 1)));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("malformed rational '" + std::string(s) + "'");
  }
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline int sign(const Rational& q) { return q.sign(); }

/// Exact element (a + b*sqrt(3)) / 2^k of Z[1/2][sqrt 3].
///
/// Always kept canonical: k is minimal, so for k > 0 the pair (a, b) is not
/// both even. Components are 64-bit; operations that would overflow throw
/// std::overflow_error instead of wrapping.
class CoordQ3 {
 public:
  constexpr CoordQ3() = default;
  CoordQ3(std::int64_t a, std::int64_t b, int k) : a_(a), b_(b), k_(k) {
    if (k < 0) throw std::invalid_argument("CoordQ3 exponent must be non-negative");
    canonicalize();
  }

  static CoordQ3 integer(std::int64_t a) { return {a, 0, 0}; }
  static CoordQ3 sqrt3() { return {0, 1, 0}; }
  /// m / 2^j
  static CoordQ3 dyadic(std::int64_t m, int j) { return {m, 0, j}; }

  std::int64_t a() const { return a_; }
  std::int64_t b() const { return b_; }
  int k() const { return k_; }

  bool is_rational() const { return b_ == 0; }
  /// The rational part a/2^k (requires b == 0 for the full value).
  Rational rational_part() const { return Rational(a_) / pow2(k_); }
  /// The coefficient of sqrt(3), b/2^k.
  Rational sqrt3_part() const { return Rational(b_) / pow2(k_); }

  double to_double() const {
    return std::ldexp(static_cast<double>(a_) + static_cast<double>(b_) * 1.7320508075688772935, -k_);
  }

  friend CoordQ3 operator+(const CoordQ3& x, const CoordQ3& y) {
    const int k = std::max(x.k_, y.k_);
    return from_wide(shift(x.a_, k - x.k_) + shift(y.a_, k - y.k_),
                     shift(x.b_, k - x.k_) + shift(y.b_, k - y.k_), k);
  }
  friend CoordQ3 operator-(const CoordQ3& x) { return from_wide(-static_cast<__int128>(x.a_), -static_cast<__int128>(x.b_), x.k_); }
  friend CoordQ3 operator-(const CoordQ3& x, const CoordQ3& y) { return x + (-y); }
  friend CoordQ3 operator*(const CoordQ3& x, const CoordQ3& y) {
    const __int128 a = static_cast<__int128>(x.a_) * y.a_ + 3 * static_cast<__int128>(x.b_) * y.b_;
    const __int128 b = static_cast<__int128>(x.a_) * y.b_ + static_cast<__int128>(x.b_) * y.a_;
    return from_wide(a, b, x.k_ + y.k_);
  }
  /// Multiply by the dyadic rational m / 2^j.
  CoordQ3 scaled(std::int64_t m, int j) const {
    return from_wide(static_cast<__int128>(a_) * m, static_cast<__int128>(b_) * m, k_ + j);
  }
  CoordQ3 half() const { return scaled(1, 1); }

  CoordQ3& operator+=(const CoordQ3& y) { return *this = *this + y; }
  CoordQ3& operator-=(const CoordQ3& y) { return *this = *this - y; }

  /// Sign of the real number (exact).
  int sign() const {
    if (a_ >= 0 && b_ >= 0) return (a_ == 0 && b_ == 0) ? 0 : 1;
    if (a_ <= 0 && b_ <= 0) return -1;
    // Opposite signs: compare a^2 with 3 b^2.
    using U = unsigned __int128;
    const U ua = a_ < 0 ? U(-static_cast<__int128>(a_)) : U(a_);
    const U ub = b_ < 0 ? U(-static_cast<__int128>(b_)) : U(b_);
    const U a2 = ua * ua;
    const U b2 = 3 * ub * ub;
    if (a2 == b2) return 0;  // unreachable for integers, sqrt 3 is irrational
    return (a2 > b2) == (a_ > 0) ? 1 : -1;
  }

  friend bool operator==(const CoordQ3&, const CoordQ3&) = default;
  friend std::strong_ordering operator<=>(const CoordQ3& x, const CoordQ3& y) {
    const int s = (x - y).sign();
    return s < 0 ? std::strong_ordering::less
                 : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  /// "(a,b,k)"
  std::string str() const {
    return "(" + std::to_string(a_) + "," + std::to_string(b_) + "," + std::to_string(k_) + ")";
  }
  static CoordQ3 parse(std::string_view s);

 private:
  static __int128 shift(std::int64_t v, int by) {
    if (by >= 62) throw std::overflow_error("CoordQ3 exponent gap too large");
    return static_cast<__int128>(v) << by;
  }
  static CoordQ3 from_wide(__int128 a, __int128 b, int k) {
    while (k > 0 && (a % 2 == 0) && (b % 2 == 0)) {
      a /= 2;
      b /= 2;
      --k;
    }
    constexpr auto lo = static_cast<__int128>(std::numeric_limits<std::int64_t>::min());
    constexpr auto hi = static_cast<__int128>(std::numeric_limits<std::int64_t>::max());
    if (a < lo || a > hi || b < lo || b > hi) throw std::overflow_error("CoordQ3 component overflow");
    CoordQ3 out;
    out.a_ = static_cast<std::int64_t>(a);
    out.b_ = static_cast<std::int64_t>(b);
    out.k_ = k;
    return out;
  }
  void canonicalize() { *this = from_wide(a_, b_, k_); }

  std::int64_t a_ = 0;
  std::int64_t b_ = 0;
  int k_ = 0;
};

inline CoordQ3 CoordQ3::parse(std::string_view s) {
  auto fail = [&] { return std::invalid_argument("malformed CoordQ3 '" + std::string(s) + "'"); };
  if (s.size() < 7 || s.front() != '(' || s.back() != ')') throw fail();
  const std::string body(s.substr(1, s.size() - 2));
  const auto c1 = body.find(',');
  const auto c2 = body.find(',', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) throw fail();
  try {
    return CoordQ3(std::stoll(body.substr(0, c1)), std::stoll(body.substr(c1 + 1, c2 - c1 - 1)),
                   std::stoi(body.substr(c2 + 1)));
  } catch (const std::logic_error&) {
    throw fail();
  }
}

/// A planar point with exact coordinates.
struct PointQ3 {
  CoordQ3 x;
  CoordQ3 y;
  friend bool operator==(const PointQ3&, const PointQ3&) = default;
};

/// |p - q|^2, exact.
inline CoordQ3 distance_sq(const PointQ3& p, const PointQ3& q) {
  const CoordQ3 dx = p.x - q.x;
  const CoordQ3 dy = p.y - q.y;
  return dx * dx + dy * dy;
}

inline PointQ3 midpoint(const PointQ3& p, const PointQ3& q) {
  return {(p.x + q.x).half(), (p.y + q.y).half()};
}

}  // namespace hl
