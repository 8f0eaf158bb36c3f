#pragma once

// Hoelder functions on the Sierpinski triangle: piecewise affine tables on
// V_n, the Bernoulli-measure witness, grafting, and finite certificates.

#include "hl/exact.hpp"
#include "hl/parallel.hpp"
#include "hl/triangle_geometry.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hl {

struct HolderParams {
  double alpha = 1.0;
  double c = 1.0;
  std::optional<double> M;

  HolderParams(double alpha_, double c_, std::optional<double> M_ = std::nullopt) : alpha(alpha_), c(c_), M(M_) {
    if (!(alpha > 0 && alpha <= 1)) throw std::invalid_argument("alpha must lie in (0,1]");
    if (!(c > 0)) throw std::invalid_argument("Hoelder constant must be positive");
    if (M && !(*M > 0)) throw std::invalid_argument("Lipschitz constant must be positive");
  }
};

// ---------------------------------------------------------------------------
// Piecewise affine functions.

/// Vertex-value table on V_n, extended affinely over every level-n triangle.
class PiecewiseAffineFn {
 public:
  static constexpr int kMaxLevel = 12;

  /// Fills V_n by calling init on every vertex, in vertex_set(n) order.
  PiecewiseAffineFn(int level, const std::function<Rational(const LatticePoint&)>& init) : level_(level) {
    if (level < 0 || level > kMaxLevel) throw std::invalid_argument("piecewise affine level out of range");
    side_ = std::int64_t{1} << level;
    const std::size_t size = static_cast<std::size_t>((side_ + 1) * (side_ + 2) / 2);
    values_.resize(size);
    present_.assign(size, false);
    for (const LatticePoint& p : vertex_set(level)) {
      const std::size_t i = index(p.u, p.v);
      values_[i] = init(p);
      present_[i] = true;
    }
    standard_ = check_standard();
  }

  /// Level-0 function with values (f1, f2, f3) at the vertices of the unit triangle.
  static PiecewiseAffineFn affine(const Rational& f1, const Rational& f2, const Rational& f3) {
    const std::array<Rational, 3> vals{f1, f2, f3};
    return PiecewiseAffineFn(0, [&](const LatticePoint& p) { return vals[static_cast<std::size_t>(p.u + 2 * p.v)]; });
  }

  int level() const { return level_; }
  bool standard() const { return standard_; }

  /// Value at a vertex of V_n; p may be given at any depth.
  const Rational& at(const LatticePoint& p) const {
    const LatticePoint c = p.canonical();
    if (c.depth > level_) throw std::invalid_argument("point is not a vertex of V_n");
    const LatticePoint q = c.at_depth(level_);
    if (q.u < 0 || q.v < 0 || q.u + q.v > side_ || !present_[index(q.u, q.v)])
      throw std::invalid_argument("point is not a vertex of V_n");
    return values_[index(q.u, q.v)];
  }

  /// Values at (v1, v2, v3) of a construction cell of any depth. Cells finer
  /// than the table are evaluated through the affine extension.
  std::array<Rational, 3> values_on(const Cell& c) const {
    if (!is_construction_cell(c)) throw std::invalid_argument("not a construction triangle");
    const auto vs = c.vertices();
    if (c.depth <= level_) return {at(vs[0]), at(vs[1]), at(vs[2])};
    const int s = c.depth - level_;
    const Cell anc{c.u >> s, c.v >> s, level_};
    const auto base = values_on(anc);
    std::array<Rational, 3> out;
    for (std::size_t i = 0; i < 3; ++i) out[i] = interpolate(anc, base, vs[i]);
    return out;
  }

  Rational eval(const LatticePoint& p) const {
    const auto cells = cells_containing(p, level_);
    if (cells.empty()) throw std::invalid_argument("point lies outside Delta_n");
    return interpolate(cells.front(), values_on(cells.front()), p);
  }

  Rational eval(const PointQ3& x) const { return eval(lattice_point_of(x)); }

  /// Squared Lipschitz constant: the largest squared gradient over all
  /// level-n triangles, exact.
  Rational lipschitz_sq() const {
    Rational best = 0;
    const Rational s2 = pow2(-2 * level_);
    for_each_cell([&](const Cell& c) {
      const auto v = values_on(c);
      const Rational g = (3 * (v[1] - v[0]) * (v[1] - v[0]) + (2 * v[2] - v[0] - v[1]) * (2 * v[2] - v[0] - v[1])) / (3 * s2);
      if (g > best) best = g;
    });
    return best;
  }
  double lipschitz() const { return std::sqrt(to_double(lipschitz_sq())); }

  /// Largest |max - min| of the vertex values over level-n triangles.
  Rational max_oscillation() const {
    Rational best = 0;
    for_each_cell([&](const Cell& c) {
      const auto v = values_on(c);
      const Rational osc = std::max({v[0], v[1], v[2]}) - std::min({v[0], v[1], v[2]});
      if (osc > best) best = osc;
    });
    return best;
  }

  void for_each_cell(const std::function<void(const Cell&)>& fn) const {
    std::function<void(const Cell&)> walk = [&](const Cell& c) {
      if (c.depth == level_) {
        fn(c);
        return;
      }
      for (int i = 0; i < 3; ++i) walk(c.child(i));
    };
    walk(Cell{});
  }

  /// (vertex, value) pairs in vertex_set order.
  std::vector<std::pair<LatticePoint, Rational>> entries() const {
    std::vector<std::pair<LatticePoint, Rational>> out;
    for (const LatticePoint& p : vertex_set(level_)) out.emplace_back(p, values_[index(p.u, p.v)]);
    return out;
  }

  friend bool operator==(const PiecewiseAffineFn& a, const PiecewiseAffineFn& b) {
    return a.level_ == b.level_ && a.values_ == b.values_ && a.present_ == b.present_;
  }

 private:
  std::size_t index(std::int64_t u, std::int64_t v) const {
    return static_cast<std::size_t>(v * (side_ + 1) - v * (v - 1) / 2 + u);
  }

  static Rational interpolate(const Cell& cell, const std::array<Rational, 3>& vals, const LatticePoint& p) {
    const auto w = barycentric(cell, p);
    return w[0] * vals[0] + w[1] * vals[1] + w[2] * vals[2];
  }

  bool check_standard() const {
    bool ok = true;
    for_each_cell([&](const Cell& c) {
      const auto v = values_on(c);
      if (v[0] != v[1] && v[1] != v[2] && v[0] != v[2]) ok = false;
    });
    return ok;
  }

  int level_ = 0;
  std::int64_t side_ = 1;
  std::vector<Rational> values_;
  std::vector<bool> present_;
  bool standard_ = false;
};

/// Refines f to level n'+1 so that every child triangle carries a repeated
/// value: each edge midpoint copies one endpoint (v1v2 -> v1, v2v3 -> v2,
/// v1v3 -> v3).
inline PiecewiseAffineFn standardize(const PiecewiseAffineFn& f) {
  const int n = f.level();
  return PiecewiseAffineFn(n + 1, [&](const LatticePoint& p) -> Rational {
    const bool odd_u = p.u % 2 != 0;
    const bool odd_v = p.v % 2 != 0;
    const std::int64_t i = p.u >> 1;
    const std::int64_t j = p.v >> 1;
    if (!odd_u && !odd_v) return f.at(LatticePoint{i, j, n});
    if (odd_u && !odd_v) return f.at(LatticePoint{i, j, n});      // midpoint of v1v2
    if (!odd_u && odd_v) return f.at(LatticePoint{i, j + 1, n});  // midpoint of v1v3
    return f.at(LatticePoint{i + 1, j, n});                        // midpoint of v2v3
  });
}

/// True when no level-n triangle has three equal vertex values.
inline bool locally_nonconstant(const PiecewiseAffineFn& f) {
  bool ok = true;
  f.for_each_cell([&](const Cell& c) {
    const auto v = f.values_on(c);
    if (v[0] == v[1] && v[1] == v[2]) ok = false;
  });
  return ok;
}

// ---------------------------------------------------------------------------
// Hoelder certificates over lattice vertex sets.

struct HolderCertificate {
  double alpha = 1.0;
  double c = 1.0;
  int depth = 0;
  double max_ratio = 0.0;
  LatticePoint x;
  LatticePoint y;
  /// Edge-chaining factor (4/sqrt3)^alpha relating vertex pairs to all pairs.
  double safety_factor = 1.0;
  bool pass = true;
};

/// max |f(x) - f(y)| / |x - y|^alpha over all pairs of the given lattice
/// points (all at the same depth). Uses a table of |x - y|^-alpha indexed by
/// the lattice offset, so the pair loop is one lookup per pair.
inline HolderCertificate holder_certificate_points(const std::vector<LatticePoint>& pts, const std::vector<double>& vals,
                                                   int depth, double alpha, double c) {
  if (pts.size() != vals.size()) throw std::invalid_argument("point and value counts differ");
  if (depth > 10) throw std::invalid_argument("exhaustive certificate limited to depth <= 10");
  HolderCertificate cert;
  cert.alpha = alpha;
  cert.c = c;
  cert.depth = depth;
  cert.safety_factor = std::pow(4.0 / std::sqrt(3.0), alpha);
  const std::int64_t S = std::int64_t{1} << depth;
  const std::int64_t W = 2 * S + 1;
  std::vector<double> inv_pow(static_cast<std::size_t>(W * W), 0.0);
  const double unit = std::ldexp(1.0, -depth);
  for (std::int64_t du = -S; du <= S; ++du)
    for (std::int64_t dv = -S; dv <= S; ++dv) {
      const double d2 = static_cast<double>(du * du + du * dv + dv * dv) * unit * unit;
      inv_pow[static_cast<std::size_t>((du + S) * W + dv + S)] = d2 > 0 ? std::pow(d2, -alpha / 2) : 0.0;
    }
  struct Best {
    double ratio = 0;
    std::size_t i = 0, j = 0;
  };
  const std::size_t n = pts.size();
  const auto blocks = parallel_blocks(n, [&](std::size_t b, std::size_t e) {
    Best best;
    for (std::size_t i = b; i < e; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double w = inv_pow[static_cast<std::size_t>((pts[i].u - pts[j].u + S) * W + pts[i].v - pts[j].v + S)];
        const double r = std::abs(vals[i] - vals[j]) * w;
        if (r > best.ratio) best = {r, i, j};
      }
    return best;
  }, 64);
  Best best;
  for (const auto& b : blocks)
    if (b.ratio > best.ratio) best = b;
  cert.max_ratio = best.ratio;
  if (n > 1) {
    cert.x = pts[best.i];
    cert.y = pts[best.j];
  }
  cert.pass = cert.max_ratio <= c;
  return cert;
}

/// Vertex-pair certificate of f over V_m (m >= level of f).
inline HolderCertificate holder_certificate(const PiecewiseAffineFn& f, double alpha, double c, int m) {
  if (m < f.level()) throw std::invalid_argument("certificate depth below the function level");
  std::vector<LatticePoint> pts = vertex_set(m);
  std::vector<double> vals;
  vals.reserve(pts.size());
  for (const auto& p : pts) vals.push_back(to_double(f.eval(p)));
  return holder_certificate_points(pts, vals, m, alpha, c);
}

// ---------------------------------------------------------------------------
// Bernoulli measure lambda_p and its distribution function.

/// lambda_p of the dyadic interval with the given leading digits:
/// p^{#ones} (1-p)^{#zeros}.
template <class Real>
Real lambda_p_interval(std::span<const std::uint8_t> digits, const Real& p) {
  Real out = 1;
  const Real q = 1 - p;
  for (auto e : digits) {
    if (e > 1) throw std::invalid_argument("binary digit outside {0,1}");
    out *= (e ? p : q);
  }
  return out;
}

/// lambda_p([0, x)) for x = 0.e1 e2 ... en in binary.
template <class Real>
Real bernoulli_cdf(std::span<const std::uint8_t> digits, const Real& p) {
  Real sum = 0;
  Real prefix = 1;
  const Real q = 1 - p;
  for (auto e : digits) {
    if (e) {
      sum += prefix * q;
      prefix *= p;
    } else {
      prefix *= q;
    }
  }
  return sum;
}

/// lambda_p([x, 1)) as a sum of positive terms (no cancellation near x = 1).
template <class Real>
Real bernoulli_cocdf(std::span<const std::uint8_t> digits, const Real& p) {
  Real sum = 0;
  Real prefix = 1;
  const Real q = 1 - p;
  for (auto e : digits) {
    if (e) {
      prefix *= p;
    } else {
      sum += prefix * p;
      prefix *= q;
    }
  }
  return sum + prefix;
}

/// lambda_p([x, y)) for x < y given by digit strings of equal length,
/// computed from the common prefix so that close points lose no accuracy.
template <class Real>
Real bernoulli_interval(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y, const Real& p) {
  if (x.size() != y.size()) throw std::invalid_argument("digit strings of different length");
  std::size_t j = 0;
  while (j < x.size() && x[j] == y[j]) ++j;
  if (j == x.size()) return Real(0);
  if (x[j] > y[j]) throw std::invalid_argument("bernoulli_interval requires x < y");
  const Real head = lambda_p_interval<Real>(x.subspan(0, j), p);
  const Real q = 1 - p;
  return head * (q * bernoulli_cocdf<Real>(x.subspan(j + 1), p) + p * bernoulli_cdf<Real>(y.subspan(j + 1), p));
}

/// Binary digits of a dyadic rational in [0,1), all of them.
inline std::vector<std::uint8_t> dyadic_digits(Rational x) {
  if (x < 0 || x >= 1) throw std::invalid_argument("dyadic digits need x in [0,1)");
  const BigInt den = denominator(x);
  if ((den & (den - 1)) != 0) throw std::invalid_argument("not a dyadic rational");
  std::vector<std::uint8_t> out;
  while (x != 0) {
    x *= 2;
    if (x >= 1) {
      out.push_back(1);
      x -= 1;
    } else {
      out.push_back(0);
    }
  }
  return out;
}

/// Digits of m / 2^depth, most significant first, exactly depth of them.
inline std::vector<std::uint8_t> dyadic_digits(std::uint64_t m, int depth) {
  if (depth < 0 || depth > 63 || (depth < 64 && (m >> depth) != 0)) throw std::invalid_argument("m / 2^depth outside [0,1)");
  std::vector<std::uint8_t> out(static_cast<std::size_t>(depth));
  for (int i = 0; i < depth; ++i) out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((m >> (depth - 1 - i)) & 1u);
  return out;
}

/// The witness x -> lambda_p([0, x)) with p = 2^-alpha, used through the
/// second coordinate of Delta*.
class BernoulliWitnessFn {
 public:
  explicit BernoulliWitnessFn(double alpha, int max_depth = 64) : alpha_(alpha), p_(std::exp2(-alpha)), max_depth_(max_depth) {
    if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("witness needs alpha in (0,1) so that 1/2 < p < 1");
    if (max_depth < 1) throw std::invalid_argument("max_depth must be positive");
  }

  double alpha() const { return alpha_; }
  double p() const { return p_; }
  int max_depth() const { return max_depth_; }
  /// Bound on the error from truncating at max_depth digits.
  double truncation_error() const { return std::pow(p_, max_depth_); }

  /// F_p(t) for t in [0,1]; dyadic t are exact up to rounding, others are
  /// truncated at max_depth digits.
  double cdf(const Rational& t) const {
    if (t < 0 || t > 1) throw std::invalid_argument("witness argument outside [0,1]");
    if (t == 1) return 1.0;
    return bernoulli_cdf<double>(digits_of(t), p_);
  }
  double operator()(const StarPoint& x) const { return cdf(x.t); }

  /// lambda_p([s, t)) for s <= t, accurate for close arguments.
  double interval(const Rational& s, const Rational& t) const {
    if (s > t) throw std::invalid_argument("interval requires s <= t");
    if (t == 1) return bernoulli_cocdf<double>(digits_of(s), p_);
    auto a = digits_of(s);
    auto b = digits_of(t);
    const std::size_t len = std::max(a.size(), b.size());
    a.resize(len, 0);
    b.resize(len, 0);
    return bernoulli_interval<double>(a, b, p_);
  }

 private:
  std::vector<std::uint8_t> digits_of(Rational t) const {
    std::vector<std::uint8_t> out;
    for (int k = 0; k < max_depth_ && t != 0; ++k) {
      t *= 2;
      if (t >= 1) {
        out.push_back(1);
        t -= 1;
      } else {
        out.push_back(0);
      }
    }
    return out;
  }

  double alpha_;
  double p_;
  int max_depth_;
};

// ---------------------------------------------------------------------------
// Grafting the witness into a standard piecewise affine function.

struct GraftCertificate {
  double lipschitz = 0.0;     ///< M of the base
  int threshold = 0;          ///< smallest n' with M 2^{-n'(1-alpha)} < 1/100
  double constant = 0.0;      ///< max_T 3 |g(v3)-g(v1)| (2^{n'} 2/sqrt3)^alpha
  double predicted = 0.0;     ///< M 2^{-n'(1-alpha)} 3 (2/sqrt3)^alpha
  bool pass = false;          ///< constant < 1/8
};

/// Smallest n' >= 0 with M 2^{-n'(1-alpha)} < 1/100.
inline int graft_threshold(double M, double alpha) {
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("graft threshold needs alpha in (0,1)");
  if (M <= 0) return 0;
  int n = 0;
  while (M * std::exp2(-n * (1 - alpha)) >= 0.01) {
    if (++n > 10000) throw std::overflow_error("graft threshold does not exist in range");
  }
  return n;
}

/// f(x) = phi(Psi_T(x)) (g(v3) - g(v1)) + g(v1) on each T in tau_{n'}, where
/// v1, v2 are the two vertices of T carrying the repeated value of g.
class GraftedFn {
 public:
  GraftedFn(PiecewiseAffineFn base, int n_prime, BernoulliWitnessFn witness)
      : base_(std::move(base)), n_prime_(n_prime), witness_(witness) {
    if (!base_.standard()) throw std::invalid_argument("graft needs a standard piecewise affine base");
    if (n_prime_ < base_.level()) throw std::invalid_argument("graft level below the base level");
    lipschitz_ = base_.lipschitz();
    threshold_ = graft_threshold(lipschitz_, witness_.alpha());
    if (n_prime_ < threshold_)
      throw std::invalid_argument("graft level " + std::to_string(n_prime_) + " too small; need n' >= " +
                                  std::to_string(threshold_));
  }

  const PiecewiseAffineFn& base() const { return base_; }
  int level() const { return n_prime_; }
  const BernoulliWitnessFn& witness() const { return witness_; }

  /// Labels (v1, v2, v3) as geometric vertex indices of T: v1, v2 carry the
  /// repeated value (smaller index first). Base standardness persists under
  /// subdivision, so every T in tau_{n'} has such a pair.
  std::array<int, 3> labels(const Cell& T) const {
    const auto v = base_.values_on(T);
    if (v[0] == v[1]) return {0, 1, 2};
    if (v[0] == v[2]) return {0, 2, 1};
    if (v[1] == v[2]) return {1, 2, 0};
    throw std::logic_error("graft triangle without a repeated base value");
  }

  Similarity psi_of(const Cell& T) const { return Similarity(address_of(T), labels(T)); }

  /// Value at a lattice point; uses the first level-n' triangle containing it.
  Rational eval(const LatticePoint& x) const {
    const auto cells = cells_containing(x, n_prime_);
    if (cells.empty()) throw std::invalid_argument("point lies outside Delta_{n'}");
    return eval_in(cells.front(), x);
  }

  /// Value computed through a specific triangle T containing x.
  Rational eval_in(const Cell& T, const LatticePoint& x) const {
    const auto lab = labels(T);
    const auto v = base_.values_on(T);
    const auto w = barycentric(T, x);
    const Rational t = w[static_cast<std::size_t>(lab[2])];
    const Rational g1 = v[static_cast<std::size_t>(lab[0])];
    const Rational g3 = v[static_cast<std::size_t>(lab[2])];
    if (g1 == g3) return g1;
    const Rational phi(witness_.cdf(t));  // exact conversion of the double
    return phi * (g3 - g1) + g1;
  }

  double eval_double(const LatticePoint& x) const { return to_double(eval(x)); }

  /// Per-triangle Hoelder constant over tau_{n'}. Oscillation halves under
  /// each subdivision of a standard affine piece, so the maximum over
  /// tau_{n'} is the base maximum times 2^{level - n'}.
  GraftCertificate certificate() const {
    GraftCertificate cert;
    cert.lipschitz = lipschitz_;
    cert.threshold = threshold_;
    const double a = witness_.alpha();
    const double osc = std::ldexp(to_double(base_.max_oscillation()), base_.level() - n_prime_);
    cert.constant = 3.0 * osc * std::pow(std::ldexp(2.0 / std::sqrt(3.0), n_prime_), a);
    cert.predicted = lipschitz_ * std::exp2(-n_prime_ * (1 - a)) * 3.0 * std::pow(2.0 / std::sqrt(3.0), a);
    cert.pass = cert.constant < 0.125;
    return cert;
  }

  /// Same constant by enumerating every triangle of tau_{n'} (small n').
  double certificate_constant_enumerated() const {
    if (n_prime_ > 12) throw std::invalid_argument("enumeration limited to n' <= 12");
    double worst = 0;
    const double scale = std::pow(std::ldexp(2.0 / std::sqrt(3.0), n_prime_), witness_.alpha());
    std::function<void(const Cell&)> walk = [&](const Cell& c) {
      if (c.depth == n_prime_) {
        const auto lab = labels(c);
        const auto v = base_.values_on(c);
        const Rational gap = abs(v[static_cast<std::size_t>(lab[2])] - v[static_cast<std::size_t>(lab[0])]);
        worst = std::max(worst, 3.0 * to_double(gap) * scale);
        return;
      }
      for (int i = 0; i < 3; ++i) walk(c.child(i));
    };
    walk(Cell{});
    return worst;
  }

 private:
  PiecewiseAffineFn base_;
  int n_prime_;
  BernoulliWitnessFn witness_;
  double lipschitz_ = 0.0;
  int threshold_ = 0;
};

inline GraftedFn graft(const PiecewiseAffineFn& g, int n_prime, const BernoulliWitnessFn& witness) {
  return GraftedFn(g, n_prime, witness);
}

// ---------------------------------------------------------------------------
// Seeded sampler standing in for generic functions.

/// Uniform double in [0,1) from the top 53 bits of a 64-bit draw.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Multiple of 2^-40 nearest to x.
inline Rational quantize(double x) {
  return Rational(static_cast<long long>(std::llround(std::ldexp(x, 40)))) / pow2(40);
}

class SamplerExhausted : public std::runtime_error {
 public:
  SamplerExhausted(const std::string& msg, LatticePoint x, LatticePoint y)
      : std::runtime_error(msg), x_(x), y_(y) {}
  LatticePoint x() const { return x_; }
  LatticePoint y() const { return y_; }

 private:
  LatticePoint x_;
  LatticePoint y_;
};

/// Standard piecewise affine function at level n whose vertex-pair Hoelder
/// ratio over V_{n+2} is at most c. Midpoint displacement on V_{n-1} with
/// amplitude c 2^{-k alpha} h at level k, then one standardization step; the
/// headroom h halves whenever the certificate fails.
inline PiecewiseAffineFn random_standard_paf(std::uint64_t seed, int n, double alpha, double c, int max_attempts = 20) {
  if (n < 1) throw std::invalid_argument("random_standard_paf needs n >= 1");
  if (n + 2 > 10) throw std::invalid_argument("random_standard_paf limited to n <= 8");
  if (!(alpha > 0 && alpha <= 1)) throw std::invalid_argument("alpha must lie in (0,1]");
  if (!(c > 0 && c < 1)) throw std::invalid_argument("random_standard_paf needs 0 < c < 1");
  std::mt19937_64 rng(seed);
  double h = 0.25;
  LatticePoint bad_x, bad_y;
  for (int attempt = 0; attempt < max_attempts; ++attempt, h /= 2) {
    const double amp0 = c * h;
    PiecewiseAffineFn f = PiecewiseAffineFn::affine(0, quantize(amp0 * (2 * uniform01(rng) - 1)),
                                                    quantize(amp0 * (2 * uniform01(rng) - 1)));
    for (int k = 1; k <= n - 1; ++k) {
      const double amp = c * std::exp2(-k * alpha) * h;
      const PiecewiseAffineFn& prev = f;
      f = PiecewiseAffineFn(k, [&](const LatticePoint& p) -> Rational {
        if (p.u % 2 == 0 && p.v % 2 == 0) return prev.at(p);
        LatticePoint a, b;
        if (p.v % 2 == 0) {
          a = {p.u - 1, p.v, k};
          b = {p.u + 1, p.v, k};
        } else if (p.u % 2 == 0) {
          a = {p.u, p.v - 1, k};
          b = {p.u, p.v + 1, k};
        } else {
          a = {p.u + 1, p.v - 1, k};
          b = {p.u - 1, p.v + 1, k};
        }
        const Rational mid = (prev.at(a) + prev.at(b)) / 2;
        return mid + quantize(amp * (2 * uniform01(rng) - 1));
      });
    }
    bool distinct = true;
    f.for_each_cell([&](const Cell& cell) {
      const auto v = f.values_on(cell);
      if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2]) distinct = false;
    });
    if (!distinct) continue;
    PiecewiseAffineFn g = standardize(f);
    const HolderCertificate cert = holder_certificate(g, alpha, c, n + 2);
    if (cert.pass) return g;
    bad_x = cert.x;
    bad_y = cert.y;
  }
  std::ostringstream msg;
  msg << "random_standard_paf: resampling cap exceeded; last failing pair (" << bad_x.u << "," << bad_x.v << ","
      << bad_x.depth << ") - (" << bad_y.u << "," << bad_y.v << "," << bad_y.depth << ")";
  throw SamplerExhausted(msg.str(), bad_x, bad_y);
}

}  // namespace hl
