#pragma once

// Dimension bounds for generic level sets on the Sierpinski triangle: the
// conductivity lower bound, the witness upper bound 1 - 2^-alpha, the trivial
// bound, the feasibility condition on l, and box-count estimates.

#include "hl/exact.hpp"
#include "hl/holder_functions.hpp"
#include "hl/levelset.hpp"
#include "hl/triangle_geometry.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hl {

using BigFloat = boost::multiprecision::cpp_bin_float_50;

/// (alpha/2) / (1 + (1 + log(3/alpha))/log 2 + 2/alpha)
template <class Real>
Real lower_bound_t(const Real& alpha) {
  using std::log;
  using boost::multiprecision::log;
  if (!(alpha > 0)) throw std::invalid_argument("lower_bound needs alpha > 0");
  if (alpha > 1) throw std::invalid_argument("lower_bound needs alpha <= 1");
  const Real ln2 = log(Real(2));
  return (alpha / 2) / (1 + (1 + log(Real(3) / alpha)) / ln2 + 2 / alpha);
}

/// 1 - 2^-alpha
template <class Real>
Real upper_bound_t(const Real& alpha) {
  using std::exp;
  using boost::multiprecision::exp;
  using std::log;
  using boost::multiprecision::log;
  if (!(alpha > 0) || alpha > 1) throw std::invalid_argument("upper_bound needs alpha in (0,1]");
  return 1 - exp(-alpha * log(Real(2)));
}

/// log2(3) - 1: box dimension of the triangle minus one.
template <class Real>
Real trivial_upper_bound_t() {
  using std::log;
  using boost::multiprecision::log;
  return log(Real(3)) / log(Real(2)) - 1;
}

inline double lower_bound(double alpha) { return lower_bound_t<double>(alpha); }
inline double upper_bound(double alpha) { return upper_bound_t<double>(alpha); }
inline double trivial_upper_bound_sierpinski() { return trivial_upper_bound_t<double>(); }

inline BigFloat lower_bound_big(const BigFloat& alpha) { return lower_bound_t<BigFloat>(alpha); }
inline BigFloat upper_bound_big(const BigFloat& alpha) { return upper_bound_t<BigFloat>(alpha); }
inline BigFloat trivial_upper_bound_big() { return trivial_upper_bound_t<BigFloat>(); }

/// Left side of the feasibility condition on l:
/// (d1 (1 + log(3/(2 d1))) + log 2) / ((alpha - d1) log 2).
inline double lcondition_lhs(double alpha, double d1) {
  if (!(d1 > 0)) throw std::invalid_argument("d1 must be positive");
  if (!(d1 < alpha)) throw std::invalid_argument("d1 must be smaller than alpha");
  const double ln2 = std::log(2.0);
  return (d1 * (1 + std::log(3 / (2 * d1))) + ln2) / ((alpha - d1) * ln2);
}

inline bool lcondition_holds(double alpha, double d1, int l) { return lcondition_lhs(alpha, d1) < l; }

/// Smallest integer l strictly above the feasibility threshold.
inline int feasible_l(double alpha, double d1) {
  const double lhs = lcondition_lhs(alpha, d1);
  if (lhs > 1e6) throw std::overflow_error("feasible l beyond 10^6 (d1 too close to alpha)");
  return static_cast<int>(std::floor(lhs)) + 1;
}

/// Best rational approximation of alpha/2 with denominator <= max_den.
inline Rational default_d1(double alpha, int max_den = 64) {
  if (!(alpha > 0 && alpha <= 1)) throw std::invalid_argument("alpha must lie in (0,1]");
  const double target = alpha / 2;
  Rational best;
  double err = 1e300;
  for (int q = 1; q <= max_den; ++q) {
    const long p = std::max(1L, std::lround(target * q));
    const double e = std::abs(static_cast<double>(p) / q - target);
    if (e < err - 1e-15) {
      err = e;
      best = Rational(p, q);
    }
  }
  return best;
}

struct BoundSearchParams {
  double alpha = 1.0;
  Rational d1;
  int q = 1;
  int l = 1;

  BoundSearchParams(double alpha_, Rational d1_, int l_) : alpha(alpha_), d1(std::move(d1_)), l(l_) {
    if (!(alpha > 0 && alpha <= 1)) throw std::invalid_argument("alpha must lie in (0,1]");
    if (d1 <= 0 || !(to_double(d1) < alpha)) throw std::invalid_argument("need 0 < d1 < alpha");
    if (l < 1) throw std::invalid_argument("l must be positive");
    q = denominator(d1).convert_to<int>();
  }
  bool feasible() const { return lcondition_holds(alpha, to_double(d1), l); }
};

// ---------------------------------------------------------------------------
// Box counting.

struct DimensionEstimate {
  std::vector<std::pair<int, double>> counts;  ///< (n, log2 N_n)
  double slope = 0.0;
  double residual = 0.0;  ///< root mean square residual of the fit
  bool empty = false;
};

/// Least-squares slope of log2 N_n against n over the last `fraction` of the
/// levels (at least two points).
inline void fit_slope(DimensionEstimate& est, double fraction = 0.5) {
  const std::size_t m = est.counts.size();
  if (m < 2) {
    est.slope = 0;
    est.residual = 0;
    return;
  }
  std::size_t start = m - std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(m))));
  double sx = 0, sy = 0;
  const double k = static_cast<double>(m - start);
  for (std::size_t i = start; i < m; ++i) {
    sx += est.counts[i].first;
    sy += est.counts[i].second;
  }
  const double mx = sx / k, my = sy / k;
  double sxx = 0, sxy = 0;
  for (std::size_t i = start; i < m; ++i) {
    const double dx = est.counts[i].first - mx;
    sxx += dx * dx;
    sxy += dx * (est.counts[i].second - my);
  }
  est.slope = sxx > 0 ? sxy / sxx : 0;
  double ss = 0;
  for (std::size_t i = start; i < m; ++i) {
    const double r = est.counts[i].second - (my + est.slope * (est.counts[i].first - mx));
    ss += r * r;
  }
  est.residual = std::sqrt(ss / k);
}

/// Box-count trace for the witness level set at height y given by digits:
/// log2 N_n is the number of zero digits among the first n.
inline DimensionEstimate box_count_witness(std::span<const std::uint8_t> digits, double fraction = 0.5) {
  DimensionEstimate est;
  std::int64_t zeros = 0;
  for (std::size_t n = 1; n <= digits.size(); ++n) {
    if (digits[n - 1] > 1) throw std::invalid_argument("binary digit outside {0,1}");
    zeros += digits[n - 1] == 0;
    est.counts.emplace_back(static_cast<int>(n), static_cast<double>(zeros));
  }
  fit_slope(est, fraction);
  return est;
}

/// n i.i.d. digits equal to 1 with probability p.
inline std::vector<std::uint8_t> bernoulli_digits(std::uint64_t seed, int n, double p) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(n));
  for (auto& e : out) e = uniform01(rng) < p ? 1 : 0;
  return out;
}

/// Box-count trace for a piecewise affine f at height y: N_n counts level-n
/// triangles whose vertex-value hull strictly contains y. Up to the table
/// level all of tau_n is scanned; below it f is affine on each triangle, so
/// members only arise inside members.
inline DimensionEstimate box_count_dimension(const PiecewiseAffineFn& f, const Rational& y, int n_max,
                                             double fraction = 0.5) {
  DimensionEstimate est;
  std::vector<Cell> current;
  for (int n = 0; n <= n_max; ++n) {
    std::vector<Cell> next;
    if (n <= f.level()) {
      std::function<void(const Cell&)> walk = [&](const Cell& c) {
        if (c.depth == n) {
          const auto v = f.values_on(c);
          for (std::size_t i = 0; i < 3; ++i)
            if (v[i] == y) throw LevelCollision(c.vertices()[i].canonical(), y);
          if (straddles(v, y)) next.push_back(c);
          return;
        }
        for (int i = 0; i < 3; ++i) walk(c.child(i));
      };
      walk(Cell{});
    } else {
      for (const Cell& c : current)
        for (int i = 0; i < 3; ++i) {
          const Cell ch = c.child(i);
          const auto v = f.values_on(ch);
          for (std::size_t j = 0; j < 3; ++j)
            if (v[j] == y) throw LevelCollision(ch.vertices()[j].canonical(), y);
          if (straddles(v, y)) next.push_back(ch);
        }
    }
    current = std::move(next);
    if (current.empty()) {
      // below the table level nothing can reappear
      if (n >= f.level()) {
        est.empty = true;
        break;
      }
      continue;
    }
    est.counts.emplace_back(n, std::log2(static_cast<double>(current.size())));
  }
  if (est.empty) {
    est.slope = 0;
    return est;
  }
  fit_slope(est, fraction);
  return est;
}

// ---------------------------------------------------------------------------
// Mass distribution check.

struct MassDistributionResult {
  double s = 0.0;            ///< d1 / l
  bool verified = false;
  int geometric_c = 0;       ///< most members touching one lattice cell
  double worst_ratio = 0.0;  ///< max over levels of max mu(U) / (C 2^{-n d1})
  int worst_level = -1;
  std::optional<LatticeTriangle> offending;  ///< first failing cell
  std::vector<int> levels_checked;
};

/// For n = n' q, n' = 1..n_max, every up or down tile U of side 2^{-n l}
/// receives the mu of the members touching it; the check asks
/// mu(U) <= C 2^{-n d1} with C the largest number of members touching one
/// tile, which is the geometric constant of the covering argument.
inline MassDistributionResult mass_distribution_lower(const PiecewiseAffineFn& f, const Rational& r,
                                                      const BoundSearchParams& params, int n_max) {
  if (n_max < 1) throw std::invalid_argument("n'_max must be positive");
  MassDistributionResult res;
  res.s = to_double(params.d1) / params.l;
  const int depth_levels = n_max * params.q;
  const LevelSetTree tree(f, r, depth_levels, params.l);
  if (tree.empty()) throw std::invalid_argument("Delta_0 is not in G_0(r)");
  res.verified = true;
  for (int np = 1; np <= n_max; ++np) {
    const int n = np * params.q;
    const int depth = n * params.l;
    // tile key: (row, col, orientation); up tile (i, j) has row j, col i.
    std::map<LatticeTriangle, Rational> mass;
    std::map<LatticeTriangle, int> touching;
    for (const auto& node : tree.level(n)) {
      const Cell& c = node.cell;
      std::vector<LatticeTriangle> tiles;
      for (const auto& v : c.vertices()) {
        // the six tiles around vertex (u, v)
        const std::int64_t u = v.u, w = v.v;
        tiles.push_back({depth, w, u, Orientation::up});
        tiles.push_back({depth, w, u - 1, Orientation::up});
        tiles.push_back({depth, w - 1, u, Orientation::up});
        tiles.push_back({depth, w - 1, u, Orientation::down});
        tiles.push_back({depth, w, u - 1, Orientation::down});
        tiles.push_back({depth, w - 1, u - 1, Orientation::down});
      }
      std::sort(tiles.begin(), tiles.end());
      tiles.erase(std::unique(tiles.begin(), tiles.end()), tiles.end());
      for (const auto& t : tiles) {
        mass[t] += node.mu;
        ++touching[t];
      }
    }
    int C = 0;
    for (const auto& [t, k] : touching) C = std::max(C, k);
    res.geometric_c = std::max(res.geometric_c, C);
    const Rational nd1 = params.d1 * n;
    const double bound = C * std::exp2(-to_double(nd1));
    for (const auto& [t, m] : mass) {
      const double ratio = to_double(m) / bound;
      if (ratio > res.worst_ratio) {
        res.worst_ratio = ratio;
        res.worst_level = n;
      }
      if (ratio > 1 && res.verified) {
        res.verified = false;
        res.offending = t;
      }
    }
    res.levels_checked.push_back(n);
  }
  return res;
}

}  // namespace hl
