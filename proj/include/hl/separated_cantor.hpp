#pragma once

// Separated structures, the fat Cantor set with level lengths 1/(2^{n+1}-1),
// Hausdorff-capacity estimates of its gaps, and the constructive steps of the
// phase transition on C x C.

#include "hl/exact.hpp"
#include "hl/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hl {

using Interval = std::pair<Rational, Rational>;

// ---------------------------------------------------------------------------
// Fat Cantor set.

/// l_n = 1/(2^{n+1} - 1)
inline Rational cantor_length(int n) {
  if (n < 0) throw std::invalid_argument("cantor level must be non-negative");
  return Rational(BigInt(1), (BigInt(1) << (n + 1)) - 1);
}

/// r_m = l_{m-1} - 2 l_m = 1/((2^m - 1)(2^{m+1} - 1)), the gap removed at level m.
inline Rational cantor_gap(int m) {
  if (m < 1) throw std::invalid_argument("gaps start at level 1");
  return Rational(BigInt(1), ((BigInt(1) << m) - 1) * ((BigInt(1) << (m + 1)) - 1));
}

class FatCantorSet {
 public:
  explicit FatCantorSet(int depth) : depth_(depth) {
    if (depth < 0) throw std::invalid_argument("cantor level must be non-negative");
    if (depth > 62) throw std::invalid_argument("cantor level limited to 62");
  }

  int depth() const { return depth_; }
  std::uint64_t count() const { return std::uint64_t{1} << depth_; }
  Rational length() const { return cantor_length(depth_); }

  /// Interval number i (left to right). The right child of a level-(m-1)
  /// interval starts l_{m-1} - l_m after the left child.
  Interval interval(std::uint64_t i) const {
    if (i >= count()) throw std::out_of_range("cantor interval index");
    Rational left = 0;
    for (int m = 1; m <= depth_; ++m)
      if ((i >> (depth_ - m)) & 1u) left += cantor_length(m - 1) - cantor_length(m);
    return {left, left + length()};
  }

  std::vector<Interval> intervals() const {
    if (depth_ > 20) throw std::invalid_argument("materializing more than 2^20 intervals");
    // Build level by level instead of per-index sums.
    std::vector<Interval> cur{{Rational(0), Rational(1)}};
    for (int m = 1; m <= depth_; ++m) {
      const Rational lm = cantor_length(m);
      std::vector<Interval> next;
      next.reserve(cur.size() * 2);
      for (const auto& [a, b] : cur) {
        next.emplace_back(a, a + lm);
        next.emplace_back(b - lm, b);
      }
      cur = std::move(next);
    }
    return cur;
  }

  /// 2^n / (2^{n+1} - 1)
  Rational measure() const { return Rational(BigInt(1) << depth_) * cantor_length(depth_); }

  /// 1 minus everything removed up to this level, an independent route to
  /// the measure.
  Rational measure_by_removal() const {
    Rational m = 1;
    for (int k = 1; k <= depth_; ++k) m -= Rational(BigInt(1) << (k - 1)) * cantor_gap(k);
    return m;
  }

 private:
  int depth_;
};

inline FatCantorSet cantor_level(int n) { return FatCantorSet(n); }

// ---------------------------------------------------------------------------
// Capacity of the gaps inside a level-k interval.

struct CapacityGap {
  int k = 0;
  double alpha = 0;
  double direct_sum = 0;   ///< sum_{m>k} 2^{m-k-1} r_m^alpha, truncated
  double tail_bound = 0;   ///< bound on the omitted terms (inf when divergent)
  std::optional<double> closed_form_bound;  ///< 2^{-2 alpha (k+1)} / (1 - 2^{1-2 alpha})
  double ratio = 0;        ///< direct_sum * (2^{k+1} - 1)
  int terms = 0;
  bool diverges = false;
  std::vector<double> partial_sums;  ///< filled when divergent
};

/// Terms are summed in log2 form until they fall below 1e-18. For alpha <= 1/2
/// the terms do not decay; the first `divergent_terms` partial sums are
/// returned with the divergence flag.
inline CapacityGap capacity_gap(int k, double alpha, int divergent_terms = 64) {
  if (k < 0) throw std::invalid_argument("capacity_gap needs k >= 0");
  if (!(alpha > 0 && alpha <= 1)) throw std::invalid_argument("alpha must lie in (0,1]");
  CapacityGap g;
  g.k = k;
  g.alpha = alpha;
  g.diverges = alpha <= 0.5;
  auto log2_term = [&](int m) {
    const double a = std::log2(std::exp2(m) - 1);
    const double b = std::log2(std::exp2(m + 1) - 1);
    return (m - k - 1) - alpha * (a + b);
  };
  double sum = 0;
  if (g.diverges) {
    for (int m = k + 1; m <= k + divergent_terms; ++m) {
      sum += std::exp2(log2_term(m));
      g.partial_sums.push_back(sum);
      ++g.terms;
    }
    g.direct_sum = sum;
    g.tail_bound = std::numeric_limits<double>::infinity();
  } else {
    // term ratio is below q = 2^{1-2 alpha} for every m
    const double q = std::exp2(1 - 2 * alpha);
    double term = 0;
    for (int m = k + 1;; ++m) {
      term = std::exp2(log2_term(m));
      sum += term;
      ++g.terms;
      if (term < 1e-18 || m > k + 100000) break;
    }
    g.direct_sum = sum;
    g.tail_bound = term * q / (1 - q);
    g.closed_form_bound = std::exp2(-2 * alpha * (k + 1)) / (1 - q);
  }
  g.ratio = g.direct_sum * (std::exp2(k + 1) - 1);
  return g;
}

// ---------------------------------------------------------------------------
// Separated structures.

struct FamilyLevel {
  int k = 0;
  std::size_t count = 0;
  double max_diameter = 0;
  double min_distance = 0;  ///< infinity for a single piece
  bool diameter_ok = false;  ///< max_diameter < K nu^k
  bool distance_ok = false;  ///< min_distance > rho^k / K
};

struct SeparatedStructure {
  double nu = 0;
  double rho = 0;
  double K = 0;
  double K_required = 0;  ///< smallest K the checked levels allow (supremum of the needed ratios)
  std::optional<double> rho_self_similar;
  double L_star = 1;
  std::vector<FamilyLevel> levels;
  bool certified = false;

  double threshold() const { return std::log(nu) / std::log(rho); }
};

struct ProductCheck {
  int k = 0;
  Rational diameter_sq;     ///< 2 l_k^2
  Rational min_distance;    ///< smallest gap between level-k intervals
  bool diameter_ok = false;  ///< 2 l_k^2 <= 2 * 4^{-k}
  bool distance_ok = false;  ///< min gap >= 4^{-k} / 4
  double K_diam = 0;         ///< sqrt2 l_k / 2^{-k}
  double K_dist = 0;         ///< 4^{-k} / min gap
};

/// Exact checks of the product family at level k. The minimum distance
/// between distinct products is the smallest 1-D gap, because two distinct
/// products differ in at least one factor.
inline ProductCheck product_level_check(int k) {
  if (k < 2) throw std::invalid_argument("product structure checks need k >= 2");
  ProductCheck c;
  c.k = k;
  const Rational lk = cantor_length(k);
  c.diameter_sq = 2 * lk * lk;
  if (k <= 16) {
    const auto iv = FatCantorSet(k).intervals();
    Rational best = iv[1].first - iv[0].second;
    for (std::size_t i = 1; i + 1 < iv.size(); ++i) best = std::min(best, Rational(iv[i + 1].first - iv[i].second));
    c.min_distance = best;
  } else {
    c.min_distance = cantor_gap(k);
  }
  c.diameter_ok = c.diameter_sq <= 2 * pow2(-2 * k);
  c.distance_ok = c.min_distance >= pow2(-2 * k) / 4;
  c.K_diam = std::sqrt(2.0) * to_double(lk) * std::exp2(k);
  c.K_dist = std::exp2(-2.0 * k) / to_double(c.min_distance);
  return c;
}

/// The (1/2, 1/4) structure of C x C with S_k the products of level-k
/// intervals, checked exactly for k = 2..k_max. K = 2 holds for every k:
/// sqrt2 2^k/(2^{k+1}-1) <= sqrt2 4/7 < 2 and (2^k-1)(2^{k+1}-1)/4^k < 2.
inline SeparatedStructure product_separated_structure(int k_max) {
  if (k_max < 2) throw std::invalid_argument("product_separated_structure needs k >= 2");
  SeparatedStructure s;
  s.nu = 0.5;
  s.rho = 0.25;
  s.K = 2.0;
  s.certified = true;
  for (int k = 2; k <= k_max; ++k) {
    const ProductCheck c = product_level_check(k);
    FamilyLevel lv;
    lv.k = k;
    lv.count = std::size_t{1} << (2 * k);
    lv.max_diameter = std::sqrt(to_double(c.diameter_sq));
    lv.min_distance = to_double(c.min_distance);
    lv.diameter_ok = c.diameter_ok && c.K_diam < s.K;
    lv.distance_ok = c.distance_ok && c.K_dist < s.K;
    s.K_required = std::max({s.K_required, c.K_diam, c.K_dist});
    s.certified = s.certified && lv.diameter_ok && lv.distance_ok;
    s.levels.push_back(lv);
  }
  return s;
}

/// x -> a x + b on the line, with optional bi-Lipschitz bounds that replace
/// |a| when the map stands for a non-affine one.
struct AffineMap1D {
  Rational a;
  Rational b;
  std::optional<double> lower;  ///< nu_i
  std::optional<double> upper;  ///< rho_i

  Rational operator()(const Rational& x) const { return a * x + b; }
  Interval image(const Interval& iv) const {
    const Rational p = (*this)(iv.first), q = (*this)(iv.second);
    return p <= q ? Interval{p, q} : Interval{q, p};
  }
  double nu() const { return lower ? *lower : std::abs(to_double(a)); }
  double rho() const { return upper ? *upper : std::abs(to_double(a)); }
  bool similarity() const { return !lower && !upper; }
};

struct Cylinder {
  std::vector<int> word;
  Interval hull;
  Rational ratio;  ///< product of |a| along the word
};

/// The family S_k of the splitting procedure: start from F and split every
/// cylinder whose diameter exceeds nu^k |F|.
inline std::vector<Cylinder> split_cylinders(const std::vector<AffineMap1D>& maps, const Interval& hull, int k, double nu) {
  const Rational F = hull.second - hull.first;
  const double limit = std::pow(nu, k) * to_double(F);
  std::vector<Cylinder> done;
  std::vector<Cylinder> todo{{{}, hull, Rational(1)}};
  while (!todo.empty()) {
    Cylinder c = std::move(todo.back());
    todo.pop_back();
    if (to_double(c.hull.second - c.hull.first) <= limit * (1 + 1e-12)) {
      done.push_back(std::move(c));
      continue;
    }
    if (c.word.size() > 200) throw std::runtime_error("cylinder splitting did not terminate");
    for (std::size_t i = 0; i < maps.size(); ++i) {
      Cylinder ch;
      ch.word = c.word;
      ch.word.push_back(static_cast<int>(i));
      // f_w(F) with w = c.word followed by i: apply f_i first, then the prefix maps
      Interval iv = maps[i].image(hull);
      for (auto it = c.word.rbegin(); it != c.word.rend(); ++it) iv = maps[static_cast<std::size_t>(*it)].image(iv);
      ch.hull = iv;
      ch.ratio = c.ratio * abs(maps[i].a);
      todo.push_back(std::move(ch));
    }
  }
  std::sort(done.begin(), done.end(), [](const Cylinder& x, const Cylinder& y) { return x.hull.first < y.hull.first; });
  return done;
}

/// Separated structure of a 1-D IFS attractor with convex hull `hull`.
/// nu = min nu_i, L* = log nu / log rho*, rho = nu^{L*}; when every map is a
/// similarity the sharper rho = nu is reported too.
inline SeparatedStructure ifs_separated_structure(const std::vector<AffineMap1D>& maps, const Interval& hull,
                                                  int k_max = 6) {
  if (maps.size() < 2) throw std::invalid_argument("IFS needs at least two maps");
  if (!(hull.first < hull.second)) throw std::invalid_argument("hull must be a nondegenerate interval");
  for (const auto& f : maps) {
    if (f.a == 0 || abs(f.a) >= 1) throw std::invalid_argument("non-contracting map");
    if (!(f.nu() > 0 && f.rho() < 1 && f.nu() <= f.rho())) throw std::invalid_argument("bad bi-Lipschitz bounds");
    const Interval im = f.image(hull);
    if (im.first < hull.first || im.second > hull.second) throw std::invalid_argument("hull is not invariant under the maps");
  }
  std::vector<Interval> images;
  for (const auto& f : maps) images.push_back(f.image(hull));
  std::sort(images.begin(), images.end());
  Rational sep = images[1].first - images[0].second;
  for (std::size_t i = 1; i + 1 < images.size(); ++i) sep = std::min(sep, Rational(images[i + 1].first - images[i].second));
  if (sep <= 0) throw std::invalid_argument("first-level images are not strongly separated");

  SeparatedStructure s;
  s.nu = maps.front().nu();
  double rho_star = maps.front().rho();
  bool all_sim = true;
  for (const auto& f : maps) {
    s.nu = std::min(s.nu, f.nu());
    rho_star = std::max(rho_star, f.rho());
    all_sim = all_sim && f.similarity();
  }
  s.L_star = std::log(s.nu) / std::log(rho_star);
  s.rho = std::pow(s.nu, s.L_star);
  if (all_sim) s.rho_self_similar = s.nu;
  const double Fd = to_double(hull.second - hull.first);
  const double r = to_double(sep);
  s.K = 2 * std::max(Fd, 1 / r);
  s.certified = true;
  for (int k = 0; k <= k_max; ++k) {
    const auto fam = split_cylinders(maps, hull, k, s.nu);
    FamilyLevel lv;
    lv.k = k;
    lv.count = fam.size();
    lv.min_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < fam.size(); ++i) {
      lv.max_diameter = std::max(lv.max_diameter, to_double(fam[i].hull.second - fam[i].hull.first));
      if (i + 1 < fam.size()) lv.min_distance = std::min(lv.min_distance, to_double(fam[i + 1].hull.first - fam[i].hull.second));
    }
    const double nuk = std::pow(s.nu, k), rhok = std::pow(s.rho, k);
    lv.diameter_ok = lv.max_diameter < s.K * nuk;
    lv.distance_ok = lv.min_distance > rhok / s.K;
    s.K_required = std::max(s.K_required, lv.max_diameter / nuk);
    if (std::isfinite(lv.min_distance)) s.K_required = std::max(s.K_required, rhok / lv.min_distance);
    s.certified = s.certified && lv.diameter_ok && lv.distance_ok;
    s.levels.push_back(lv);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Piecewise-constant approximation.

enum class Regime { below_threshold, above_threshold, boundary };

struct FeasibilityResult {
  int k = 0;
  double lhs = 0;  ///< 2 K M nu^k
  double rhs = 0;  ///< (1-c)/K^alpha rho^{k alpha}
  bool feasible = false;
  Regime regime = Regime::boundary;
  std::optional<int> first_feasible_k;
  double log_ratio_step = 0;  ///< log(nu / rho^alpha), change of log(lhs/rhs) per level
  int checked_up_to = 0;
  bool monotone_infeasible = false;  ///< lhs/rhs > 1 and increasing on 0..checked_up_to
};

/// Checks 2 K M nu^k <= (1-c)/K^alpha (rho^k)^alpha at level k and searches
/// the first feasible level up to k_cap. The comparison is done on the log of
/// lhs/rhs; exact ties (log ratio within 1e-12) count as feasible.
inline FeasibilityResult piecewise_constant_feasibility(double alpha, double c, double M, const SeparatedStructure& s,
                                                        int k, int k_cap = 60) {
  if (!(c > 0 && c < 1)) throw std::invalid_argument("need 0 < c < 1");
  if (!(alpha > 0 && alpha <= 1)) throw std::invalid_argument("alpha must lie in (0,1]");
  if (M <= 0 || s.K <= 0) throw std::invalid_argument("need M > 0 and K > 0");
  auto log_ratio = [&](int j) {
    return std::log(2 * s.K * M / (1 - c)) + alpha * std::log(s.K) + j * (std::log(s.nu) - alpha * std::log(s.rho));
  };
  FeasibilityResult out;
  out.k = k;
  out.lhs = 2 * s.K * M * std::pow(s.nu, k);
  out.rhs = (1 - c) / std::pow(s.K, alpha) * std::pow(s.rho, k * alpha);
  constexpr double tie = 1e-12;
  out.feasible = log_ratio(k) <= tie;
  out.log_ratio_step = std::log(s.nu) - alpha * std::log(s.rho);
  if (std::abs(out.log_ratio_step) < 1e-12) out.regime = Regime::boundary;
  else out.regime = out.log_ratio_step < 0 ? Regime::below_threshold : Regime::above_threshold;
  out.checked_up_to = k_cap;
  bool increasing = true;
  bool all_infeasible = true;
  double prev = log_ratio(0);
  for (int j = 0; j <= k_cap; ++j) {
    const double lr = log_ratio(j);
    if (lr <= tie) {
      all_infeasible = false;
      if (!out.first_feasible_k) out.first_feasible_k = j;
    }
    if (j > 0 && !(lr > prev)) increasing = false;
    prev = lr;
  }
  out.monotone_infeasible = all_infeasible && increasing;
  return out;
}

// ---------------------------------------------------------------------------
// Perturbation on a cylinder of C x C.

struct PhaseTransitionConfig {
  double alpha = 0.75;
  Rational c = Rational(1, 2);  ///< Hoelder constant of the base function
  int k = 4;                    ///< cylinder level
  std::uint64_t ix = 0;         ///< x-interval index of the square at level k
  std::uint64_t iy = 0;         ///< y-interval index
  int grid_depth = 5;           ///< grid = endpoints of the level-grid_depth intervals
  double delta = 0.25;          ///< capacity tolerance
  std::optional<double> delta_prime;  ///< defaults to a quarter of the admissible value
};

struct PhaseReport {
  Rational x1, x2, y1;
  Rational f_v1, f_v2;
  bool mirrored = false;
  Rational large_change_lhs;  ///< |f~(v1) - f~(v2)|
  Rational large_change_rhs;  ///< (1-c)(x2 - x1)
  bool large_change = false;
  double base_ratio = 0;      ///< max |f(p)-f(q)|/|p-q|^alpha on the grid
  bool base_ok = false;       ///< base_ratio <= c
  bool h_lipschitz = false;   ///< |h(p)-h(q)| <= (1-c)|x_p - x_q| exactly on the grid
  double perturbed_ratio = 0;
  bool perturbed_ok = false;  ///< perturbed_ratio <= 1
  double delta = 0, delta_prime = 0;
  int k_prime = 0;            ///< r = l_{k'} with c l_{k'}^alpha < delta'
  Rational r, eta;            ///< eta = lambda(C cap [y1 - r, y1]) = 2^{-(k'+1)}
  double guaranteed_length = 0;  ///< (1-c-delta)(x2-x1) - 6 delta'
  double capacity_ratio = 0;
  bool capacity_ok = false;      ///< capacity ratio at level k below delta
  std::size_t grid_points = 0;

  bool all_ok() const {
    return large_change && base_ok && h_lipschitz && perturbed_ok && guaranteed_length > 0 && capacity_ok;
  }
};

/// Grid points (x, y) of C_g x C_g: all interval endpoints at level g.
inline std::vector<Rational> cantor_endpoints(int g) {
  std::vector<Rational> out;
  for (const auto& [a, b] : FatCantorSet(g).intervals()) {
    out.push_back(a);
    out.push_back(b);
  }
  return out;
}

/// f~ = f + h with h(x) = (1-c) clamp(x - x1, 0, x2 - x1) (mirrored when
/// f(v1) > f(v2)), certified on the product grid.
inline PhaseReport phase_perturbation(const std::function<Rational(const Rational&, const Rational&)>& f,
                                      const PhaseTransitionConfig& cfg) {
  if (cfg.c <= 0 || cfg.c >= 1) throw std::invalid_argument("need 0 < c < 1");
  if (cfg.grid_depth < 0 || cfg.grid_depth > 7) throw std::invalid_argument("grid depth must lie in [0, 7]");
  const FatCantorSet Ck(cfg.k);
  const auto [x1, x2] = Ck.interval(cfg.ix);
  const Rational y1 = Ck.interval(cfg.iy).second;
  PhaseReport rep;
  rep.x1 = x1;
  rep.x2 = x2;
  rep.y1 = y1;
  rep.f_v1 = f(x1, y1);
  rep.f_v2 = f(x2, y1);
  rep.mirrored = rep.f_v1 > rep.f_v2;
  const Rational one_c = 1 - cfg.c;
  const Rational width = x2 - x1;
  auto h = [&](const Rational& x) -> Rational {
    const Rational t = std::clamp(Rational(x - x1), Rational(0), width);
    return rep.mirrored ? Rational(one_c * (width - t)) : Rational(one_c * t);
  };
  auto ft = [&](const Rational& x, const Rational& y) { return f(x, y) + h(x); };
  rep.large_change_lhs = abs(ft(x1, y1) - ft(x2, y1));
  rep.large_change_rhs = one_c * width;
  rep.large_change = rep.large_change_lhs >= rep.large_change_rhs;

  // grid abscissae: endpoints at the grid level plus the square's corners
  auto xs = cantor_endpoints(cfg.grid_depth);
  xs.push_back(x1);
  xs.push_back(x2);
  xs.push_back(y1);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<std::pair<std::size_t, std::size_t>> pts;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < xs.size(); ++j) pts.emplace_back(i, j);
  rep.grid_points = pts.size();
  std::vector<Rational> fv(pts.size()), hv(xs.size());
  std::vector<double> fd(pts.size()), ftd(pts.size()), xd(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    hv[i] = h(xs[i]);
    xd[i] = to_double(xs[i]);
  }
  for (std::size_t p = 0; p < pts.size(); ++p) {
    fv[p] = f(xs[pts[p].first], xs[pts[p].second]);
    fd[p] = to_double(fv[p]);
    ftd[p] = to_double(fv[p] + hv[pts[p].first]);
  }
  // h is exactly (1-c)-Lipschitz in x on the grid abscissae
  rep.h_lipschitz = true;
  for (std::size_t i = 0; i < xs.size() && rep.h_lipschitz; ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j)
      if (abs(hv[i] - hv[j]) > one_c * abs(xs[i] - xs[j])) {
        rep.h_lipschitz = false;
        break;
      }
  struct Worst {
    double base = 0, pert = 0;
  };
  const double a = cfg.alpha;
  const auto blocks = parallel_blocks(pts.size(), [&](std::size_t b, std::size_t e) {
    Worst w;
    for (std::size_t p = b; p < e; ++p)
      for (std::size_t q = p + 1; q < pts.size(); ++q) {
        const double dx = xd[pts[p].first] - xd[pts[q].first];
        const double dy = xd[pts[p].second] - xd[pts[q].second];
        const double d = std::pow(dx * dx + dy * dy, a / 2);
        w.base = std::max(w.base, std::abs(fd[p] - fd[q]) / d);
        w.pert = std::max(w.pert, std::abs(ftd[p] - ftd[q]) / d);
      }
    return w;
  }, 64);
  for (const auto& w : blocks) {
    rep.base_ratio = std::max(rep.base_ratio, w.base);
    rep.perturbed_ratio = std::max(rep.perturbed_ratio, w.pert);
  }
  const double cd = to_double(cfg.c);
  rep.base_ok = rep.base_ratio <= cd * (1 + 1e-12);
  rep.perturbed_ok = rep.perturbed_ratio <= 1 + 1e-12;

  rep.delta = cfg.delta;
  const double wd = to_double(width);
  const double room = (1 - cd - cfg.delta) * wd;
  rep.delta_prime = cfg.delta_prime ? *cfg.delta_prime : room / 24;
  rep.guaranteed_length = room - 6 * rep.delta_prime;
  rep.k_prime = cfg.k;
  while (cd * std::pow(to_double(cantor_length(rep.k_prime)), cfg.alpha) >= rep.delta_prime) {
    if (++rep.k_prime > 200) throw std::runtime_error("no level k' with c l_{k'}^alpha < delta'");
  }
  rep.r = cantor_length(rep.k_prime);
  rep.eta = pow2(-(rep.k_prime + 1));
  const CapacityGap gap = capacity_gap(cfg.k, cfg.alpha);
  rep.capacity_ratio = gap.ratio;
  rep.capacity_ok = !gap.diverges && gap.ratio < cfg.delta;
  return rep;
}

}  // namespace hl
