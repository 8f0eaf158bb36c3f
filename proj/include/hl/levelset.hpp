#pragma once

// Level-set approximations G_n^l(r), extreme vertices, conductivity and the
// conductivity-proportional mass distribution.

#include "hl/exact.hpp"
#include "hl/holder_functions.hpp"
#include "hl/triangle_geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hl {

/// Raised when a level value coincides with a vertex value.
class LevelCollision : public std::invalid_argument {
 public:
  LevelCollision(const LatticePoint& v, const Rational& r)
      : std::invalid_argument("level value " + to_string(r) + " equals the value at vertex (" + std::to_string(v.u) +
                              "," + std::to_string(v.v) + "," + std::to_string(v.depth) + ")"),
        vertex_(v) {}
  const LatticePoint& vertex() const { return vertex_; }

 private:
  LatticePoint vertex_;
};

inline bool is_dyadic(const Rational& q) {
  const BigInt den = denominator(q);
  return (den & (den - 1)) == 0;
}

/// A level r certified to avoid f(V_m) for every m up to the working depth.
/// If every table value is dyadic and r is not, all vertex values at every
/// depth are dyadic and the check is immediate; otherwise V_depth is scanned.
class LevelValue {
 public:
  LevelValue(const PiecewiseAffineFn& f, Rational r, int depth) : r_(std::move(r)), depth_(depth) {
    bool all_dyadic = true;
    for (const auto& [p, v] : f.entries()) {
      if (v == r_) throw LevelCollision(p, r_);
      all_dyadic = all_dyadic && is_dyadic(v);
    }
    if (all_dyadic && !is_dyadic(r_)) return;
    if (depth > 10) throw std::invalid_argument("level value check: exhaustive scan limited to depth 10");
    for (const LatticePoint& p : vertex_set(std::max(depth, f.level())))
      if (f.eval(p) == r_) throw LevelCollision(p, r_);
  }
  const Rational& value() const { return r_; }
  int depth() const { return depth_; }

 private:
  Rational r_;
  int depth_;
};

/// Seeded levels strictly inside the hull of the corner values of Delta_0:
/// r = lo + (hi - lo) j / (P 2^20) with P the smallest odd prime not dividing
/// the numerator of hi - lo and P not dividing j, so r is never dyadic when the
/// corner values are. Draws hitting f(V_depth) are skipped. Empty when f is
/// constant on the corners.
inline std::vector<LevelValue> admissible_levels(const PiecewiseAffineFn& f, std::size_t count, std::mt19937_64& rng,
                                                 int depth) {
  const auto v = f.values_on(Cell{});
  const Rational lo = std::min({v[0], v[1], v[2]});
  const Rational hi = std::max({v[0], v[1], v[2]});
  std::vector<LevelValue> out;
  if (lo == hi) return out;
  const Rational width = hi - lo;
  std::uint64_t P = 3;
  for (const std::uint64_t q : {3, 5, 7, 11, 13, 17, 19, 23, 29, 31}) {
    P = q;
    if (numerator(width) % q != 0) break;
  }
  const std::uint64_t slots = P << 20;
  for (std::size_t tries = 0; out.size() < count; ++tries) {
    if (tries > 100 * count + 100) throw std::runtime_error("admissible_levels: too many rejected draws");
    const std::uint64_t j = rng() % slots;
    if (j % P == 0) continue;
    const Rational r = lo + width * Rational(static_cast<long long>(j), static_cast<long long>(slots));
    try {
      out.emplace_back(f, r, depth);
    } catch (const LevelCollision&) {
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct ExtremeLabeling {
  int low = -1;   ///< vertex index of the designated minimum
  int high = -1;  ///< vertex index of the designated maximum
  int mid = -1;
  bool low_tie = false;   ///< another vertex shares the minimum
  bool high_tie = false;  ///< another vertex shares the maximum
  bool degenerate = false;  ///< all three values equal: no extreme pair
};

/// Ties go to the smallest vertex index. Constant triangles have no extreme
/// vertices.
inline ExtremeLabeling extreme_labeling(const std::array<Rational, 3>& v) {
  ExtremeLabeling e;
  if (v[0] == v[1] && v[1] == v[2]) {
    e.degenerate = true;
    return e;
  }
  e.low = 0;
  e.high = 0;
  for (int i = 1; i < 3; ++i) {
    if (v[static_cast<std::size_t>(i)] < v[static_cast<std::size_t>(e.low)]) e.low = i;
    if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(e.high)]) e.high = i;
  }
  e.mid = 3 - e.low - e.high;
  e.low_tie = v[static_cast<std::size_t>(e.mid)] == v[static_cast<std::size_t>(e.low)];
  e.high_tie = v[static_cast<std::size_t>(e.mid)] == v[static_cast<std::size_t>(e.high)];
  return e;
}

inline ExtremeLabeling extreme_labeling(const PiecewiseAffineFn& f, const TriangleAddress& T) {
  return extreme_labeling(f.values_on(cell_of(T)));
}

/// True when r lies strictly between the smallest and largest value.
inline bool straddles(const std::array<Rational, 3>& v, const Rational& r) {
  const Rational& lo = std::min({v[0], v[1], v[2]});
  const Rational& hi = std::max({v[0], v[1], v[2]});
  return lo < r && r < hi;
}

// ---------------------------------------------------------------------------
// Children in tau^l.

/// Geometry of the l-step subdivision used by tau_n^l.
class SubdivisionL {
 public:
  explicit SubdivisionL(int l) : family_(boundary_family(l)) {
    const std::int64_t side = std::int64_t{1} << l;
    for (const auto& a : family_.addresses) {
      const Cell c = cell_of(a);
      offsets_.push_back({c.u, c.v});
    }
    // corner words e^l of the three vertices
    for (std::size_t i = 0; i < offsets_.size(); ++i) {
      const auto [du, dv] = offsets_[i];
      if (du == 0 && dv == 0) corner_[0] = static_cast<int>(i);
      if (du == side - 1 && dv == 0) corner_[1] = static_cast<int>(i);
      if (du == 0 && dv == side - 1) corner_[2] = static_cast<int>(i);
    }
  }
  int l() const { return family_.l; }
  std::size_t size() const { return offsets_.size(); }
  const TriangleAddress& word(std::size_t i) const { return family_.addresses[i]; }
  Cell child(const Cell& c, std::size_t i) const {
    const int l = family_.l;
    return {(c.u << l) + offsets_[i].first, (c.v << l) + offsets_[i].second, c.depth + l};
  }
  /// Index of the child sitting at vertex e of its parent.
  int corner(int e) const { return corner_[static_cast<std::size_t>(e)]; }
  bool is_extreme_child(const ExtremeLabeling& lab, std::size_t i) const {
    if (lab.degenerate) return false;
    const int ii = static_cast<int>(i);
    return ii == corner(lab.low) || ii == corner(lab.high);
  }

 private:
  BoundaryFamilyL family_;
  std::vector<std::pair<std::int64_t, std::int64_t>> offsets_;
  std::array<int, 3> corner_{-1, -1, -1};
};

// ---------------------------------------------------------------------------
// The descendant tree of Delta_0 inside the level set.

struct LevelNode {
  TriangleAddress address;
  Cell cell;
  std::array<Rational, 3> values;
  int kappa_exp = 0;  ///< conductivity is 2^-kappa_exp
  Rational mu = 0;
  std::int64_t parent = -1;
};

struct LevelSetMember {
  TriangleAddress address;
  int kappa_exp = 0;
  Rational mu = 0;
};

struct ApproxLevelSet {
  Rational r;
  int n = 0;
  int l = 1;
  std::vector<LevelSetMember> members;  ///< sorted by address

  Rational kappa_sum() const {
    Rational s = 0;
    for (const auto& m : members) s += pow2(-m.kappa_exp);
    return s;
  }
  Rational mu_sum() const {
    Rational s = 0;
    for (const auto& m : members) s += m.mu;
    return s;
  }
  const LevelSetMember* find(const TriangleAddress& a) const {
    auto it = std::lower_bound(members.begin(), members.end(), a,
                               [](const LevelSetMember& m, const TriangleAddress& x) { return m.address < x; });
    return (it != members.end() && it->address == a) ? &*it : nullptr;
  }
};

/// Levels 0..n of G^l(r) restricted to descendants of Delta_0: a triangle
/// is kept when r is strictly inside the hull of its vertex values and its
/// parent was kept. Conductivity and mu are filled in along the way.
class LevelSetTree {
 public:
  LevelSetTree(const PiecewiseAffineFn& f, const Rational& r, int n, int l) : r_(r), n_(n), sub_(l) {
    if (n < 0) throw std::invalid_argument("level must be non-negative");
    if (static_cast<long>(n) * l > kMaxLatticeDepth) throw std::invalid_argument("n*l exceeds the lattice depth");
    levels_.resize(static_cast<std::size_t>(n) + 1);
    LevelNode root{TriangleAddress{}, Cell{}, f.values_on(Cell{}), 0, Rational(1), -1};
    check_collision(root);
    if (!straddles(root.values, r_)) return;
    levels_[0].push_back(root);
    for (int k = 1; k <= n; ++k) {
      auto& prev = levels_[static_cast<std::size_t>(k - 1)];
      auto& next = levels_[static_cast<std::size_t>(k)];
      for (std::size_t pi = 0; pi < prev.size(); ++pi) {
        const LevelNode& par = prev[pi];
        const ExtremeLabeling lab = extreme_labeling(par.values);
        const std::size_t first = next.size();
        Rational ksum = 0;
        for (std::size_t i = 0; i < sub_.size(); ++i) {
          LevelNode ch;
          ch.cell = sub_.child(par.cell, i);
          ch.values = f.values_on(ch.cell);
          check_collision(ch);
          if (!straddles(ch.values, r_)) continue;
          ch.address = par.address.concat(sub_.word(i));
          ch.kappa_exp = par.kappa_exp + (sub_.is_extreme_child(lab, i) ? 0 : 1);
          ch.parent = static_cast<std::int64_t>(pi);
          ksum += pow2(-ch.kappa_exp);
          next.push_back(std::move(ch));
        }
        if (next.size() == first)
          throw std::logic_error("level-set member " + (par.address.str().empty() ? std::string("<root>") : par.address.str()) +
                                 " has no member child");
        for (std::size_t j = first; j < next.size(); ++j) next[j].mu = par.mu * pow2(-next[j].kappa_exp) / ksum;
      }
    }
  }

  const Rational& r() const { return r_; }
  int n() const { return n_; }
  int l() const { return sub_.l(); }
  bool empty() const { return levels_[0].empty(); }
  const std::vector<LevelNode>& level(int k) const { return levels_.at(static_cast<std::size_t>(k)); }

  ApproxLevelSet at(int k) const {
    ApproxLevelSet out{r_, k, sub_.l(), {}};
    for (const auto& node : level(k)) out.members.push_back({node.address, node.kappa_exp, node.mu});
    std::sort(out.members.begin(), out.members.end(),
              [](const LevelSetMember& a, const LevelSetMember& b) { return a.address < b.address; });
    return out;
  }

 private:
  void check_collision(const LevelNode& node) const {
    const auto vs = node.cell.vertices();
    for (std::size_t i = 0; i < 3; ++i)
      if (node.values[i] == r_) throw LevelCollision(vs[i].canonical(), r_);
  }

  Rational r_;
  int n_;
  SubdivisionL sub_;
  std::vector<std::vector<LevelNode>> levels_;
};

inline ApproxLevelSet approx_level_set(const PiecewiseAffineFn& f, const LevelValue& r, int n, int l) {
  return LevelSetTree(f, r.value(), n, l).at(n);
}

/// Every T in tau_n^l with r strictly inside the hull of its vertex values,
/// by direct enumeration (no ancestry requirement). Small n only.
inline std::vector<TriangleAddress> full_level_set(const PiecewiseAffineFn& f, const Rational& r, int n, int l) {
  const SubdivisionL sub(l);
  if (std::pow(static_cast<double>(sub.size()), n) > 2e6) throw std::invalid_argument("full_level_set: tau_n^l too large");
  std::vector<TriangleAddress> out;
  std::function<void(const Cell&, const TriangleAddress&, int)> walk = [&](const Cell& c, const TriangleAddress& a, int k) {
    if (k == n) {
      const auto v = f.values_on(c);
      for (std::size_t i = 0; i < 3; ++i)
        if (v[i] == r) throw LevelCollision(c.vertices()[i].canonical(), r);
      if (straddles(v, r)) out.push_back(a);
      return;
    }
    for (std::size_t i = 0; i < sub.size(); ++i) walk(sub.child(c, i), a.concat(sub.word(i)), k + 1);
  };
  walk(Cell{}, TriangleAddress{}, 0);
  std::sort(out.begin(), out.end());
  return out;
}

/// Conductivity 2^-j of a member at level n = addr.level() / l; returns j.
inline int conductivity_exp(const PiecewiseAffineFn& f, const Rational& r, const TriangleAddress& addr, int l) {
  if (addr.level() % l != 0) throw std::invalid_argument("address length is not a multiple of l");
  const int n = addr.level() / l;
  const ApproxLevelSet set = LevelSetTree(f, r, n, l).at(n);
  const LevelSetMember* m = set.find(addr);
  if (!m) throw std::invalid_argument("address " + addr.str() + " is not a level-set descendant of Delta_0");
  return m->kappa_exp;
}

inline Rational conductivity(const PiecewiseAffineFn& f, const Rational& r, const TriangleAddress& addr, int l = 1) {
  return pow2(-conductivity_exp(f, r, addr, l));
}

struct ConservationResult {
  Rational lhs;  ///< sum of kappa over level-(n+k) descendants of T
  Rational rhs;  ///< kappa(T)
  std::size_t descendants = 0;
  bool pass = false;
};

/// Weak conservation: kappa of the descendants of T, k levels down, sums to
/// at least kappa(T).
inline ConservationResult conservation_check(const LevelSetTree& tree, const TriangleAddress& T, int k) {
  if (k < 1) throw std::invalid_argument("conservation_check needs k >= 1");
  if (T.level() % tree.l() != 0) throw std::invalid_argument("address length is not a multiple of l");
  const int n = T.level() / tree.l();
  if (n + k > tree.n()) throw std::invalid_argument("tree too shallow for the requested check");
  ConservationResult res;
  bool found = false;
  for (const auto& node : tree.level(n))
    if (node.address == T) {
      res.rhs = pow2(-node.kappa_exp);
      found = true;
    }
  if (!found) throw std::invalid_argument("address " + T.str() + " is not in the level set");
  for (const auto& node : tree.level(n + k))
    if (node.address.has_prefix(T)) {
      res.lhs += pow2(-node.kappa_exp);
      ++res.descendants;
    }
  res.pass = res.lhs >= res.rhs;
  return res;
}

inline ConservationResult conservation_check(const PiecewiseAffineFn& f, const Rational& r, const TriangleAddress& T,
                                             int k, int l = 1) {
  if (T.level() % l != 0) throw std::invalid_argument("address length is not a multiple of l");
  return conservation_check(LevelSetTree(f, r, T.level() / l + k, l), T, k);
}

struct MeasureCheck {
  bool normalized = true;    ///< mu sums to 1 on every level
  bool below_kappa = true;   ///< mu <= kappa for every node
  Rational max_mu_over_kappa = 0;
};

inline MeasureCheck check_measure(const LevelSetTree& tree) {
  MeasureCheck out;
  if (tree.empty()) return out;
  for (int k = 0; k <= tree.n(); ++k) {
    Rational s = 0;
    for (const auto& node : tree.level(k)) {
      s += node.mu;
      const Rational ratio = node.mu * pow2(node.kappa_exp);
      if (ratio > out.max_mu_over_kappa) out.max_mu_over_kappa = ratio;
      if (ratio > 1) out.below_kappa = false;
    }
    if (s != 1) out.normalized = false;
  }
  return out;
}

/// mu on the level-n members, keyed by address.
inline std::map<TriangleAddress, Rational> conductivity_measure(const PiecewiseAffineFn& f, const Rational& r, int n,
                                                                int l = 1) {
  const LevelSetTree tree(f, r, n, l);
  if (tree.empty()) throw std::invalid_argument("Delta_0 is not in G_0(r): r outside the hull of the corner values");
  std::map<TriangleAddress, Rational> out;
  for (const auto& node : tree.level(n)) out.emplace(node.address, node.mu);
  return out;
}

// ---------------------------------------------------------------------------
// Counting well-conducting triangles.

struct CensusResult {
  BigInt count;             ///< #{T in tau_n^l : kappa(T) >= 2^{-n d1}}
  double binomial_bound = 0;  ///< (e n/(n d1))^{n d1} (3(2^l-1))^{n d1} 2^{n - n d1}
  double image_measure = 0;   ///< c^n
  double c = 0;               ///< (e/d1)^{d1} (3(2^l-1))^{d1} 2^{1-d1-l alpha}
  bool within_bound = false;
};

/// c from the image-measure estimate; `relaxed` replaces 2^l - 1 by 2^l.
inline double census_constant(double alpha, double d1, int l, bool relaxed = false) {
  if (!(d1 > 0)) throw std::invalid_argument("d1 must be positive");
  const double N = relaxed ? std::ldexp(1.0, l) : std::ldexp(1.0, l) - 1;
  return std::pow(std::numbers::e / d1, d1) * std::pow(3 * N, d1) * std::exp2(1 - d1 - l * alpha);
}

/// Counts tau_n^l triangles with conductivity at least 2^{-n d1}; conductivity
/// here is the r-free recursion over all of tau_n^l (extreme children inherit,
/// others halve), pruned once the budget of n d1 halvings is exceeded.
inline CensusResult well_conducting_census(const PiecewiseAffineFn& f, int n, int l, const Rational& d1, double alpha) {
  if (n < 0) throw std::invalid_argument("census level must be non-negative");
  if (d1 <= 0) throw std::invalid_argument("d1 must be positive");
  const Rational nd1 = d1 * n;
  if (denominator(nd1) != 1)
    throw std::invalid_argument("n*d1 = " + to_string(nd1) + " is not an integer; n must be a multiple of " +
                                denominator(d1).str());
  const long budget = numerator(nd1).convert_to<long>();
  const SubdivisionL sub(l);
  BigInt count = 0;
  std::function<void(const Cell&, int, long)> walk = [&](const Cell& c, int k, long halvings) {
    if (k == n) {
      ++count;
      return;
    }
    const ExtremeLabeling lab = extreme_labeling(f.values_on(c));
    for (std::size_t i = 0; i < sub.size(); ++i) {
      const long h = halvings + (sub.is_extreme_child(lab, i) ? 0 : 1);
      if (h <= budget) walk(sub.child(c, i), k + 1, h);
    }
  };
  walk(Cell{}, 0, 0);

  CensusResult res;
  res.count = count;
  const double d1d = to_double(d1);
  const double m = static_cast<double>(budget);
  const double N = 3 * (std::ldexp(1.0, l) - 1);
  const double binom_part = m > 0 ? std::pow(std::numbers::e * n / m, m) : 1.0;
  res.binomial_bound = binom_part * std::pow(N, m) * std::exp2(n - m);
  res.c = census_constant(alpha, d1d, l);
  res.image_measure = std::pow(res.c, n);
  res.within_bound = count.convert_to<double>() <= res.binomial_bound;
  return res;
}

}  // namespace hl
