#pragma once

// Exact geometry of the Sierpinski triangle with unit side.
//
// Points of the construction are handled in skew lattice coordinates: at
// depth d the lattice point (u, v) is (u*e1 + v*e2) / 2^d with e1 = (1, 0)
// and e2 = (1/2, sqrt(3)/2). A level-d construction triangle is identified by
// its lower-left lattice point (u, v); its vertices are (u, v), (u+1, v) and
// (u, v+1), in that order v1, v2, v3. Address digit i selects the child at
// vertex v_{i+1}: digit 1 adds a bit to u, digit 2 adds a bit to v.

#include "hl/exact.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace hl {

inline constexpr int kMaxLatticeDepth = 60;

/// Word over {0,1,2}; its length is the level of the triangle it names.
class TriangleAddress {
 public:
  TriangleAddress() = default;
  explicit TriangleAddress(std::string word) : word_(std::move(word)) {
    for (char c : word_)
      if (c < '0' || c > '2') throw std::invalid_argument("address digit outside {0,1,2}: '" + word_ + "'");
  }
  static TriangleAddress parse(std::string_view s) { return TriangleAddress(std::string(s)); }

  int level() const { return static_cast<int>(word_.size()); }
  int digit(int i) const { return word_[static_cast<std::size_t>(i)] - '0'; }
  const std::string& str() const { return word_; }

  TriangleAddress child(int i) const {
    if (i < 0 || i > 2) throw std::invalid_argument("child index outside {0,1,2}");
    return TriangleAddress(word_ + static_cast<char>('0' + i), Trusted{});
  }
  TriangleAddress concat(const TriangleAddress& tail) const { return TriangleAddress(word_ + tail.word_, Trusted{}); }
  TriangleAddress prefix(int len) const { return TriangleAddress(word_.substr(0, static_cast<std::size_t>(len)), Trusted{}); }
  TriangleAddress parent() const {
    if (word_.empty()) throw std::invalid_argument("the root triangle has no parent");
    return prefix(level() - 1);
  }
  bool has_prefix(const TriangleAddress& p) const { return word_.starts_with(p.word_); }

  friend auto operator<=>(const TriangleAddress&, const TriangleAddress&) = default;

 private:
  struct Trusted {};
  TriangleAddress(std::string word, Trusted) : word_(std::move(word)) {}
  std::string word_;
};

/// Lattice point (u, v) at depth d; canonical with minimal depth.
struct LatticePoint {
  std::int64_t u = 0;
  std::int64_t v = 0;
  int depth = 0;

  LatticePoint canonical() const {
    LatticePoint p = *this;
    while (p.depth > 0 && (p.u % 2 == 0) && (p.v % 2 == 0)) {
      p.u /= 2;
      p.v /= 2;
      --p.depth;
    }
    return p;
  }
  /// Same point expressed at a finer depth.
  LatticePoint at_depth(int d) const {
    if (d < depth) throw std::invalid_argument("cannot coarsen a lattice point");
    return {u << (d - depth), v << (d - depth), d};
  }
  PointQ3 point() const {
    // x = (2u + v) / 2^{d+1}, y = v sqrt(3) / 2^{d+1}
    return {CoordQ3(2 * u + v, 0, depth + 1), CoordQ3(0, v, depth + 1)};
  }
  friend bool operator==(const LatticePoint& a, const LatticePoint& b) {
    const LatticePoint ca = a.canonical();
    const LatticePoint cb = b.canonical();
    return ca.u == cb.u && ca.v == cb.v && ca.depth == cb.depth;
  }
};

struct LatticePointHash {
  std::size_t operator()(const LatticePoint& p) const {
    const LatticePoint c = p.canonical();
    std::size_t h = std::hash<std::int64_t>{}(c.u);
    h ^= std::hash<std::int64_t>{}(c.v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<int>{}(c.depth) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

/// Squared Euclidean distance between two lattice points, exact.
inline Rational distance_sq(const LatticePoint& p, const LatticePoint& q) {
  const int d = std::max(p.depth, q.depth);
  const LatticePoint a = p.at_depth(d);
  const LatticePoint b = q.at_depth(d);
  const Rational du = Rational(a.u - b.u);
  const Rational dv = Rational(a.v - b.v);
  // |du e1 + dv e2|^2 = du^2 + du dv + dv^2
  return (du * du + du * dv + dv * dv) / pow2(2 * d);
}

/// Upward lattice triangle with lower-left corner (u, v) at the given depth.
struct Cell {
  std::int64_t u = 0;
  std::int64_t v = 0;
  int depth = 0;

  std::array<LatticePoint, 3> vertices() const {
    return {LatticePoint{u, v, depth}, LatticePoint{u + 1, v, depth}, LatticePoint{u, v + 1, depth}};
  }
  Cell child(int i) const {
    return {2 * u + (i == 1 ? 1 : 0), 2 * v + (i == 2 ? 1 : 0), depth + 1};
  }
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// True when the upward cell belongs to the level-d Sierpinski construction.
inline bool is_construction_cell(const Cell& c) {
  if (c.u < 0 || c.v < 0 || c.depth < 0) return false;
  const std::int64_t side = std::int64_t{1} << c.depth;
  return (c.u & c.v) == 0 && c.u + c.v < side;
}

inline Cell cell_of(const TriangleAddress& addr) {
  if (addr.level() > kMaxLatticeDepth) throw std::invalid_argument("address deeper than the supported lattice");
  Cell c;
  for (int i = 0; i < addr.level(); ++i) c = c.child(addr.digit(i));
  return c;
}

inline TriangleAddress address_of(const Cell& c) {
  if (!is_construction_cell(c)) throw std::invalid_argument("cell is not a construction triangle");
  std::string w(static_cast<std::size_t>(c.depth), '0');
  for (int i = 0; i < c.depth; ++i) {
    const int bit = c.depth - 1 - i;
    if ((c.u >> bit) & 1) w[static_cast<std::size_t>(i)] = '1';
    else if ((c.v >> bit) & 1) w[static_cast<std::size_t>(i)] = '2';
  }
  return TriangleAddress(std::move(w));
}

/// Exact vertices (v1, v2, v3) of the triangle named by `addr`.
inline std::array<PointQ3, 3> vertices(const TriangleAddress& addr) {
  const auto lv = cell_of(addr).vertices();
  return {lv[0].point(), lv[1].point(), lv[2].point()};
}

/// Lattice coordinates of an exact planar point. Points with an irrational
/// x or a rational nonzero y-part are not lattice points and are rejected.
inline LatticePoint lattice_point_of(const PointQ3& p) {
  if (!p.x.is_rational() || p.y.a() != 0) throw std::invalid_argument("point is not on the triangular lattice");
  // x = (2u + v) / 2^{d+1}, y = v sqrt3 / 2^{d+1}
  const int d = std::max({p.x.k(), p.y.k(), 1}) - 1;
  if (d > kMaxLatticeDepth) throw std::invalid_argument("point deeper than the supported lattice");
  const std::int64_t two_u_plus_v = p.x.a() * (std::int64_t{1} << (d + 1 - p.x.k()));
  const std::int64_t v = p.y.b() * (std::int64_t{1} << (d + 1 - p.y.k()));
  if ((two_u_plus_v - v) % 2 != 0) {
    // u is a half-integer at depth d; one more level makes it integral
    return LatticePoint{two_u_plus_v - v, 2 * v, d + 1}.canonical();
  }
  return LatticePoint{(two_u_plus_v - v) / 2, v, d}.canonical();
}

/// Construction cells of depth n whose closed triangle contains p.
inline std::vector<Cell> cells_containing(const LatticePoint& p, int n) {
  const int d = std::max(n, p.depth);
  const LatticePoint q = p.at_depth(d);
  const int s = d - n;
  const std::int64_t side = std::int64_t{1} << s;
  const std::int64_t i0 = q.u >> s;
  const std::int64_t j0 = q.v >> s;
  std::vector<Cell> out;
  const Cell cands[3] = {{i0, j0, n}, {i0 - 1, j0, n}, {i0, j0 - 1, n}};
  for (const Cell& c : cands) {
    if (!is_construction_cell(c)) continue;
    const std::int64_t a = q.u - (c.u << s);
    const std::int64_t b = q.v - (c.v << s);
    if (a >= 0 && b >= 0 && a + b <= side) out.push_back(c);
  }
  return out;
}

/// Every vertex of every level-n triangle, i.e. the set V_n, in canonical form.
inline std::vector<LatticePoint> vertex_set(int n) {
  if (n < 0 || n > 20) throw std::invalid_argument("vertex_set level out of range");
  std::vector<LatticePoint> out;
  const std::int64_t side = std::int64_t{1} << n;
  for (std::int64_t v = 0; v <= side; ++v)
    for (std::int64_t u = 0; u + v <= side; ++u) {
      // (u, v) is a vertex iff it is a corner of some construction cell.
      const Cell cands[3] = {{u, v, n}, {u - 1, v, n}, {u, v - 1, n}};
      for (const Cell& c : cands)
        if (is_construction_cell(c)) {
          out.push_back(LatticePoint{u, v, n});
          break;
        }
    }
  return out;
}

/// Closed-form size of V_n.
inline std::int64_t vertex_count(int n) {
  std::int64_t p = 1;
  for (int i = 0; i <= n; ++i) p *= 3;
  return (p + 3) / 2;
}

/// Relative position of a level-l sub-triangle inside its level-0 ancestor
/// touches the boundary of that ancestor with a full edge.
inline bool is_boundary_cell(const Cell& rel) {
  const std::int64_t side = std::int64_t{1} << rel.depth;
  return rel.u == 0 || rel.v == 0 || rel.u + rel.v + 1 == side;
}

/// The generating family of the sub-self-similar set: level-l triangles with
/// an edge on the boundary of the unit triangle.
struct BoundaryFamilyL {
  int l = 0;
  std::vector<TriangleAddress> addresses;
};

inline BoundaryFamilyL boundary_family(int l) {
  if (l < 1) throw std::invalid_argument("boundary_family requires l >= 1");
  if (l > 20) throw std::invalid_argument("boundary_family level too large");
  BoundaryFamilyL fam{l, {}};
  // Boundary triangles form a prefix-closed tree; walk it instead of all 3^l.
  std::function<void(const Cell&, std::string&)> walk = [&](const Cell& c, std::string& w) {
    if (c.depth == l) {
      fam.addresses.emplace_back(w);
      return;
    }
    for (int i = 0; i < 3; ++i) {
      const Cell ch = c.child(i);
      if (!is_boundary_cell(ch)) continue;
      w.push_back(static_cast<char>('0' + i));
      walk(ch, w);
      w.pop_back();
    }
  };
  std::string w;
  walk(Cell{}, w);
  return fam;
}

/// tau_n^l: the level-n cylinders of the sub-self-similar set, as addresses of
/// length n*l.
inline std::vector<TriangleAddress> tau_l(int n, int l) {
  if (n < 0) throw std::invalid_argument("tau_l requires n >= 0");
  const BoundaryFamilyL fam = boundary_family(l);
  std::vector<TriangleAddress> level{TriangleAddress{}};
  for (int i = 0; i < n; ++i) {
    std::vector<TriangleAddress> next;
    next.reserve(level.size() * fam.addresses.size());
    for (const auto& a : level)
      for (const auto& b : fam.addresses) next.push_back(a.concat(b));
    level = std::move(next);
  }
  return level;
}

// ---------------------------------------------------------------------------
// The rescaled copy Delta* with vertices (0,0), (2/sqrt3, 0), (1/sqrt3, 1).

/// Point of the plane written as s*v2* + t*v3*. Then y = t exactly and
/// sqrt(3)*x = 2s + t, so both stay rational.
struct StarPoint {
  Rational s;
  Rational t;

  Rational y() const { return t; }
  Rational sqrt3_x() const { return 2 * s + t; }
  double x_double() const { return to_double(sqrt3_x()) / 1.7320508075688772935; }
  friend bool operator==(const StarPoint&, const StarPoint&) = default;
};

inline Rational distance_sq(const StarPoint& p, const StarPoint& q) {
  const Rational dx3 = p.sqrt3_x() - q.sqrt3_x();
  const Rational dy = p.t - q.t;
  return dx3 * dx3 / 3 + dy * dy;
}

/// Barycentric coordinates of a lattice point with respect to the geometric
/// vertices (v1, v2, v3) of a cell; the point need not lie inside.
inline std::array<Rational, 3> barycentric(const Cell& cell, const LatticePoint& p) {
  const int d = std::max(cell.depth, p.depth);
  const LatticePoint q = p.at_depth(d);
  const Rational scale = pow2(d - cell.depth);
  const Rational a = (Rational(q.u) - Rational(cell.u) * scale) / scale;
  const Rational b = (Rational(q.v) - Rational(cell.v) * scale) / scale;
  return {1 - a - b, a, b};
}

/// Similarity Psi_T mapping a construction triangle onto Delta*, with the
/// labelled vertex v_i sent to v_i*.
class Similarity {
 public:
  /// labels[i] is the geometric vertex index (0, 1, 2) of T playing v_{i+1}.
  Similarity(TriangleAddress addr, std::array<int, 3> labels) : addr_(std::move(addr)), cell_(cell_of(addr_)), labels_(labels) {
    std::array<bool, 3> seen{};
    for (int g : labels_) {
      if (g < 0 || g > 2 || seen[static_cast<std::size_t>(g)])
        throw std::invalid_argument("Psi labels must be a permutation of the triangle's vertices");
      seen[static_cast<std::size_t>(g)] = true;
    }
  }

  const TriangleAddress& address() const { return addr_; }
  const std::array<int, 3>& labels() const { return labels_; }
  int level() const { return addr_.level(); }

  StarPoint operator()(const LatticePoint& p) const {
    const auto w = barycentric(cell_, p);
    return {w[static_cast<std::size_t>(labels_[1])], w[static_cast<std::size_t>(labels_[2])]};
  }
  /// Barycentric weight of the labelled vertex v3 at p, i.e. the second
  /// coordinate of Psi_T(p).
  Rational height(const LatticePoint& p) const { return (*this)(p).t; }

  /// Exact square of the scale factor 2^n * 2/sqrt(3).
  Rational scale_sq() const { return pow2(2 * level()) * Rational(4, 3); }
  double scale() const { return std::ldexp(2.0 / 1.7320508075688772935, level()); }

 private:
  TriangleAddress addr_;
  Cell cell_;
  std::array<int, 3> labels_;
};

inline Similarity psi(const TriangleAddress& addr, std::array<int, 3> labels = {0, 1, 2}) {
  return Similarity(addr, labels);
}

// ---------------------------------------------------------------------------
// Horizontal lines through Delta* and the tiling T*_n.

enum class Orientation { up, down };

/// One tile of T*_n: row is the strip index floor(y 2^n), col the skew index.
struct LatticeTriangle {
  int n = 0;
  std::int64_t row = 0;
  std::int64_t col = 0;
  Orientation orientation = Orientation::up;
  friend auto operator<=>(const LatticeTriangle&, const LatticeTriangle&) = default;
};

/// Binary digits e_1..e_n of y in (0,1). Rejects y whose expansion terminates
/// within n digits, since then the line passes through lattice vertices.
inline std::vector<std::uint8_t> binary_digits(Rational y, int n) {
  if (y <= 0 || y >= 1) throw std::invalid_argument("level height must lie in (0,1)");
  std::vector<std::uint8_t> digits;
  digits.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    y *= 2;
    if (y >= 1) {
      digits.push_back(1);
      y -= 1;
    } else {
      digits.push_back(0);
    }
    if (y == 0) throw std::invalid_argument("dyadic level height hits lattice vertices");
  }
  return digits;
}

/// log2 of the number of level-n construction triangles of Delta* met by the
/// line with the given leading digits: the count of zero digits.
inline std::int64_t lattice_log2_count(std::span<const std::uint8_t> digits) {
  std::int64_t zeros = 0;
  for (auto e : digits) {
    if (e > 1) throw std::invalid_argument("binary digit outside {0,1}");
    zeros += (e == 0);
  }
  return zeros;
}

struct LatticeCount {
  BigInt up;     ///< construction triangles met, by the digit recursion
  BigInt down;   ///< down-pointing tiles of T*_n meeting Delta* on the line
  std::int64_t log2_up = 0;
  bool geometric_checked = false;
};

/// Construction triangles of Delta* at level n met by the line at height y
/// (closed triangles), found by exact coordinate comparison over all 3^n
/// triangles. Independent of the digit recursion.
inline std::vector<LatticeTriangle> line_hits_geometric(const Rational& y, int n) {
  if (n < 0 || n > 16) throw std::invalid_argument("geometric enumeration limited to n <= 16");
  std::vector<LatticeTriangle> hits;
  const Rational h = pow2(-n);
  std::function<void(const Cell&)> walk = [&](const Cell& c) {
    if (c.depth == n) {
      // Psi with identity labels: s = u/2^n, t = v/2^n at the lower-left.
      const Rational bottom = Rational(c.v) * h;
      if (bottom <= y && y <= bottom + h) hits.push_back({n, c.v, c.u, Orientation::up});
      return;
    }
    for (int i = 0; i < 3; ++i) walk(c.child(i));
  };
  walk(Cell{});
  return hits;
}

/// Down tiles adjacent (left and right) to the given up tiles, deduplicated.
inline std::set<LatticeTriangle> adjacent_down_tiles(const std::vector<LatticeTriangle>& ups) {
  std::set<LatticeTriangle> downs;
  for (const auto& t : ups) {
    downs.insert({t.n, t.row, t.col - 1, Orientation::down});
    downs.insert({t.n, t.row, t.col, Orientation::down});
  }
  return downs;
}

/// Count of level-n triangles of Delta* met by the horizontal line at height
/// y. The digit recursion gives 2^(number of zero digits); for n <= 14 the
/// result is cross-checked against exact geometry, and a mismatch throws.
inline LatticeCount lattice_count(const Rational& y, int n) {
  if (n < 0) throw std::invalid_argument("lattice_count requires n >= 0");
  const auto digits = binary_digits(y, n);
  LatticeCount out;
  out.log2_up = lattice_log2_count(digits);
  out.up = BigInt(1) << static_cast<unsigned>(out.log2_up);
  if (n <= 14) {
    const auto hits = line_hits_geometric(y, n);
    if (BigInt(hits.size()) != out.up)
      throw std::logic_error("digit recursion disagrees with geometric line intersection");
    out.down = BigInt(adjacent_down_tiles(hits).size());
    out.geometric_checked = true;
  }
  return out;
}

/// A non-dyadic height whose first n binary digits are the given ones.
inline Rational height_from_digits(std::span<const std::uint8_t> digits) {
  Rational y = 0;
  const int n = static_cast<int>(digits.size());
  for (int k = 0; k < n; ++k)
    if (digits[static_cast<std::size_t>(k)]) y += pow2(-(k + 1));
  return y + pow2(-n) / 3;
}

}  // namespace hl
