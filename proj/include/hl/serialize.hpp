#pragma once

// JSON forms of the library objects. Rationals are "num/den" strings,
// addresses are digit strings, CoordQ3 values are "(a,b,k)".

#include "hl/exact.hpp"
#include "hl/holder_functions.hpp"
#include "hl/levelset.hpp"
#include "hl/separated_cantor.hpp"
#include "hl/triangle_geometry.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace hl {

using json = nlohmann::json;

/// A vertex of V_n written as the address of a level-n triangle followed by
/// the corner digit; the lexicographically smallest spelling is canonical.
inline std::string vertex_address(const LatticePoint& p, int n) {
  std::string best;
  for (const Cell& c : cells_containing(p, n)) {
    const auto vs = c.vertices();
    for (int i = 0; i < 3; ++i)
      if (vs[static_cast<std::size_t>(i)] == p) {
        const std::string s = address_of(c).str() + static_cast<char>('0' + i);
        if (best.empty() || s < best) best = s;
      }
  }
  if (best.empty()) throw std::invalid_argument("point is not a vertex of V_n");
  return best;
}

inline LatticePoint parse_vertex_address(const std::string& s, int n) {
  if (static_cast<int>(s.size()) != n + 1) throw std::invalid_argument("vertex address '" + s + "' has the wrong length");
  const TriangleAddress w = TriangleAddress::parse(s.substr(0, s.size() - 1));
  const int corner = s.back() - '0';
  if (corner < 0 || corner > 2) throw std::invalid_argument("vertex corner digit outside {0,1,2}");
  return cell_of(w).vertices()[static_cast<std::size_t>(corner)].canonical();
}

inline json to_json(const PiecewiseAffineFn& f) {
  json entries = json::array();
  std::map<std::string, std::string> sorted;
  for (const auto& [p, v] : f.entries()) sorted.emplace(vertex_address(p, f.level()), to_string(v));
  for (const auto& [a, v] : sorted) entries.push_back(json::array({a, v}));
  return json{{"level", f.level()}, {"entries", entries}};
}

inline PiecewiseAffineFn paf_from_json(const json& j) {
  const int level = j.at("level").get<int>();
  std::map<std::pair<std::int64_t, std::int64_t>, Rational> table;
  for (const auto& e : j.at("entries")) {
    const LatticePoint p = parse_vertex_address(e.at(0).get<std::string>(), level).at_depth(level);
    table[{p.u, p.v}] = parse_rational(e.at(1).get<std::string>());
  }
  return PiecewiseAffineFn(level, [&](const LatticePoint& p) {
    auto it = table.find({p.u, p.v});
    if (it == table.end()) throw std::invalid_argument("JSON table misses a vertex of V_n");
    return it->second;
  });
}

inline json to_json(const ApproxLevelSet& s) {
  json members = json::array();
  for (const auto& m : s.members)
    members.push_back(json{{"address", m.address.str()}, {"kappa_exp", m.kappa_exp}, {"mu", to_string(m.mu)}});
  return json{{"r", to_string(s.r)}, {"n", s.n}, {"l", s.l}, {"members", members}};
}

inline ApproxLevelSet level_set_from_json(const json& j) {
  ApproxLevelSet s;
  s.r = parse_rational(j.at("r").get<std::string>());
  s.n = j.at("n").get<int>();
  s.l = j.at("l").get<int>();
  for (const auto& m : j.at("members"))
    s.members.push_back({TriangleAddress::parse(m.at("address").get<std::string>()), m.at("kappa_exp").get<int>(),
                         parse_rational(m.at("mu").get<std::string>())});
  return s;
}

inline json to_json(const CoordQ3& c) { return c.str(); }
inline json to_json(const PointQ3& p) { return json::array({p.x.str(), p.y.str()}); }
inline CoordQ3 coord_from_json(const json& j) { return CoordQ3::parse(j.get<std::string>()); }

inline json to_json(const std::vector<Interval>& ivs) {
  json out = json::array();
  for (const auto& [a, b] : ivs) out.push_back(json::array({to_string(a), to_string(b)}));
  return out;
}

inline std::vector<Interval> intervals_from_json(const json& j) {
  std::vector<Interval> out;
  for (const auto& e : j) out.emplace_back(parse_rational(e.at(0).get<std::string>()), parse_rational(e.at(1).get<std::string>()));
  return out;
}

inline json to_json(const SeparatedStructure& s) {
  json levels = json::array();
  for (const auto& lv : s.levels)
    levels.push_back(json{{"k", lv.k},
                          {"count", lv.count},
                          {"max_diameter", lv.max_diameter},
                          {"min_distance", lv.min_distance},
                          {"diameter_ok", lv.diameter_ok},
                          {"distance_ok", lv.distance_ok}});
  json out{{"nu", s.nu}, {"rho", s.rho}, {"K", s.K}, {"K_required", s.K_required}, {"L_star", s.L_star},
           {"certified", s.certified}, {"levels", levels}};
  if (s.rho_self_similar) out["rho_self_similar"] = *s.rho_self_similar;
  return out;
}

}  // namespace hl
