#include "hl/levelset.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace hl;

namespace {

const PiecewiseAffineFn& plain_ramp() {
  static const PiecewiseAffineFn f = PiecewiseAffineFn::affine(0, 0, 1);
  return f;
}

// Standard functions used as a small corpus; levels 2..4.
std::vector<PiecewiseAffineFn> corpus(std::size_t count) {
  std::vector<PiecewiseAffineFn> out;
  for (std::uint64_t seed = 0; seed < count; ++seed)
    out.push_back(random_standard_paf(1000 + seed, 2 + static_cast<int>(seed % 3), 0.5, 0.9));
  return out;
}

}  // namespace

TEST(LevelValue, RejectsVertexValues) {
  const auto g = standardize(plain_ramp());
  EXPECT_THROW(LevelValue(g, Rational(0), 3), LevelCollision);
  EXPECT_THROW(LevelValue(plain_ramp(), Rational(1, 2), 1), LevelCollision);  // midpoint of v1v3
  EXPECT_THROW(LevelValue(plain_ramp(), Rational(3, 8), 3), LevelCollision);
  try {
    LevelValue(plain_ramp(), Rational(1, 4), 2);
    FAIL();
  } catch (const LevelCollision& e) {
    EXPECT_EQ(to_double(plain_ramp().eval(e.vertex())), 0.25);
  }
  EXPECT_NO_THROW(LevelValue(plain_ramp(), Rational(1, 3), 10));
}

TEST(LevelValue, NonDyadicTablesAreScanned) {
  const auto f = PiecewiseAffineFn::affine(0, Rational(1, 3), Rational(2, 3));
  EXPECT_THROW(LevelValue(f, Rational(1, 6), 1), LevelCollision);  // midpoint of v1v2
  EXPECT_NO_THROW(LevelValue(f, Rational(1, 7), 4));
}

TEST(AdmissibleLevels, InsideHullAndAvoidVertices) {
  std::mt19937_64 rng(3);
  const auto f = random_standard_paf(11, 3, 0.5, 0.9);
  const auto rs = admissible_levels(f, 20, rng, 6);
  ASSERT_EQ(rs.size(), 20u);
  const auto v = f.values_on(Cell{});
  for (const auto& r : rs) {
    EXPECT_TRUE(straddles(v, r.value()));
    EXPECT_FALSE(is_dyadic(r.value()));
  }
  std::mt19937_64 rng2(3);
  EXPECT_TRUE(admissible_levels(PiecewiseAffineFn::affine(2, 2, 2), 5, rng2, 3).empty());
}

TEST(ExtremeLabeling, Examples) {
  const auto e = extreme_labeling({Rational(0), Rational(1), Rational(2)});
  EXPECT_EQ(e.low, 0);
  EXPECT_EQ(e.high, 2);
  EXPECT_EQ(e.mid, 1);
  EXPECT_FALSE(e.low_tie || e.high_tie || e.degenerate);

  const auto t = extreme_labeling({Rational(0), Rational(0), Rational(1)});
  EXPECT_EQ(t.low, 0);  // only the first of the tied minima
  EXPECT_EQ(t.high, 2);
  EXPECT_TRUE(t.low_tie);

  const auto h = extreme_labeling({Rational(3), Rational(1), Rational(3)});
  EXPECT_EQ(h.high, 0);
  EXPECT_EQ(h.low, 1);
  EXPECT_TRUE(h.high_tie);

  const auto d = extreme_labeling({Rational(5), Rational(5), Rational(5)});
  EXPECT_TRUE(d.degenerate);
}

TEST(ExtremeLabeling, OrderInvariant) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    std::array<Rational, 3> v{Rational(static_cast<long long>(rng() % 4)), Rational(static_cast<long long>(rng() % 4)),
                              Rational(static_cast<long long>(rng() % 4))};
    const auto e = extreme_labeling(v);
    if (e.degenerate) continue;
    EXPECT_LE(v[static_cast<std::size_t>(e.low)], v[static_cast<std::size_t>(e.mid)]);
    EXPECT_LE(v[static_cast<std::size_t>(e.mid)], v[static_cast<std::size_t>(e.high)]);
    EXPECT_NE(e.low, e.high);
    // tie goes to the smallest index
    for (int j = 0; j < e.low; ++j) EXPECT_GT(v[static_cast<std::size_t>(j)], v[static_cast<std::size_t>(e.low)]);
    for (int j = 0; j < e.high; ++j) EXPECT_LT(v[static_cast<std::size_t>(j)], v[static_cast<std::size_t>(e.high)]);
  }
}

TEST(SubdivisionL, Corners) {
  for (int l = 1; l <= 5; ++l) {
    const SubdivisionL sub(l);
    EXPECT_EQ(sub.size(), static_cast<std::size_t>(3 * ((1 << l) - 1)));
    for (int e = 0; e < 3; ++e)
      EXPECT_EQ(sub.word(static_cast<std::size_t>(sub.corner(e))).str(), std::string(static_cast<std::size_t>(l), static_cast<char>('0' + e)));
  }
}

TEST(ApproxLevelSet, ConstantFunctionIsEmpty) {
  const auto f = PiecewiseAffineFn::affine(1, 1, 1);
  for (const Rational& r : {Rational(0), Rational(1, 2), Rational(2)}) {
    const LevelSetTree tree(f, r, 3, 1);
    EXPECT_TRUE(tree.empty());
    EXPECT_TRUE(tree.at(3).members.empty());
  }
}

TEST(ApproxLevelSet, RampExampleOneThird) {
  // plain affine (0,0,1): children at v1 and v2 carry hull [0,1/2], the one at v3 carries [1/2,1]
  const LevelSetTree tree(plain_ramp(), Rational(1, 3), 1, 1);
  const auto set = tree.at(1);
  ASSERT_EQ(set.members.size(), 2u);
  EXPECT_EQ(set.members[0].address.str(), "0");
  EXPECT_EQ(set.members[1].address.str(), "1");
  EXPECT_EQ(set.members[0].kappa_exp, 0);  // at the low extreme vertex
  EXPECT_EQ(set.members[1].kappa_exp, 1);
  EXPECT_EQ(set.kappa_sum(), Rational(3, 2));
  EXPECT_EQ(set.members[0].mu, Rational(2, 3));
  EXPECT_EQ(set.members[1].mu, Rational(1, 3));
}

TEST(ApproxLevelSet, RampExampleTwoThirds) {
  const auto set = LevelSetTree(plain_ramp(), Rational(2, 3), 1, 1).at(1);
  ASSERT_EQ(set.members.size(), 1u);
  EXPECT_EQ(set.members[0].address.str(), "2");
  EXPECT_EQ(set.members[0].kappa_exp, 0);
  EXPECT_EQ(set.members[0].mu, 1);
}

TEST(ApproxLevelSet, StandardizedRampExample) {
  // After standardization the child at v2 is constant 0 and the child at v3
  // carries (1,0,1): members are the children at v1 and v3, both extreme.
  const auto g = standardize(plain_ramp());
  const auto set = approx_level_set(g, LevelValue(g, Rational(1, 3), 4), 1, 1);
  ASSERT_EQ(set.members.size(), 2u);
  EXPECT_EQ(set.members[0].address.str(), "0");
  EXPECT_EQ(set.members[1].address.str(), "2");
  EXPECT_EQ(set.kappa_sum(), 2);
  const auto hi = LevelSetTree(g, Rational(2, 3), 1, 1).at(1);
  ASSERT_EQ(hi.members.size(), 2u);
  EXPECT_EQ(hi.members[1].address.str(), "2");
}

TEST(ApproxLevelSet, TowerInsideFullLevelSet) {
  std::mt19937_64 rng(5);
  for (const auto& f : corpus(6))
    for (int l = 1; l <= 2; ++l)
      for (const auto& r : admissible_levels(f, 4, rng, 8)) {
        const int n = l == 1 ? 5 : 2;
        const LevelSetTree tree(f, r.value(), n, l);
        for (int k = 0; k <= n; ++k) {
          const auto full = full_level_set(f, r.value(), k, l);
          const std::set<TriangleAddress> fs(full.begin(), full.end());
          for (const auto& m : tree.at(k).members) EXPECT_TRUE(fs.count(m.address));
          EXPECT_FALSE(tree.at(k).members.empty());
        }
      }
}

TEST(ApproxLevelSet, NestingAndMonotoneShrink) {
  std::mt19937_64 rng(6);
  for (const auto& f : corpus(10))
    for (const auto& r : admissible_levels(f, 5, rng, 8)) {
      const LevelSetTree tree(f, r.value(), 6, 1);
      for (int k = 0; k < 6; ++k) {
        const auto cur = tree.at(k);
        const auto next = tree.at(k + 1);
        for (const auto& m : cur.members) {
          bool has_child = false;
          for (int i = 0; i < 3; ++i) has_child = has_child || next.find(m.address.child(i));
          EXPECT_TRUE(has_child) << m.address.str();
        }
        for (const auto& m : next.members) EXPECT_TRUE(cur.find(m.address.parent()));
      }
    }
}

TEST(ApproxLevelSet, RejectsCollisions) {
  EXPECT_THROW(LevelSetTree(plain_ramp(), Rational(1, 2), 2, 1), LevelCollision);
  EXPECT_THROW(full_level_set(plain_ramp(), Rational(1, 4), 2, 1), LevelCollision);
}

TEST(Conductivity, Examples) {
  const Rational r(1, 3);
  EXPECT_EQ(conductivity(plain_ramp(), r, TriangleAddress{}), 1);
  EXPECT_EQ(conductivity(plain_ramp(), r, TriangleAddress("0")), 1);
  EXPECT_EQ(conductivity(plain_ramp(), r, TriangleAddress("1")), Rational(1, 2));
  EXPECT_THROW(conductivity(plain_ramp(), r, TriangleAddress("2")), std::invalid_argument);
}

TEST(Conductivity, MatchesChainRecount) {
  // kappa = 2^-(number of steps whose child index is neither extreme vertex)
  std::mt19937_64 rng(7);
  for (const auto& f : corpus(8))
    for (const auto& r : admissible_levels(f, 3, rng, 8)) {
      const auto set = LevelSetTree(f, r.value(), 5, 1).at(5);
      for (const auto& m : set.members) {
        int steps = 0;
        for (int k = 0; k < m.address.level(); ++k) {
          const auto e = extreme_labeling(f, m.address.prefix(k));
          const int d = m.address.digit(k);
          steps += (d != e.low && d != e.high) ? 1 : 0;
        }
        EXPECT_EQ(m.kappa_exp, steps);
      }
    }
}

TEST(Conductivity, TwoNonExtremeStepsGiveAQuarter) {
  std::mt19937_64 rng(8);
  bool seen = false;
  for (const auto& f : corpus(10))
    for (const auto& r : admissible_levels(f, 5, rng, 8))
      for (const auto& m : LevelSetTree(f, r.value(), 2, 1).at(2).members)
        if (m.kappa_exp == 2) {
          EXPECT_EQ(conductivity(f, r.value(), m.address), Rational(1, 4));
          seen = true;
        }
  EXPECT_TRUE(seen);
}

TEST(Conservation, RampExample) {
  const auto res = conservation_check(plain_ramp(), Rational(1, 3), TriangleAddress{}, 1);
  EXPECT_EQ(res.lhs, Rational(3, 2));
  EXPECT_EQ(res.rhs, 1);
  EXPECT_TRUE(res.pass);
  EXPECT_EQ(res.descendants, 2u);
}

TEST(Conservation, SingleExtremeChainIsEquality) {
  const auto res = conservation_check(plain_ramp(), Rational(2, 3), TriangleAddress{}, 1);
  EXPECT_EQ(res.lhs, res.rhs);
  EXPECT_TRUE(res.pass);
}

TEST(Conservation, CorpusProperty) {
  std::mt19937_64 rng(9);
  std::size_t checks = 0;
  for (const auto& f : corpus(12))
    for (int l = 1; l <= 2; ++l)
      for (const auto& r : admissible_levels(f, 4, rng, 8)) {
        const int depth = l == 1 ? 5 : 3;
        const LevelSetTree tree(f, r.value(), depth, l);
        for (int n = 0; n < depth; ++n)
          for (const auto& node : tree.level(n))
            for (int k = 1; n + k <= depth && k <= 3; ++k) {
              const auto res = conservation_check(tree, node.address, k);
              EXPECT_TRUE(res.pass) << node.address.str() << " k=" << k;
              ++checks;
            }
      }
  EXPECT_GT(checks, 100u);
}

TEST(Measure, NormalizedAndBelowKappa) {
  std::mt19937_64 rng(10);
  for (const auto& f : corpus(12))
    for (int l = 1; l <= 2; ++l)
      for (const auto& r : admissible_levels(f, 4, rng, 8)) {
        const LevelSetTree tree(f, r.value(), l == 1 ? 6 : 3, l);
        const auto mc = check_measure(tree);
        EXPECT_TRUE(mc.normalized);
        EXPECT_TRUE(mc.below_kappa);
        EXPECT_LE(mc.max_mu_over_kappa, 1);
      }
}

TEST(Measure, ConductivityMeasureMap) {
  const auto mu = conductivity_measure(plain_ramp(), Rational(1, 3), 1);
  ASSERT_EQ(mu.size(), 2u);
  EXPECT_EQ(mu.at(TriangleAddress("0")), Rational(2, 3));
  EXPECT_THROW(conductivity_measure(plain_ramp(), Rational(3, 2), 1), std::invalid_argument);
}

TEST(Census, ConstantOracles) {
  EXPECT_NEAR(census_constant(1.0, 0.5, 6), 0.70832, 5e-6);
  EXPECT_NEAR(census_constant(1.0, 0.5, 5), 0.99373, 5e-6);
  EXPECT_NEAR(census_constant(1.0, 0.5, 5, true), 1.00963, 5e-6);
  EXPECT_THROW(census_constant(1.0, 0.0, 3), std::invalid_argument);
}

TEST(Census, LevelZero) {
  const auto f = random_standard_paf(1, 2, 0.5, 0.9);
  const auto res = well_conducting_census(f, 0, 1, Rational(1, 2), 0.5);
  EXPECT_EQ(res.count, 1);
  EXPECT_GE(res.binomial_bound, 1.0);
  EXPECT_TRUE(res.within_bound);
}

TEST(Census, RejectsNonIntegerBudget) {
  const auto f = random_standard_paf(1, 2, 0.5, 0.9);
  EXPECT_THROW(well_conducting_census(f, 3, 1, Rational(1, 2), 0.5), std::invalid_argument);
  EXPECT_NO_THROW(well_conducting_census(f, 3, 1, Rational(1, 3), 0.5));
}

TEST(Census, MatchesUnprunedCount) {
  for (const auto& f : corpus(6))
    for (int n : {2, 4}) {
      const auto res = well_conducting_census(f, n, 1, Rational(1, 2), 0.5);
      // unpruned enumeration of tau_n with the same recursion
      BigInt brute = 0;
      for (const auto& a : tau_l(n, 1)) {
        int halvings = 0;
        for (int k = 0; k < n; ++k) {
          const auto e = extreme_labeling(f, a.prefix(k));
          const int d = a.digit(k);
          halvings += (e.degenerate || (d != e.low && d != e.high)) ? 1 : 0;
        }
        if (2 * halvings <= n) ++brute;
      }
      EXPECT_EQ(res.count, brute);
      EXPECT_TRUE(res.within_bound);
    }
}

TEST(Census, BinomialBoundValue) {
  // n = 4, d1 = 1/2, l = 1: (e 4/2)^2 3^2 2^2
  const auto f = random_standard_paf(2, 2, 0.5, 0.9);
  const auto res = well_conducting_census(f, 4, 1, Rational(1, 2), 1.0);
  EXPECT_NEAR(res.binomial_bound, std::pow(2 * std::numbers::e, 2) * 9 * 4, 1e-9);
  EXPECT_NEAR(res.image_measure, std::pow(census_constant(1.0, 0.5, 1), 4), 1e-12);
}
