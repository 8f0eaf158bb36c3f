#include "hl/separated_cantor.hpp"

#include <gtest/gtest.h>

using namespace hl;

TEST(FatCantor, LengthsAndGaps) {
  EXPECT_EQ(cantor_length(0), 1);
  EXPECT_EQ(cantor_length(1), Rational(1, 3));
  EXPECT_EQ(cantor_length(3), Rational(1, 15));
  for (int m = 1; m <= 40; ++m) EXPECT_EQ(cantor_gap(m), cantor_length(m - 1) - 2 * cantor_length(m));
  // the gap at level m is below 4^-m from m = 2 on
  EXPECT_GT(cantor_gap(1), Rational(1, 4));
  for (int m = 2; m <= 40; ++m) EXPECT_LT(cantor_gap(m), pow2(-2 * m));
  EXPECT_THROW(cantor_gap(0), std::invalid_argument);
}

TEST(FatCantor, MeasureClosedFormAndRemoval) {
  for (int n = 0; n <= 30; ++n) {
    const FatCantorSet C(n);
    const Rational expect = Rational(BigInt(1) << n, (BigInt(1) << (n + 1)) - 1);
    EXPECT_EQ(C.measure(), expect);
    EXPECT_EQ(C.measure_by_removal(), expect);
  }
  EXPECT_LT(abs(FatCantorSet(20).measure() - Rational(1, 2)), Rational(1, 1000000));
}

TEST(FatCantor, IntervalsSumToMeasure) {
  for (int n = 0; n <= 12; ++n) {
    const FatCantorSet C(n);
    const auto iv = C.intervals();
    ASSERT_EQ(iv.size(), C.count());
    Rational total = 0;
    for (const auto& [a, b] : iv) total += b - a;
    EXPECT_EQ(total, C.measure());
  }
}

TEST(FatCantor, LazyIntervalsMatchMaterialized) {
  for (int n = 0; n <= 9; ++n) {
    const FatCantorSet C(n);
    const auto iv = C.intervals();
    for (std::uint64_t i = 0; i < C.count(); ++i) EXPECT_EQ(C.interval(i), iv[i]);
  }
  EXPECT_EQ(FatCantorSet(40).interval((std::uint64_t{1} << 40) - 1).second, 1);
  EXPECT_THROW(FatCantorSet(3).interval(8), std::out_of_range);
}

TEST(FatCantor, NestedAndSeparated) {
  const int n = 10;
  const auto parent = FatCantorSet(n - 1).intervals();
  const auto iv = FatCantorSet(n).intervals();
  for (std::size_t i = 0; i < iv.size(); ++i) {
    EXPECT_GE(iv[i].first, parent[i / 2].first);
    EXPECT_LE(iv[i].second, parent[i / 2].second);
    if (i + 1 < iv.size()) {
      EXPECT_GT(iv[i + 1].first, iv[i].second);
    }
  }
  // siblings are separated by exactly the level-n gap
  EXPECT_EQ(iv[1].first - iv[0].second, cantor_gap(n));
}

TEST(Capacity, DirectBelowClosedForm) {
  for (int i = 0; i <= 9; ++i) {
    const double alpha = 0.55 + 0.05 * i;
    for (int k = 0; k <= 20; ++k) {
      const auto g = capacity_gap(k, alpha);
      ASSERT_TRUE(g.closed_form_bound.has_value());
      EXPECT_LE(g.direct_sum + g.tail_bound, *g.closed_form_bound) << alpha << " " << k;
      EXPECT_FALSE(g.diverges);
    }
  }
}

TEST(Capacity, RatioDecreasing) {
  for (int i = 0; i <= 9; ++i) {
    const double alpha = 0.55 + 0.05 * i;
    // close to 1/2 the first few levels still grow before the decay sets in
    const int k0 = alpha >= 0.7 ? 0 : 3;
    double prev = capacity_gap(k0, alpha).ratio;
    for (int k = k0 + 1; k <= 20; ++k) {
      const double r = capacity_gap(k, alpha).ratio;
      EXPECT_LT(r, prev) << alpha << " " << k;
      prev = r;
    }
  }
  EXPECT_GT(capacity_gap(1, 0.55).ratio, capacity_gap(0, 0.55).ratio);
}

TEST(Capacity, RatioOracleAtThreeQuarters) {
  // direct sums evaluated separately at 40 digits
  EXPECT_NEAR(capacity_gap(0, 0.75).direct_sum, 1.0267709044702096, 1e-12);
  EXPECT_NEAR(capacity_gap(12, 0.75).direct_sum, 2.738169288340304e-6, 1e-17);
  EXPECT_NEAR(capacity_gap(12, 0.75).ratio, 0.022428344640795428, 1e-12);
  // the ratio decays like 2^{-(k+1)/2}: below 1e-3 only from k = 21
  EXPECT_GE(capacity_gap(20, 0.75).ratio, 1e-3);
  EXPECT_LT(capacity_gap(21, 0.75).ratio, 1e-3);
  EXPECT_GE(capacity_gap(5, 0.75).ratio, 0.25);
  EXPECT_LT(capacity_gap(6, 0.75).ratio, 0.25);
}

TEST(Capacity, DivergenceFlag) {
  const auto g = capacity_gap(3, 0.4);
  EXPECT_TRUE(g.diverges);
  EXPECT_FALSE(g.closed_form_bound.has_value());
  ASSERT_EQ(g.partial_sums.size(), 64u);
  for (std::size_t i = 1; i < g.partial_sums.size(); ++i) EXPECT_GT(g.partial_sums[i], g.partial_sums[i - 1]);
  EXPECT_GT(g.partial_sums.back(), 100 * g.partial_sums.front());
  EXPECT_TRUE(capacity_gap(3, 0.5).diverges);
  EXPECT_FALSE(capacity_gap(3, 0.51).diverges);
}

TEST(Product, LevelChecksExact) {
  for (int k = 2; k <= 10; ++k) {
    const auto c = product_level_check(k);
    EXPECT_TRUE(c.diameter_ok);
    EXPECT_TRUE(c.distance_ok);
    EXPECT_EQ(c.min_distance, cantor_gap(k));
    EXPECT_NEAR(c.K_diam, std::sqrt(2.0) * std::exp2(k) / (std::exp2(k + 1) - 1), 1e-15);
    EXPECT_LT(c.K_diam, 2.0);
    EXPECT_LT(c.K_dist, 2.0);
  }
  EXPECT_THROW(product_level_check(1), std::invalid_argument);
}

TEST(Product, StructureCertified) {
  const auto s = product_separated_structure(10);
  EXPECT_TRUE(s.certified);
  EXPECT_EQ(s.nu, 0.5);
  EXPECT_EQ(s.rho, 0.25);
  EXPECT_EQ(s.K, 2.0);
  EXPECT_DOUBLE_EQ(s.threshold(), 0.5);
  // the binding constant is the distance one at k = 10: 1023 * 2047 / 4^10
  EXPECT_NEAR(s.K_required, 1023.0 * 2047.0 / 1048576.0, 1e-15);
  EXPECT_EQ(s.levels.size(), 9u);
  EXPECT_EQ(s.levels.back().count, std::size_t{1} << 20);
}

TEST(Ifs, TwoRatioExample) {
  const std::vector<AffineMap1D> maps{{Rational(1, 2), Rational(0), {}, {}}, {Rational(1, 4), Rational(3, 4), {}, {}}};
  const auto s = ifs_separated_structure(maps, {Rational(0), Rational(1)});
  EXPECT_DOUBLE_EQ(s.nu, 0.25);
  EXPECT_DOUBLE_EQ(s.L_star, 2.0);
  EXPECT_DOUBLE_EQ(s.rho, 1.0 / 16);
  ASSERT_TRUE(s.rho_self_similar.has_value());
  EXPECT_DOUBLE_EQ(*s.rho_self_similar, 0.25);
  EXPECT_DOUBLE_EQ(s.K, 8.0);
  EXPECT_TRUE(s.certified);
}

TEST(Ifs, MiddleThirds) {
  const std::vector<AffineMap1D> maps{{Rational(1, 3), Rational(0), {}, {}}, {Rational(1, 3), Rational(2, 3), {}, {}}};
  const auto s = ifs_separated_structure(maps, {Rational(0), Rational(1)}, 5);
  EXPECT_TRUE(s.certified);
  EXPECT_NEAR(s.threshold(), 1.0, 1e-15);
  for (const auto& lv : s.levels) EXPECT_EQ(lv.count, std::size_t{1} << lv.k);
}

TEST(Ifs, SplitCylindersCoverAttractor) {
  const std::vector<AffineMap1D> maps{{Rational(1, 2), Rational(0), {}, {}}, {Rational(-1, 4), Rational(1), {}, {}}};
  const Interval hull{Rational(0), Rational(1)};
  for (int k = 0; k <= 5; ++k) {
    const auto fam = split_cylinders(maps, hull, k, 0.25);
    // with |F| = 1 each cylinder is as long as its ratio product
    for (const auto& c : fam) EXPECT_EQ(c.hull.second - c.hull.first, c.ratio);
    for (std::size_t i = 0; i + 1 < fam.size(); ++i) EXPECT_LT(fam[i].hull.second, fam[i + 1].hull.first);
  }
}

TEST(Ifs, NonSimilarityBounds) {
  std::vector<AffineMap1D> maps{{Rational(1, 2), Rational(0), 0.4, 0.5}, {Rational(1, 4), Rational(3, 4), 0.2, 0.3}};
  const auto s = ifs_separated_structure(maps, {Rational(0), Rational(1)}, 3);
  EXPECT_DOUBLE_EQ(s.nu, 0.2);
  EXPECT_NEAR(s.L_star, std::log(0.2) / std::log(0.5), 1e-15);
  EXPECT_FALSE(s.rho_self_similar.has_value());
}

TEST(Ifs, Errors) {
  const Interval hull{Rational(0), Rational(1)};
  EXPECT_THROW(ifs_separated_structure({{Rational(1, 2), Rational(0), {}, {}}}, hull), std::invalid_argument);
  EXPECT_THROW(ifs_separated_structure({{Rational(1, 2), Rational(0), {}, {}}, {Rational(1, 2), Rational(1, 2), {}, {}}}, hull),
               std::invalid_argument);
  EXPECT_THROW(ifs_separated_structure({{Rational(1, 2), Rational(0), {}, {}}, {Rational(1), Rational(0), {}, {}}}, hull),
               std::invalid_argument);
}

TEST(Feasibility, BelowThreshold) {
  const auto s = product_separated_structure(10);
  const auto res = piecewise_constant_feasibility(0.4, 0.5, 1.0, s, 0);
  EXPECT_EQ(res.regime, Regime::below_threshold);
  ASSERT_TRUE(res.first_feasible_k.has_value());
  // lhs/rhs = 2^{3.4 - 0.2 k}: equality at k = 17
  EXPECT_EQ(*res.first_feasible_k, 17);
  EXPECT_FALSE(res.feasible);
  EXPECT_TRUE(piecewise_constant_feasibility(0.4, 0.5, 1.0, s, 17).feasible);
  EXPECT_TRUE(piecewise_constant_feasibility(0.4, 0.5, 1.0, s, 30).feasible);
  EXPECT_FALSE(res.monotone_infeasible);
}

TEST(Feasibility, AboveThreshold) {
  const auto s = product_separated_structure(10);
  const auto res = piecewise_constant_feasibility(0.6, 0.5, 1.0, s, 10, 60);
  EXPECT_EQ(res.regime, Regime::above_threshold);
  EXPECT_FALSE(res.first_feasible_k.has_value());
  EXPECT_TRUE(res.monotone_infeasible);
  EXPECT_EQ(res.checked_up_to, 60);
  EXPECT_NEAR(res.log_ratio_step, std::log(0.5) - 0.6 * std::log(0.25), 1e-15);
  EXPECT_NEAR(res.lhs / res.rhs, std::exp2(3.6 + 0.2 * 10), 1e-9);
}

TEST(Feasibility, Boundary) {
  const auto s = product_separated_structure(4);
  const auto res = piecewise_constant_feasibility(0.5, 0.5, 1.0, s, 5);
  EXPECT_EQ(res.regime, Regime::boundary);
  EXPECT_FALSE(res.first_feasible_k.has_value());
  EXPECT_FALSE(res.monotone_infeasible);  // constant, not increasing
}

TEST(Phase, CantorEndpoints) {
  const auto e = cantor_endpoints(1);
  EXPECT_EQ(e, (std::vector<Rational>{0, Rational(1, 3), Rational(2, 3), 1}));
}

TEST(Phase, PerturbationCertificate) {
  PhaseTransitionConfig cfg;
  cfg.alpha = 0.75;
  cfg.c = Rational(1, 2);
  cfg.k = 6;
  cfg.ix = 5;
  cfg.iy = 9;
  const Rational c = cfg.c;
  const auto rep = phase_perturbation([&](const Rational& x, const Rational& y) { return c * (x + y) / 2; }, cfg);
  EXPECT_FALSE(rep.mirrored);
  EXPECT_TRUE(rep.large_change);
  EXPECT_GE(rep.large_change_lhs, rep.large_change_rhs);
  EXPECT_EQ(rep.x2 - rep.x1, cantor_length(6));
  EXPECT_TRUE(rep.base_ok);
  EXPECT_TRUE(rep.h_lipschitz);
  EXPECT_TRUE(rep.perturbed_ok);
  EXPECT_TRUE(rep.capacity_ok);
  EXPECT_GT(rep.guaranteed_length, 0.0);
  EXPECT_LT(0.5 * std::pow(to_double(rep.r), 0.75), rep.delta_prime);
  EXPECT_EQ(rep.eta, pow2(-(rep.k_prime + 1)));
  EXPECT_TRUE(rep.all_ok());
}

TEST(Phase, MirroredWhenDecreasing) {
  PhaseTransitionConfig cfg;
  cfg.k = 6;
  cfg.ix = 3;
  cfg.grid_depth = 3;
  const auto rep = phase_perturbation([](const Rational& x, const Rational& y) { return (y - x) / 4; }, cfg);
  EXPECT_TRUE(rep.mirrored);
  EXPECT_TRUE(rep.large_change);
  EXPECT_EQ(rep.large_change_lhs, Rational(1, 4) * (rep.x2 - rep.x1) + Rational(1, 2) * (rep.x2 - rep.x1));
}

TEST(Phase, CapacityFailsWhenLevelTooCoarse) {
  PhaseTransitionConfig cfg;
  cfg.k = 2;
  cfg.grid_depth = 2;
  const auto rep = phase_perturbation([](const Rational& x, const Rational&) { return x / 4; }, cfg);
  EXPECT_FALSE(rep.capacity_ok);
  EXPECT_FALSE(rep.all_ok());
  EXPECT_TRUE(rep.large_change);
}
