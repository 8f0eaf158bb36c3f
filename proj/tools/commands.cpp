#include "commands.hpp"

#include "hl/hl.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hl::cli {

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string exact(const Rational& q) { return to_string(q); }

Rational d1_of(const RunConfig& cfg) { return cfg.d1.empty() ? default_d1(cfg.alpha) : parse_rational(cfg.d1); }

PiecewiseAffineFn make_function(const RunConfig& cfg) {
  if (cfg.function == "random") return random_standard_paf(cfg.seed, cfg.level, cfg.alpha, 0.9);
  if (cfg.function == "ramp") return standardize(PiecewiseAffineFn::affine(0, 0, 1));
  if (cfg.function == "constant") return PiecewiseAffineFn::affine(1, 1, 1);
  std::ifstream in(cfg.function);
  if (!in) throw UsageError("cannot read function file '" + cfg.function + "'");
  return paf_from_json(nlohmann::json::parse(in));
}

// An explicit --r that hits a vertex value is replaced by a fresh draw.
std::vector<LevelValue> choose_levels(const RunConfig& cfg, const PiecewiseAffineFn& f, std::ostream& err) {
  const int depth = std::min(cfg.depth * cfg.l, 10);
  std::mt19937_64 rng(cfg.seed);
  if (!cfg.r.empty()) {
    try {
      return {LevelValue(f, parse_rational(cfg.r), depth)};
    } catch (const LevelCollision& e) {
      err << "note: " << e.what() << "; resampling\n";
      return admissible_levels(f, 1, rng, depth);
    }
  }
  auto out = admissible_levels(f, static_cast<std::size_t>(cfg.r_count), rng, depth);
  if (out.empty() && cfg.r_count > 0) err << "note: f is constant on the corners, every level set is empty\n";
  return out;
}

int cmd_bounds(const RunConfig& cfg, std::ostream& os) {
  const auto grid = parse_grid(cfg.grid);
  const bool big = cfg.precision == "big";
  os << "alpha,lower,upper,trivial\n";
  bool ok = true;
  for (double a : grid) {
    if (!(a > 0 && a <= 1)) throw UsageError("grid value " + fmt(a) + " outside (0,1]");
    if (big) {
      const BigFloat ab(fmt(a));
      const BigFloat lo = lower_bound_big(ab), up = upper_bound_big(ab), tr = trivial_upper_bound_big();
      ok = ok && lo > 0 && lo < up && up < tr;
      os << fmt(a) << ',' << lo.str(30) << ',' << up.str(30) << ',' << tr.str(30) << '\n';
    } else {
      const double lo = lower_bound(a), up = upper_bound(a), tr = trivial_upper_bound_sierpinski();
      ok = ok && lo > 0 && lo < up && up < tr;
      os << fmt(a) << ',' << fmt(lo) << ',' << fmt(up) << ',' << fmt(tr) << '\n';
    }
  }
  return ok ? 0 : 1;
}

int cmd_levelset(const RunConfig& cfg, std::ostream& os, std::ostream& err) {
  const auto f = make_function(cfg);
  const auto levels = choose_levels(cfg, f, err);
  os << "r_index,r,level,count,kappa_sum,max_kappa,mu_sum,conservation_checks,conservation_failures\n";
  bool ok = true;
  nlohmann::json sets = nlohmann::json::array();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const Rational& r = levels[i].value();
    const LevelSetTree tree(f, r, cfg.depth, cfg.l);
    const MeasureCheck mc = check_measure(tree);
    if (!mc.normalized || !mc.below_kappa) {
      err << "measure check failed for r=" << exact(r) << '\n';
      ok = false;
    }
    for (int k = 0; k <= cfg.depth; ++k) {
      const auto& nodes = tree.level(k);
      Rational ksum = 0, musum = 0;
      int min_exp = std::numeric_limits<int>::max();
      std::size_t checks = 0, failures = 0;
      for (const auto& node : nodes) {
        ksum += pow2(-node.kappa_exp);
        musum += node.mu;
        min_exp = std::min(min_exp, node.kappa_exp);
        for (int j = 1; j <= 3 && k + j <= cfg.depth; ++j) {
          ++checks;
          if (!conservation_check(tree, node.address, j).pass) ++failures;
        }
      }
      // admissible r lie strictly inside the corner range, so the set is never empty
      if (nodes.empty() || ksum < 1 || failures > 0) ok = false;
      os << i << ',' << exact(r) << ',' << k << ',' << nodes.size() << ',' << fmt(to_double(ksum)) << ','
         << (nodes.empty() ? "0" : fmt(std::ldexp(1.0, -min_exp))) << ',' << fmt(to_double(musum)) << ',' << checks
         << ',' << failures << '\n';
    }
    if (!cfg.json_out.empty()) sets.push_back(to_json(approx_level_set(f, levels[i], cfg.depth, cfg.l)));
  }
  if (!cfg.json_out.empty()) {
    std::ofstream js(cfg.json_out);
    if (!js) throw std::runtime_error("cannot open '" + cfg.json_out + "' for writing");
    nlohmann::json doc{{"config", cfg.to_json()}, {"level_sets", sets}};
    if (f.level() <= 6) doc["function"] = to_json(f);
    js << doc.dump(1) << '\n';
    if (!js) throw std::runtime_error("write to '" + cfg.json_out + "' failed");
  }
  return ok ? 0 : 1;
}

int cmd_census(const RunConfig& cfg, std::ostream& os) {
  const auto f = make_function(cfg);
  const Rational d1 = d1_of(cfg);
  // the pruned enumeration still grows like (3 2^l)^{n d1} 2^{n l}
  if (cfg.depth * cfg.l > 16) throw UsageError("census enumeration limited to depth * l <= 16");
  os << "n,count,binomial_bound,image_measure,c\n";
  bool ok = true;
  for (int n = 1; n <= cfg.depth; ++n) {
    if (denominator(Rational(n * d1)) != 1) continue;
    const CensusResult c = well_conducting_census(f, n, cfg.l, d1, cfg.alpha);
    ok = ok && c.within_bound;
    os << n << ',' << c.count.str() << ',' << fmt(c.binomial_bound) << ',' << fmt(c.image_measure) << ',' << fmt(c.c)
       << '\n';
  }
  return ok ? 0 : 1;
}

int cmd_conductivity_hist(const RunConfig& cfg, std::ostream& os, std::ostream& err) {
  if (cfg.census) return cmd_census(cfg, os);
  const auto f = make_function(cfg);
  const auto levels = choose_levels(cfg, f, err);
  os << "r_index,r,kappa_exp,count,kappa_mass\n";
  bool ok = true;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const Rational& r = levels[i].value();
    const LevelSetTree tree(f, r, cfg.depth, cfg.l);
    std::map<int, std::size_t> hist;
    for (const auto& node : tree.level(cfg.depth)) ++hist[node.kappa_exp];
    Rational total = 0;
    for (const auto& [e, count] : hist) {
      const Rational mass = static_cast<long long>(count) * pow2(-e);
      total += mass;
      os << i << ',' << exact(r) << ',' << e << ',' << count << ',' << fmt(to_double(mass)) << '\n';
    }
    if (total < 1) {
      err << "conductivity sum below 1 for r=" << exact(r) << '\n';
      ok = false;
    }
  }
  return ok ? 0 : 1;
}

int cmd_witness(const RunConfig& cfg, std::ostream& os, std::ostream& err) {
  if (!(cfg.alpha > 0 && cfg.alpha < 1)) throw UsageError("witness needs alpha in (0,1)");
  if (cfg.digits < 1) throw UsageError("--digits must be positive");
  const double p = std::exp2(-cfg.alpha);
  const int stride = std::max(1, cfg.digits / 10);
  os << "trial,n,count,slope\n";
  bool ok = true;
  double mean = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    const auto digits = bernoulli_digits(cfg.seed + static_cast<std::uint64_t>(t), cfg.digits, p);
    const auto est = box_count_witness(digits);
    std::int64_t zeros = 0;
    for (int n = 1; n <= cfg.digits; ++n) {
      zeros += digits[static_cast<std::size_t>(n - 1)] == 0;
      // log2 of the box count is the number of zero digits so far
      if (est.counts[static_cast<std::size_t>(n - 1)].second != static_cast<double>(zeros)) ok = false;
      if (n % stride == 0 || n == cfg.digits)
        os << t << ',' << n << ',' << zeros << ',' << fmt(static_cast<double>(zeros) / n) << '\n';
    }
    mean += static_cast<double>(zeros) / cfg.digits;
  }
  if (cfg.trials > 0)
    err << "mean slope " << fmt(mean / cfg.trials) << ", limit 1-2^-alpha = " << fmt(upper_bound(cfg.alpha)) << '\n';
  return ok ? 0 : 1;
}

int cmd_cantor(const RunConfig& cfg, std::ostream& os, std::ostream& err) {
  bool ok = true;
  if (cfg.capacity) {
    os << "k,alpha,direct,bound,ratio\n";
    for (int k = 0; k <= cfg.depth; ++k) {
      const CapacityGap g = capacity_gap(k, cfg.alpha);
      if (g.diverges) {
        os << k << ',' << fmt(cfg.alpha) << ',' << fmt(g.partial_sums.back()) << ",inf,inf\n";
        continue;
      }
      ok = ok && g.closed_form_bound && g.direct_sum + g.tail_bound <= *g.closed_form_bound * (1 + 1e-12);
      os << k << ',' << fmt(cfg.alpha) << ',' << fmt(g.direct_sum) << ',' << fmt(*g.closed_form_bound) << ','
         << fmt(g.ratio) << '\n';
    }
    if (cfg.alpha <= 0.5) err << "note: the gap sum diverges for alpha <= 1/2\n";
  } else {
    os << "n,length,measure,measure_exact\n";
    for (int n = 0; n <= cfg.depth; ++n) {
      const Rational len = cantor_length(n);
      const Rational measure = len * pow2(n);
      ok = ok && measure == pow2(n) / (pow2(n + 1) - 1);
      if (n <= 12) {
        Rational sum = 0;
        for (const auto& [a, b] : cantor_level(n).intervals()) sum += b - a;
        ok = ok && sum == measure;
      }
      os << n << ',' << exact(len) << ',' << fmt(to_double(measure)) << ',' << exact(measure) << '\n';
    }
  }
  if (!cfg.json_out.empty()) {
    const auto s = product_separated_structure(std::clamp(cfg.depth, 2, 10));
    ok = ok && s.certified;
    std::ofstream js(cfg.json_out);
    if (!js) throw std::runtime_error("cannot open '" + cfg.json_out + "' for writing");
    js << nlohmann::json{{"config", cfg.to_json()},
                         {"structure", to_json(s)},
                         {"intervals", to_json(cantor_level(std::min(cfg.depth, 6)).intervals())}}
              .dump(1)
       << '\n';
    if (!js) throw std::runtime_error("write to '" + cfg.json_out + "' failed");
  }
  return ok ? 0 : 1;
}

int cmd_phase(const RunConfig& cfg, std::ostream& os) {
  const double a = cfg.alpha;
  if (!(a > 0 && a <= 1)) throw UsageError("alpha must lie in (0,1]");
  const auto s = product_separated_structure(10);
  os << "structure nu=" << fmt(s.nu) << " rho=" << fmt(s.rho) << " K=" << fmt(s.K)
     << " certified=" << (s.certified ? "yes" : "no") << '\n';
  if (std::abs(a - 0.5) < 1e-12) {
    os << "boundary alpha = 1/2: no claim\n";
    return s.certified ? 0 : 1;
  }
  const auto feas = piecewise_constant_feasibility(a, 0.5, 1.0, s, 0, 60);
  os << "log ratio step per level " << fmt(feas.log_ratio_step) << '\n';
  if (a < 0.5) {
    if (!feas.first_feasible_k) {
      os << "no feasible level up to k=" << feas.checked_up_to << '\n';
      return 1;
    }
    os << "feasible piecewise-constant approximation at k=" << *feas.first_feasible_k << '\n';
    return s.certified ? 0 : 1;
  }
  // capacity level: first k whose gap ratio drops below delta
  PhaseTransitionConfig pc;
  pc.alpha = a;
  pc.c = Rational(1, 2);
  int k = 2;
  while (k < 60 && capacity_gap(k, a).ratio >= pc.delta) ++k;
  pc.k = k;
  const Rational c = pc.c;
  const auto rep = phase_perturbation([&](const Rational& x, const Rational& y) { return c * (x + y) / 2; }, pc);
  os << "k=" << pc.k << " x1=" << exact(rep.x1) << " x2=" << exact(rep.x2) << " y1=" << exact(rep.y1) << '\n';
  os << "large change " << exact(rep.large_change_lhs) << " >= " << exact(rep.large_change_rhs) << ' '
     << (rep.large_change ? "ok" : "FAILED") << '\n';
  os << "base ratio " << fmt(rep.base_ratio) << (rep.base_ok ? " ok" : " FAILED") << '\n';
  os << "perturbed ratio " << fmt(rep.perturbed_ratio) << (rep.perturbed_ok ? " ok" : " FAILED") << '\n';
  os << "h Lipschitz " << (rep.h_lipschitz ? "ok" : "FAILED") << '\n';
  os << "capacity ratio " << fmt(rep.capacity_ratio) << (rep.capacity_ok ? " ok" : " FAILED") << '\n';
  os << "guaranteed length " << fmt(rep.guaranteed_length) << '\n';
  const bool ok = s.certified && feas.monotone_infeasible && rep.all_ok();
  os << (ok ? "infeasible; perturbation certificate holds\n" : "perturbation certificate fails\n");
  return ok ? 0 : 1;
}

int cmd_selftest(std::ostream& os) {
  bool all = true;
  auto check = [&](const char* name, bool pass) {
    os << (pass ? "PASS " : "FAIL ") << name << '\n';
    all = all && pass;
  };
  check("bounds", std::abs(lower_bound(1.0) - 0.08295) < 5e-5 && upper_bound(1.0) == 0.5 &&
                      std::abs(trivial_upper_bound_sierpinski() - 0.584962500721) < 1e-11);
  bool lc = true;
  for (int n = 1; n <= 6; ++n)
    for (unsigned m = 0; m < (1u << n); ++m) {
      std::vector<std::uint8_t> d(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = (m >> (n - 1 - i)) & 1u;
      lc = lc && static_cast<std::int64_t>(line_hits_geometric(height_from_digits(d), n).size()) ==
                     (std::int64_t{1} << lattice_log2_count(d));
    }
  check("lattice_count", lc);
  bool cons = true;
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto f = random_standard_paf(seed, 2, 0.5, 0.9);
    for (const auto& r : admissible_levels(f, 3, rng, 6)) {
      const LevelSetTree tree(f, r.value(), 4, 1);
      for (int n = 0; n < 4; ++n)
        for (const auto& node : tree.level(n)) cons = cons && conservation_check(tree, node.address, 1).pass;
      const auto mc = check_measure(tree);
      cons = cons && mc.normalized && mc.below_kappa;
    }
  }
  check("conservation", cons);
  bool cm = true;
  for (int n = 0; n <= 30; ++n) cm = cm && cantor_length(n) * pow2(n) == pow2(n) / (pow2(n + 1) - 1);
  check("cantor_measure", cm);
  check("product_structure", product_separated_structure(6).certified);
  check("graft_threshold", graft_threshold(1.0, 0.5) == 14);
  return all ? 0 : 1;
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j{{"command", command}, {"seed", seed}};
  if (command == "bounds") {
    j["grid"] = grid;
    j["precision"] = precision;
  } else if (command == "levelset" || command == "conductivity-hist") {
    j.update({{"alpha", alpha}, {"depth", depth}, {"level", level}, {"l", l}, {"function", function}});
    if (census) {
      j["census"] = true;
      j["d1"] = to_string(d1.empty() ? default_d1(alpha) : parse_rational(d1));
    } else {
      j["r"] = r;
      j["r_count"] = r_count;
    }
  } else if (command == "witness") {
    j.update({{"alpha", alpha}, {"digits", digits}, {"trials", trials}});
  } else if (command == "cantor") {
    j.update({{"depth", depth}, {"capacity", capacity}});
    if (capacity) j["alpha"] = alpha;
  } else if (command == "phase") {
    j["alpha"] = alpha;
  }
  return j;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  if (spec.empty()) return out;
  auto num = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::logic_error&) {
      throw UsageError("malformed grid '" + spec + "'");
    }
  };
  const auto c1 = spec.find(':');
  if (c1 != std::string::npos) {
    const auto c2 = spec.find(':', c1 + 1);
    if (c2 == std::string::npos) throw UsageError("grid range needs a:b:count");
    const double a = num(spec.substr(0, c1)), b = num(spec.substr(c1 + 1, c2 - c1 - 1));
    const double count = num(spec.substr(c2 + 1));
    if (count < 0 || count != std::floor(count)) throw UsageError("grid count must be a non-negative integer");
    const int m = static_cast<int>(count);
    for (int i = 0; i < m; ++i) out.push_back(m == 1 ? a : a + (b - a) * i / (m - 1));
    return out;
  }
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(num(item));
  return out;
}

std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hoelder level sets on the Sierpinski triangle and the fat Cantor square"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "write the artifact here instead of stdout");
    sub->add_option("--seed", cfg.seed, "64-bit seed");
  };
  auto with_function = [&](CLI::App* sub) {
    sub->add_option("--alpha", cfg.alpha, "Hoelder exponent")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--depth", cfg.depth, "level n of the level set")->check(CLI::Range(0, 60));
    sub->add_option("--level", cfg.level, "level of the random base function")->check(CLI::Range(1, 12));
    sub->add_option("--l", cfg.l, "subdivision depth per level")->check(CLI::Range(1, 30));
    sub->add_option("--r", cfg.r, "level value as num/den");
    sub->add_option("--r-count", cfg.r_count, "number of sampled levels")->check(CLI::NonNegativeNumber);
    sub->add_option("--function", cfg.function, "random, ramp, constant or a JSON file");
    sub->add_option("--json", cfg.json_out, "also write the level sets as JSON");
  };

  auto* bounds = app.add_subcommand("bounds", "lower and upper dimension bounds on an alpha grid");
  common(bounds);
  bounds->add_option("--grid", cfg.grid, "a:b:count or a comma list");
  bounds->add_option("--precision", cfg.precision)->check(CLI::IsMember({"double", "big"}));

  auto* levelset = app.add_subcommand("levelset", "approximate level sets with conservation checks");
  common(levelset);
  with_function(levelset);

  auto* hist = app.add_subcommand("conductivity-hist", "histogram of conductivities at level n");
  common(hist);
  with_function(hist);
  hist->add_option("--d1", cfg.d1, "census exponent as num/den (default alpha/2)");
  hist->add_flag("--census", cfg.census, "count well conducting triangles instead");

  auto* witness = app.add_subcommand("witness", "digit-frequency slopes of the Bernoulli witness");
  common(witness);
  witness->add_option("--alpha", cfg.alpha)->check(CLI::Range(0.0, 1.0));
  witness->add_option("--digits", cfg.digits);
  witness->add_option("--trials", cfg.trials)->check(CLI::NonNegativeNumber);

  auto* cantor = app.add_subcommand("cantor", "fat Cantor set measures or capacity table");
  common(cantor);
  cantor->add_option("--depth", cfg.depth)->check(CLI::Range(0, 60));
  cantor->add_option("--alpha", cfg.alpha)->check(CLI::Range(0.0, 1.0));
  cantor->add_flag("--capacity", cfg.capacity);
  cantor->add_option("--json", cfg.json_out, "write the separated-structure certificate");

  auto* phase = app.add_subcommand("phase", "phase transition report for the fat Cantor square");
  common(phase);
  phase->add_option("--alpha", cfg.alpha)->check(CLI::Range(0.0, 1.0));

  auto* selftest = app.add_subcommand("selftest", "quick invariant checks");
  common(selftest);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  std::ofstream file;
  if (!cfg.out.empty()) {
    file.open(cfg.out);
    if (!file) {
      err << "error: cannot open '" << cfg.out << "' for writing\n";
      return 2;
    }
  }
  std::ostream& os = cfg.out.empty() ? out : file;

  try {
    // the config is validated before the header goes out
    const auto header = cfg.to_json();
    os << '#' << header.dump() << '\n';
    int code = 0;
    if (cfg.command == "bounds") code = cmd_bounds(cfg, os);
    else if (cfg.command == "levelset") code = cmd_levelset(cfg, os, err);
    else if (cfg.command == "conductivity-hist") code = cmd_conductivity_hist(cfg, os, err);
    else if (cfg.command == "witness") code = cmd_witness(cfg, os, err);
    else if (cfg.command == "cantor") code = cmd_cantor(cfg, os, err);
    else if (cfg.command == "phase") code = cmd_phase(cfg, os);
    else code = cmd_selftest(os);
    os.flush();
    if (!os) {
      err << "error: write to '" << (cfg.out.empty() ? "stdout" : cfg.out) << "' failed\n";
      return 2;
    }
    if (code != 0) err << "one or more checks failed\n";
    return code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace hl::cli
