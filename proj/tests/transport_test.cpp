#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "brute_force_ot.hpp"
#include "doctest.h"
#include "nfl/feynman_kac.hpp"
#include "nfl/geodesic.hpp"
#include "nfl/transport.hpp"

using namespace nfl;

namespace {

DiscreteMeasure random_measure(std::mt19937_64& g, int n, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  DiscreteMeasure mu;
  double total = 0.0;
  std::uniform_real_distribution<double> w(0.1, 1.0);
  for (int i = 0; i < n; ++i) {
    mu.atoms.push_back({u(g), u(g)});
    mu.weights.push_back(w(g));
    total += mu.weights.back();
  }
  for (double& x : mu.weights) x /= total;
  return mu;
}

}  // namespace

TEST_CASE("wasserstein on hand-checkable inputs") {
  const Domain hl = Domain::half_line();
  const auto da = DiscreteMeasure::dirac({0.25, 0.0});
  const auto db = DiscreteMeasure::dirac({1.75, 0.0});
  CHECK(wasserstein(da, db, 1.0, hl) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(wasserstein(da, db, 2.0, hl) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(wasserstein(da, da, 1.0, hl) == doctest::Approx(0.0).epsilon(1e-14));

  // dirac pair across the obstacle: cost is the wrap distance
  const Domain de = Domain::disk_exterior(1.0);
  CHECK(wasserstein(DiscreteMeasure::dirac({2.0, 0.0}),
                    DiscreteMeasure::dirac({-2.0, 0.0}), 1.0, de) ==
        doctest::Approx(2.0 * std::sqrt(3.0) + M_PI / 3.0).epsilon(1e-14));

  // shared support, shifted weights: move 0.4 units of mass across distance 1
  DiscreteMeasure mu{{{0.0, 0.0}, {1.0, 0.0}}, {0.7, 0.3}};
  DiscreteMeasure nu{{{0.0, 0.0}, {1.0, 0.0}}, {0.3, 0.7}};
  CHECK(wasserstein(mu, nu, 1.0, hl) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(wasserstein(mu, nu, 2.0, hl) ==
        doctest::Approx(std::sqrt(0.4)).epsilon(1e-14));
}

TEST_CASE("wasserstein metric axioms and order in q") {
  const Domain di = Domain::disk_interior(1.0);
  std::mt19937_64 g(31);
  for (int rep = 0; rep < 25; ++rep) {
    const auto mu = random_measure(g, 4, 0.6);
    const auto nu = random_measure(g, 3, 0.6);
    const auto la = random_measure(g, 4, 0.6);

    const double w1 = wasserstein(mu, nu, 1.0, di);
    CHECK(w1 == doctest::Approx(wasserstein(nu, mu, 1.0, di)).epsilon(1e-12));
    CHECK(wasserstein(mu, mu, 1.0, di) <= 1e-12);
    CHECK(w1 <= wasserstein(mu, la, 1.0, di) + wasserstein(la, nu, 1.0, di) + 1e-9);

    // Jensen: q-th moments of the plan displacement are ordered in q
    const double w15 = wasserstein(mu, nu, 1.5, di);
    const double w2 = wasserstein(mu, nu, 2.0, di);
    CHECK(w1 <= w15 + 1e-12);
    CHECK(w15 <= w2 + 1e-12);
  }
}

TEST_CASE("3x3 instances match exhaustive vertex enumeration") {
  std::mt19937_64 g(33);
  std::uniform_real_distribution<double> u(-1.9, 1.9);
  std::uniform_real_distribution<double> w(0.05, 1.0);

  for (int rep = 0; rep < 20; ++rep) {
    const Domain dom =
        (rep % 4 == 0) ? Domain::disk_exterior(1.0) : Domain::disk_interior(2.0);
    const double q = (rep % 2 == 0) ? 1.0 : 2.0;

    DiscreteMeasure mu, nu;
    std::array<double, 3> a{}, b{};
    double sa = 0.0, sb = 0.0;
    for (int i = 0; i < 3; ++i) {
      Vec2 p{u(g), u(g)}, r{u(g), u(g)};
      while (dom.signed_distance(p) < 0.05) p = {u(g), u(g)};
      while (dom.signed_distance(r) < 0.05) r = {u(g), u(g)};
      mu.atoms.push_back(p);
      nu.atoms.push_back(r);
      a[i] = w(g);
      b[i] = w(g);
      sa += a[i];
      sb += b[i];
    }
    for (int i = 0; i < 3; ++i) {
      a[i] /= sa;
      b[i] /= sb;
      mu.weights.push_back(a[i]);
      nu.weights.push_back(b[i]);
    }

    std::array<std::array<double, 3>, 3> cost{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        cost[i][j] = std::pow(intrinsic_distance(dom, mu.atoms[i], nu.atoms[j]), q);

    const double oracle = std::pow(ot_oracle::min_cost_3x3(a, b, cost), 1.0 / q);
    CHECK(wasserstein(mu, nu, q, dom) == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("optimal plans are feasible and price the reported value") {
  const Domain di = Domain::disk_interior(1.0);
  std::mt19937_64 g(34);
  const auto mu = random_measure(g, 4, 0.6);
  const auto nu = random_measure(g, 3, 0.6);

  for (double q : {1.0, 2.0}) {
    const TransportResult res = wasserstein_with_plan(mu, nu, q, di);
    std::vector<double> row(mu.atoms.size(), 0.0), col(nu.atoms.size(), 0.0);
    double cost = 0.0;
    for (const PlanEntry& e : res.plan) {
      REQUIRE(e.from >= 0);
      REQUIRE(e.from < static_cast<int>(mu.atoms.size()));
      REQUIRE(e.to >= 0);
      REQUIRE(e.to < static_cast<int>(nu.atoms.size()));
      CHECK(e.mass > 0.0);
      row[e.from] += e.mass;
      col[e.to] += e.mass;
      cost += e.mass *
              std::pow(intrinsic_distance(di, mu.atoms[e.from], nu.atoms[e.to]), q);
    }
    for (size_t i = 0; i < row.size(); ++i)
      CHECK(row[i] == doctest::Approx(mu.weights[i]).epsilon(1e-12));
    for (size_t j = 0; j < col.size(); ++j)
      CHECK(col[j] == doctest::Approx(nu.weights[j]).epsilon(1e-12));
    CHECK(std::pow(res.value, q) == doctest::Approx(cost).epsilon(1e-12));

    // Kantorovich duality, q = 1: any 1-Lipschitz f gives a lower bound
    if (q == 1.0) {
      double lower = 0.0;
      for (size_t i = 0; i < mu.atoms.size(); ++i)
        lower += mu.weights[i] * mu.atoms[i].x;
      for (size_t j = 0; j < nu.atoms.size(); ++j)
        lower -= nu.weights[j] * nu.atoms[j].x;
      CHECK(res.value >= std::fabs(lower) - 1e-12);
    }
  }
}

TEST_CASE("measure flow: mass, support, and the half-line mean") {
  const Domain hl = Domain::half_line();
  SimConfig cfg;
  cfg.dt = 1e-5;
  cfg.n_paths = 20000;
  cfg.seed = 11;

  const auto mu = DiscreteMeasure::dirac({0.0, 0.0});
  SUBCASE("t = 0 is the identity") {
    const auto same = evolve_measure(hl, mu, 0.0, cfg);
    REQUIRE(same.atoms.size() == 1);
    CHECK(same.atoms[0].x == 0.0);
    CHECK(same.weights[0] == 1.0);
  }

  SUBCASE("dirac at the corner spreads to the reflected half-normal") {
    const auto ev = evolve_measure(hl, mu, 0.1, cfg);
    REQUIRE(ev.atoms.size() == cfg.n_paths);
    double mass = 0.0, mean = 0.0;
    for (size_t i = 0; i < ev.atoms.size(); ++i) {
      CHECK(hl.signed_distance(ev.atoms[i]) >= -1e-9);
      CHECK(ev.weights[i] == doctest::Approx(1.0 / cfg.n_paths).epsilon(1e-12));
      mass += ev.weights[i];
      mean += ev.weights[i] * ev.atoms[i].x;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    // |X_t| has mean sqrt(4 t / pi) under the doubled-diffusion scaling
    CHECK(mean == doctest::Approx(std::sqrt(0.4 / M_PI)).epsilon(0.01));
    // deterministic given (dt, n_paths, seed)
    CHECK(mean == doctest::Approx(0.35573998620780639).epsilon(1e-13));
  }
}

TEST_CASE("measure validation and the atom-count guard") {
  const Domain di = Domain::disk_interior(1.0);

  DiscreteMeasure bad_sum{{{0.0, 0.0}}, {0.9}};
  CHECK_THROWS_AS(bad_sum.validate(di), ConfigInvalid);

  DiscreteMeasure neg{{{0.0, 0.0}, {0.1, 0.0}}, {1.5, -0.5}};
  CHECK_THROWS_AS(neg.validate(di), ConfigInvalid);

  DiscreteMeasure outside{{{2.0, 0.0}}, {1.0}};
  CHECK_THROWS_AS(outside.validate(di), ConfigInvalid);

  DiscreteMeasure ok{{{0.2, 0.1}}, {1.0}};
  CHECK_NOTHROW(ok.validate(di));

  // 300 + 300 atoms exceeds the exactness cap
  DiscreteMeasure big_a, big_b;
  for (int i = 0; i < 300; ++i) {
    big_a.atoms.push_back({-0.5 + i * 0.003, 0.0});
    big_b.atoms.push_back({-0.5 + i * 0.003, 0.2});
    big_a.weights.push_back(1.0 / 300);
    big_b.weights.push_back(1.0 / 300);
  }
  CHECK_THROWS_AS(wasserstein(big_a, big_b, 1.0, di), TooManyAtoms);
}

TEST_CASE("contraction rows on a convex domain") {
  const Domain di = Domain::disk_interior(1.0);
  const auto mu = DiscreteMeasure::dirac({0.3, 0.0});
  const auto nu = DiscreteMeasure::dirac({-0.3, 0.0});
  RateModel rate;  // S = K = C = 0: bound is identically 1
  SimConfig cfg;
  cfg.dt = 1e-4;
  cfg.n_paths = 128;
  cfg.seed = 7;

  const std::vector<double> t_grid{0.01, 0.05};
  const auto rows = contraction_check(di, mu, nu, t_grid, 1.0, rate, cfg);
  REQUIRE(rows.size() == 2);
  for (size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].t == t_grid[k]);
    CHECK(rows[k].bound == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rows[k].ratio > 0.0);
    CHECK(rows[k].ratio <= 1.0 + 3.0 * rows[k].stderr_ + 0.05);
    CHECK(rows[k].stderr_ >= 0.0);
  }

  CHECK_THROWS_AS(contraction_check(di, mu, mu, t_grid, 1.0, rate, cfg),
                  DegenerateInput);
}

TEST_CASE("csv round trips and headers") {
  const std::string mpath = "/tmp/nfl_test_measure.csv";
  DiscreteMeasure mu{{{0.25, -0.5}, {1.0, 2.0}}, {0.375, 0.625}};
  write_measure_csv(mu, mpath);
  {
    std::ifstream in(mpath);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x1,x2,weight");
  }
  const DiscreteMeasure back = read_measure_csv(mpath);
  REQUIRE(back.atoms.size() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(back.atoms[i].x == doctest::Approx(mu.atoms[i].x).epsilon(1e-15));
    CHECK(back.atoms[i].y == doctest::Approx(mu.atoms[i].y).epsilon(1e-15));
    CHECK(back.weights[i] == doctest::Approx(mu.weights[i]).epsilon(1e-15));
  }

  const std::string cpath = "/tmp/nfl_test_contraction.csv";
  std::vector<ContractionRow> rows{{0.01, 0.98, 1.02, 0.003}};
  write_contraction_csv(rows, cpath);
  std::ifstream in(cpath);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,ratio,bound,stderr");
  std::remove(mpath.c_str());
  std::remove(cpath.c_str());
}
