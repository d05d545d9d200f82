#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "nfl/heat_pde.hpp"

using namespace nfl;

namespace {

// Independent oracle for the disk: Crank-Nicolson on the radial equation
// u_t = (1/r)(r u_r)_r, conservative finite volumes on [0, R], zero flux
// at both ends, direct tridiagonal solves. Shares no code with the 2-D
// solver beyond the time-stepping idea.
std::vector<double> radial_heat(double R, int m, double t, int steps,
                                const std::function<double(double)>& f0) {
  const double h = R / m;
  std::vector<double> mass(m + 1), u(m + 1);
  for (int j = 0; j <= m; ++j) {
    const double lo = std::max(0.0, (j - 0.5) * h);
    const double hi = std::min(R, (j + 0.5) * h);
    mass[j] = 0.5 * (hi * hi - lo * lo);
    u[j] = f0(j * h);
  }
  const double dt = t / steps;
  // interface conductances r_{j+1/2} / h
  std::vector<double> cond(m);
  for (int j = 0; j < m; ++j) cond[j] = (j + 0.5) * h / h;

  std::vector<double> a(m + 1), b(m + 1), c(m + 1), rhs(m + 1);
  for (int s = 0; s < steps; ++s) {
    for (int j = 0; j <= m; ++j) {
      const double cl = j > 0 ? cond[j - 1] : 0.0;
      const double cr = j < m ? cond[j] : 0.0;
      a[j] = -0.5 * dt * cl;
      c[j] = -0.5 * dt * cr;
      b[j] = mass[j] + 0.5 * dt * (cl + cr);
      rhs[j] = mass[j] * u[j] +
               0.5 * dt * ((j > 0 ? cl * (u[j - 1] - u[j]) : 0.0) +
                           (j < m ? cr * (u[j + 1] - u[j]) : 0.0));
    }
    for (int j = 1; j <= m; ++j) {  // Thomas sweep
      const double w = a[j] / b[j - 1];
      b[j] -= w * c[j - 1];
      rhs[j] -= w * rhs[j - 1];
    }
    u[m] = rhs[m] / b[m];
    for (int j = m - 1; j >= 0; --j) u[j] = (rhs[j] - c[j] * u[j + 1]) / b[j];
  }
  return u;
}

}  // namespace

TEST_CASE("halfline heat kernel: symmetry, normalization, corner value") {
  const double t = 0.1;
  CHECK(halfline_heat_kernel(0.3, 0.8, t) ==
        doctest::Approx(halfline_heat_kernel(0.8, 0.3, t)).epsilon(1e-14));
  CHECK(halfline_heat_kernel(0.0, 0.0, t) ==
        doctest::Approx(1.0 / std::sqrt(M_PI * t)).epsilon(1e-14));

  // Simpson normalization: int_0^inf p_t(x, y) dy = 1
  for (double x : {0.0, 0.5, 2.0}) {
    const int n = 4000;
    const double L = 12.0, h = L / n;
    double acc = halfline_heat_kernel(x, 0.0, t) + halfline_heat_kernel(x, L, t);
    for (int i = 1; i < n; ++i)
      acc += halfline_heat_kernel(x, i * h, t) * (i % 2 ? 4.0 : 2.0);
    CHECK(acc * h / 3.0 == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("half-line fields: masses and dirac placement") {
  const ScalarField ones = make_halfline_field(4.0, 0.01, [](double) { return 1.0; });
  // node 0 owns the half-wet cell [0, h/2]; the far node's cell spills
  // h/2 past the truncation, so ones integrate to h (nx - 1/2)
  CHECK(ones.total_mass() ==
        doctest::Approx((ones.grid.nx - 0.5) * 0.01).epsilon(1e-12));
  CHECK(ones.total_mass() == doctest::Approx(4.005).epsilon(1e-12));
  CHECK(ones.grid.ny == 1);

  const ScalarField d = make_halfline_dirac(4.0, 0.01, 1.0);
  CHECK(d.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  double vmax = 0.0;
  int argmax = -1;
  for (int i = 0; i < d.grid.nx; ++i)
    if (d.values[i] > vmax) { vmax = d.values[i]; argmax = i; }
  CHECK(std::abs(d.grid.center(argmax, 0).x - 1.0) < 0.01 / 2 + 1e-12);
}

TEST_CASE("1-D solver: mass conserved, constants invariant, kernel recovered") {
  const double h = 1.0 / 64.0, length = 12.0;

  SUBCASE("constant data is a fixed point") {
    const ScalarField u0 = make_halfline_field(length, h, [](double) { return 1.0; });
    const ScalarField u = solve_neumann(Domain::half_line(), u0, 0.1, 16);
    CHECK(u.min_value() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(u.max_value() == doctest::Approx(1.0).epsilon(1e-10));
  }

  SUBCASE("dirac data relaxes onto the closed-form kernel") {
    const ScalarField d = make_halfline_dirac(length, h, 0.0);
    for (double t : {0.01, 0.1}) {
      const ScalarField u = solve_neumann(Domain::half_line(), d, t, 64);
      CHECK(u.total_mass() == doctest::Approx(1.0).epsilon(1e-10));
      double linf = 0.0;
      for (int i = 0; i < u.grid.nx; ++i) {
        const double x = u.grid.center(i, 0).x;
        linf = std::max(linf, std::abs(u.values[i] - halfline_heat_kernel(0.0, x, t)));
      }
      CHECK(linf < 2e-2);  // h = 1/64; the acceptance run tightens this at 1/256
    }
  }

  SUBCASE("max principle on smooth data") {
    const ScalarField u0 = make_halfline_field(
        length, h, [](double x) { return std::exp(-x) * std::cos(3 * x); });
    const double lo = u0.min_value(), hi = u0.max_value();
    const ScalarField u = solve_neumann(Domain::half_line(), u0, 0.05, 32);
    CHECK(u.min_value() >= lo - 1e-6);
    CHECK(u.max_value() <= hi + 1e-6);
  }

  SUBCASE("stepping is a semigroup") {
    const ScalarField u0 = make_halfline_field(
        length, h, [](double x) { return std::exp(-2.0 * x * x); });
    SolveOptions opts;
    opts.rannacher_pairs = 0;  // pure CN composes exactly
    const ScalarField once = solve_neumann(Domain::half_line(), u0, 0.2, 32, opts);
    const ScalarField two_hops = solve_neumann(
        Domain::half_line(),
        solve_neumann(Domain::half_line(), u0, 0.1, 16, opts), 0.1, 16, opts);
    double linf = 0.0;
    for (size_t i = 0; i < once.values.size(); ++i)
      linf = std::max(linf, std::abs(once.values[i] - two_hops.values[i]));
    CHECK(linf < 1e-12);
  }

  SUBCASE("argument validation") {
    const ScalarField u0 = make_halfline_field(length, h, [](double) { return 1.0; });
    CHECK_THROWS_AS(solve_neumann(Domain::half_line(), u0, -0.1, 16), ConfigInvalid);
    CHECK_THROWS_AS(solve_neumann(Domain::half_line(), u0, 0.1, 0), ConfigInvalid);
  }
}

TEST_CASE("cut-cell fields on the disk") {
  const Domain di = Domain::disk_interior(1.0);
  const double h = 1.0 / 40.0;
  const ScalarField f =
      make_field(di, -1.1, 1.1, -1.1, 1.1, h, [](Vec2) { return 1.0; });

  double area = 0.0;
  for (int j = 0; j < f.grid.ny; ++j)
    for (int i = 0; i < f.grid.nx; ++i) {
      const auto id = f.grid.idx(i, j);
      CHECK(f.volume[id] >= 0.0);
      CHECK(f.volume[id] <= 1.0 + 1e-12);
      CHECK(f.ax[id] >= 0.0);
      CHECK(f.ax[id] <= 1.0 + 1e-12);
      area += f.volume[id] * h * h;
    }
  CHECK(area == doctest::Approx(M_PI).epsilon(0.02));
  CHECK(f.total_mass() == doctest::Approx(area).epsilon(1e-12));
}

TEST_CASE("2-D solver: invariants and the radial oracle") {
  const Domain di = Domain::disk_interior(1.0);
  const double h = 1.0 / 64.0;
  auto gaussian = [](Vec2 p) { return std::exp(-4.0 * norm2(p)); };
  const ScalarField u0 = make_field(di, -1.05, 1.05, -1.05, 1.05, h, gaussian);

  const double t = 0.01;
  const ScalarField u = solve_neumann(di, u0, t, 32);

  SUBCASE("mass conservation and max principle") {
    CHECK(u.total_mass() == doctest::Approx(u0.total_mass()).epsilon(1e-8));
    CHECK(u.max_value() <= u0.max_value() + 1e-8);
    CHECK(u.min_value() >= u0.min_value() - 1e-8);
  }

  SUBCASE("radial profiles match the 1-D oracle") {
    const auto radial = radial_heat(1.0, 2048, t, 256,
                                    [](double r) { return std::exp(-4.0 * r * r); });
    for (double r : {0.0, 0.3, 0.6}) {
      const int j = static_cast<int>(std::lround(r * 2048));
      CHECK(u.sample({r, 0.0}) == doctest::Approx(radial[j]).epsilon(5e-3));
      CHECK(u.sample({0.0, -r}) == doctest::Approx(radial[j]).epsilon(5e-3));
    }
  }

  SUBCASE("constants are invariant") {
    const ScalarField ones =
        make_field(di, -1.05, 1.05, -1.05, 1.05, h, [](Vec2) { return 1.0; });
    const ScalarField v = solve_neumann(di, ones, 0.05, 16);
    CHECK(v.max_value() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(v.min_value() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("solver guardrails") {
  const Domain tiny = Domain::disk_interior(0.1);
  const ScalarField coarse =
      make_field(tiny, -0.16, 0.16, -0.16, 0.16, 0.05, [](Vec2) { return 1.0; });
  CHECK_THROWS_AS(solve_neumann(tiny, coarse, 0.01, 4), GridTooCoarse);

  const Domain di = Domain::disk_interior(1.0);
  const ScalarField u0 = make_field(di, -1.05, 1.05, -1.05, 1.05, 1.0 / 32.0,
                                    [](Vec2 p) { return p.x > 0 ? 1.0 : 0.0; });
  SolveOptions starved;
  starved.max_iterations = 0;
  CHECK_THROWS_AS(solve_neumann(di, u0, 0.01, 4, starved), NonConvergent);
}

TEST_CASE("sampling and gradients on masked grids") {
  const Domain di = Domain::disk_interior(1.0);
  const double h = 1.0 / 50.0;
  const ScalarField lin =
      make_field(di, -1.05, 1.05, -1.05, 1.05, h,
                 [](Vec2 p) { return 2.0 * p.x + 3.0 * p.y; });

  CHECK(lin.sample({0.123, -0.256}) == doctest::Approx(2 * 0.123 - 3 * 0.256).epsilon(1e-10));
  const Vec2 g = lin.sample_gradient({0.2, 0.1});
  CHECK(g.x == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(g.y == doctest::Approx(3.0).epsilon(1e-8));
  CHECK_THROWS_AS(lin.sample({5.0, 5.0}), DegenerateInput);

  const GradientField gf = gradient_field(lin);
  for (int j = 1; j + 1 < gf.grid.ny; ++j)
    for (int i = 1; i + 1 < gf.grid.nx; ++i) {
      if (!gf.valid[gf.grid.idx(i, j)]) continue;
      CHECK(gf.g[gf.grid.idx(i, j)].x == doctest::Approx(2.0).epsilon(1e-9));
      CHECK(gf.g[gf.grid.idx(i, j)].y == doctest::Approx(3.0).epsilon(1e-9));
    }
  CHECK(gf.max_norm() == doctest::Approx(std::sqrt(13.0)).epsilon(1e-9));

  // central differences are exact on quadratics at interior nodes
  const ScalarField quad = make_field(di, -1.05, 1.05, -1.05, 1.05, h,
                                      [](Vec2 p) { return p.x * p.x; });
  const GradientField gq = gradient_field(quad);
  const int ci = quad.grid.nx / 2, cj = quad.grid.ny / 2;
  for (int di_ = -5; di_ <= 5; ++di_) {
    const auto id = gq.grid.idx(ci + di_, cj);
    if (!gq.valid[id]) continue;
    const double x = gq.grid.center(ci + di_, cj).x;
    CHECK(gq.g[id].x == doctest::Approx(2.0 * x).epsilon(1e-9));
  }
}

TEST_CASE("lipschitz_constant: linear field on the disk, split masks rejected") {
  const Domain di = Domain::disk_interior(1.0);
  const ScalarField lin = make_field(di, -1.05, 1.05, -1.05, 1.05, 1.0 / 50.0,
                                     [](Vec2 p) { return p.x; });
  CHECK(lipschitz_constant(lin, di) == doctest::Approx(1.0).epsilon(1e-6));

  // narrow ribbon across the excluded disk: two separated strips
  const Domain de = Domain::disk_exterior(1.0);
  const ScalarField split = make_field(de, -2.0, 2.0, -0.15, 0.15, 1.0 / 20.0,
                                       [](Vec2 p) { return p.x; });
  CHECK_THROWS_AS(lipschitz_constant(split, de), DisconnectedMask);
}

TEST_CASE("tangential bump test function") {
  const Vec2 z0{1.0, 0.0}, tau{0.0, 1.0};
  const double c = 0.9;
  const TangentialBump f(z0, tau, c);
  const double rho_m = 1.0 / std::sqrt(3.0 * c);
  CHECK(f.cutoff_radius() == doctest::Approx(rho_m).epsilon(1e-14));

  SUBCASE("anchored at the contact: zero value, unit tangential gradient") {
    CHECK(f(z0) == 0.0);
    const Vec2 g = f.gradient(z0);
    CHECK(g.x == doctest::Approx(tau.x).epsilon(1e-12));
    CHECK(g.y == doctest::Approx(tau.y).epsilon(1e-12));
  }

  SUBCASE("C1 across the matching radius") {
    for (double phi : {0.3, 1.2, 2.5}) {
      const Vec2 dir{std::cos(phi), std::sin(phi)};
      const Vec2 in = z0 + (rho_m - 1e-7) * dir;
      const Vec2 out = z0 + (rho_m + 1e-7) * dir;
      CHECK(f(in) == doctest::Approx(f(out)).epsilon(1e-5));
      CHECK(norm(f.gradient(in) - f.gradient(out)) < 1e-5);
    }
  }

  SUBCASE("gradient matches finite differences; norm never exceeds 1") {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 300; ++k) {
      const Vec2 x{1.0 + u(g), u(g)};
      const Vec2 grad = f.gradient(x);
      CHECK(norm(grad) <= 1.0 + 1e-12);
      const double h = 1e-6;
      const Vec2 fd{(f({x.x + h, x.y}) - f({x.x - h, x.y})) / (2 * h),
                    (f({x.x, x.y + h}) - f({x.x, x.y - h})) / (2 * h)};
      CHECK(norm(grad - fd) < 1e-6);
    }
  }

  SUBCASE("bounded and odd along the tangent") {
    std::mt19937_64 g(4);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int k = 0; k < 200; ++k) {
      const Vec2 x{u(g), u(g)};
      CHECK(std::abs(f(x)) <= (2.0 / 3.0) * rho_m + 1e-12);
      // reflect the tangential coordinate across z0
      const double tcoord = dot(x - z0, tau);
      const Vec2 mirrored = x - 2.0 * tcoord * tau;
      CHECK(f(mirrored) == doctest::Approx(-f(x)).epsilon(1e-10));
    }
  }
}

TEST_CASE("flat boundary: quotients stay below 1 and the fitted rate vanishes") {
  // An almost-flat cap behaves like a half plane, where the flow
  // contracts: the two-point quotients cannot exceed 1 (up to the
  // negligible residual curvature) and the sqrt(t) slope fits to 0.
  SharpnessOptions opts;
  opts.h_max = 1.0 / 128.0;
  opts.points_per_sqrt_t = 8.0;
  opts.steps = 32;
  const SharpnessResult r =
      sharpness_experiment(1e-6, {1e-3, 2e-3, 4e-3}, 4.0, 0.05, 0.0, opts);
  REQUIRE(r.rows.size() == 3);
  for (const auto& row : r.rows) {
    CHECK(row.quotient <= 1.0 + 1e-6);
    CHECK(row.quotient >= 0.9);
    CHECK(row.bound <= 1.0 + 1e-6);
  }
  CHECK(std::abs(r.S_hat) < 0.15);
}

TEST_CASE("sharpness experiment rejects bad grids") {
  CHECK_THROWS_AS(sharpness_experiment(1.0, {1e-3, 2e-3}, 4.0, 0.05, 0.0),
                  ConfigInvalid);
  CHECK_THROWS_AS(sharpness_experiment(1.0, {2e-3, 2e-3, 4e-3}, 4.0, 0.05, 0.0),
                  ConfigInvalid);
  CHECK_THROWS_AS(sharpness_experiment(1.0, {1e-3, 2e-3, 4e-3}, -1.0, 0.05, 0.0),
                  ConfigInvalid);
}

TEST_CASE("gradient at a flat contact point stays near 1") {
  const Domain flat = Domain::parabolic_cap(0.0);
  const TangentialBump f({0.0, 0.0}, {1.0, 0.0}, 1.0 / 3.0);
  SharpnessOptions opts;
  opts.h_max = 1.0 / 128.0;
  opts.points_per_sqrt_t = 8.0;
  opts.steps = 32;
  const double g = pde_gradient_at_contact(flat, f, 1e-3, opts);
  CHECK(g > 0.9);
  CHECK(g <= 1.01);
}
