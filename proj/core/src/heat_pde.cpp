#include "nfl/heat_pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include "nfl/fit.hpp"
#include "nfl/geodesic.hpp"

namespace nfl {
namespace {

constexpr double kPi = 3.14159265358979323846;

double face_aperture(double sdf_a, double sdf_b) {
  if (sdf_a >= 0.0 && sdf_b >= 0.0) return 1.0;
  if (sdf_a <= 0.0 && sdf_b <= 0.0) return 0.0;
  const double wet = std::max(sdf_a, sdf_b);
  const double dry = -std::min(sdf_a, sdf_b);
  return wet / (wet + dry);
}

// Volume fraction of the cell centered at c, by subsampling membership
// on a regular 8x8 pattern. Only used for genuinely cut cells; full and
// empty cells are classified from corner distances.
double cell_volume_fraction(const Domain& dom, Vec2 c, double h) {
  int wet = 0;
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) {
      const Vec2 p{c.x + h * ((a + 0.5) / 8.0 - 0.5),
                   c.y + h * ((b + 0.5) / 8.0 - 0.5)};
      if (dom.contains(p)) ++wet;
    }
  return wet / 64.0;
}

}  // namespace

double ScalarField::total_mass() const {
  const double cell = dim == 1 ? grid.h : grid.h * grid.h;
  double m = 0.0;
  for (int64_t k = 0; k < grid.size(); ++k)
    if (mask[k] != NodeMask::outside) m += volume[k] * cell * values[k];
  return m;
}

double ScalarField::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (int64_t k = 0; k < grid.size(); ++k)
    if (mask[k] != NodeMask::outside) m = std::min(m, values[k]);
  return m;
}

double ScalarField::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (int64_t k = 0; k < grid.size(); ++k)
    if (mask[k] != NodeMask::outside) m = std::max(m, values[k]);
  return m;
}

double ScalarField::sample(Vec2 p) const {
  const double gx = (p.x - grid.x0) / grid.h;
  int i0 = static_cast<int>(std::floor(gx));
  i0 = std::clamp(i0, 0, grid.nx - 2);
  const double fx = std::clamp(gx - i0, 0.0, 1.0);

  if (grid.ny == 1) {
    const bool a0 = mask[grid.idx(i0, 0)] != NodeMask::outside;
    const bool a1 = mask[grid.idx(i0 + 1, 0)] != NodeMask::outside;
    if (a0 && a1) return (1 - fx) * values[grid.idx(i0, 0)] + fx * values[grid.idx(i0 + 1, 0)];
    if (a0) return values[grid.idx(i0, 0)];
    if (a1) return values[grid.idx(i0 + 1, 0)];
    throw DegenerateInput("sample: no active node near point");
  }

  const double gy = (p.y - grid.y0) / grid.h;
  int j0 = static_cast<int>(std::floor(gy));
  j0 = std::clamp(j0, 0, grid.ny - 2);
  const double fy = std::clamp(gy - j0, 0.0, 1.0);

  const int ii[4] = {i0, i0 + 1, i0, i0 + 1};
  const int jj[4] = {j0, j0, j0 + 1, j0 + 1};
  const double ww[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
  double num = 0.0, den = 0.0;
  for (int k = 0; k < 4; ++k) {
    const int64_t id = grid.idx(ii[k], jj[k]);
    if (mask[id] == NodeMask::outside) continue;
    num += ww[k] * values[id];
    den += ww[k];
  }
  if (den <= 0.0) throw DegenerateInput("sample: no active node near point");
  return num / den;
}

Vec2 ScalarField::sample_gradient(Vec2 p) const {
  const double h = grid.h;
  const double gx = (sample({p.x + h, p.y}) - sample({p.x - h, p.y})) / (2 * h);
  if (grid.ny == 1) return {gx, 0.0};
  const double gy = (sample({p.x, p.y + h}) - sample({p.x, p.y - h})) / (2 * h);
  return {gx, gy};
}

ScalarField make_field(const Domain& dom, double xlo, double xhi, double ylo,
                       double yhi, double h,
                       const std::function<double(Vec2)>& f0) {
  if (!(h > 0.0) || !(xhi > xlo) || !(yhi > ylo))
    throw ConfigInvalid("make_field: need h > 0 and a nonempty box");
  ScalarField f;
  f.dim = 2;
  f.grid.h = h;
  f.grid.x0 = xlo;
  f.grid.y0 = ylo;
  f.grid.nx = 2 + static_cast<int>(std::ceil((xhi - xlo) / h - 1e-9));
  f.grid.ny = 2 + static_cast<int>(std::ceil((yhi - ylo) / h - 1e-9));
  const int nx = f.grid.nx, ny = f.grid.ny;
  const int64_t n = f.grid.size();
  f.mask.assign(n, NodeMask::outside);
  f.volume.assign(n, 0.0);
  f.ax.assign(n, 0.0);
  f.ay.assign(n, 0.0);
  f.values.assign(n, 0.0);

  // distances at cell corners; corner (i,j) is the lower-left corner of
  // cell (i,j)
  std::vector<double> corner(static_cast<int64_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      corner[static_cast<int64_t>(j) * (nx + 1) + i] =
          dom.signed_distance({xlo + (i - 0.5) * h, ylo + (j - 0.5) * h});
  auto corner_at = [&](int i, int j) {
    return corner[static_cast<int64_t>(j) * (nx + 1) + i];
  };

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int64_t id = f.grid.idx(i, j);
      const double c00 = corner_at(i, j), c10 = corner_at(i + 1, j);
      const double c01 = corner_at(i, j + 1), c11 = corner_at(i + 1, j + 1);
      const double cmin = std::min({c00, c10, c01, c11});
      const double cmax = std::max({c00, c10, c01, c11});
      double vol;
      // boundary sag across one cell is at most h^2 / (4 r_min) << 0.3 h
      if (cmin >= 0.3 * h) vol = 1.0;
      else if (cmax <= -0.3 * h) vol = 0.0;
      else vol = cell_volume_fraction(dom, f.grid.center(i, j), h);
      f.volume[id] = vol;
      if (vol > 0.0) {
        const Vec2 c = f.grid.center(i, j);
        f.mask[id] = dom.signed_distance(c) > 0.0 ? NodeMask::inside : NodeMask::halo;
      }
    }
  }

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int64_t id = f.grid.idx(i, j);
      if (f.mask[id] == NodeMask::outside) continue;
      if (i + 1 < nx && f.mask[f.grid.idx(i + 1, j)] != NodeMask::outside)
        f.ax[id] = face_aperture(corner_at(i + 1, j), corner_at(i + 1, j + 1));
      if (j + 1 < ny && f.mask[f.grid.idx(i, j + 1)] != NodeMask::outside)
        f.ay[id] = face_aperture(corner_at(i, j + 1), corner_at(i + 1, j + 1));
    }
  }

  // demote flux-isolated slivers (wet corners whose every face is dry);
  // they would otherwise sit in the system as spurious components
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int64_t id = f.grid.idx(i, j);
      if (f.mask[id] == NodeMask::outside) continue;
      const double total = f.ax[id] + f.ay[id] +
                           (i > 0 ? f.ax[f.grid.idx(i - 1, j)] : 0.0) +
                           (j > 0 ? f.ay[f.grid.idx(i, j - 1)] : 0.0);
      if (total <= 0.0) {
        f.mask[id] = NodeMask::outside;
        f.volume[id] = 0.0;
      }
    }
  }

  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int64_t id = f.grid.idx(i, j);
      if (f.mask[id] != NodeMask::outside) f.values[id] = f0(f.grid.center(i, j));
    }
  return f;
}

ScalarField make_halfline_field(double length, double h,
                                const std::function<double(double)>& f0) {
  if (!(h > 0.0) || !(length > h)) throw ConfigInvalid("make_halfline_field: bad box");
  ScalarField f;
  f.dim = 1;
  f.grid.h = h;
  f.grid.x0 = 0.0;
  f.grid.y0 = 0.0;
  f.grid.nx = 1 + static_cast<int>(std::llround(length / h));
  f.grid.ny = 1;
  const int64_t n = f.grid.size();
  f.mask.assign(n, NodeMask::inside);
  f.mask[0] = NodeMask::halo;  // node at x = 0 sits on the boundary
  f.volume.assign(n, 1.0);
  f.volume[0] = 0.5;  // cell [-h/2, h/2] is half wet
  f.ax.assign(n, 1.0);
  f.ax[n - 1] = 0.0;
  f.ay.assign(n, 0.0);
  f.values.resize(n);
  for (int i = 0; i < f.grid.nx; ++i) f.values[i] = f0(i * h);
  return f;
}

ScalarField make_halfline_dirac(double length, double h, double x) {
  ScalarField f = make_halfline_field(length, h, [](double) { return 0.0; });
  const int i = std::clamp(static_cast<int>(std::llround(x / h)), 0, f.grid.nx - 1);
  f.values[i] = 1.0 / (f.volume[i] * h);
  return f;
}

double halfline_heat_kernel(double x, double y, double t) {
  if (!(t > 0.0)) throw ConfigInvalid("halfline_heat_kernel: t must be positive");
  const double norm = 1.0 / std::sqrt(4.0 * kPi * t);
  const double dm = x - y, dp = x + y;
  return norm * (std::exp(-dm * dm / (4.0 * t)) + std::exp(-dp * dp / (4.0 * t)));
}

namespace {

// 1-D tridiagonal Crank-Nicolson on the half-line field.
void solve_1d(ScalarField& u, double t, int steps, const SolveOptions& opts) {
  const int n = u.grid.nx;
  const double h = u.grid.h;
  const double dt = t / steps;
  const double c = dt / (2.0 * h);  // flux scale for the dt/2 operator

  // A = M - (dt/2) K, with M_i = volume_i * h and K the flux form
  // (flux through the face between i and i+1 is a * (u_{i+1} - u_i) / h).
  std::vector<double> diag(n), lower(n), upper(n), rhs(n), w(n);
  auto aL = [&](int i) { return i > 0 ? u.ax[i - 1] : 0.0; };
  auto aR = [&](int i) { return u.ax[i]; };
  for (int i = 0; i < n; ++i) {
    diag[i] = u.volume[i] * h + c * (aL(i) + aR(i));
    lower[i] = -c * aL(i);
    upper[i] = -c * aR(i);
  }

  auto thomas = [&](std::vector<double>& x) {
    // scratch w: standard forward elimination, stable for our M-matrices
    w[0] = upper[0] / diag[0];
    x[0] /= diag[0];
    for (int i = 1; i < n; ++i) {
      const double m = 1.0 / (diag[i] - lower[i] * w[i - 1]);
      w[i] = upper[i] * m;
      x[i] = (x[i] - lower[i] * x[i - 1]) * m;
    }
    for (int i = n - 2; i >= 0; --i) x[i] -= w[i] * x[i + 1];
  };

  const int pairs = std::min(opts.rannacher_pairs, steps);
  for (int s = 0; s < steps; ++s) {
    if (s < pairs) {
      // two implicit-Euler half steps; same matrix as the CN solve
      for (int half = 0; half < 2; ++half) {
        for (int i = 0; i < n; ++i) rhs[i] = u.volume[i] * h * u.values[i];
        thomas(rhs);
        u.values.assign(rhs.begin(), rhs.end());
      }
    } else {
      // rhs = (M + (dt/2) K) u = 2 M u - A u
      for (int i = 0; i < n; ++i) {
        double au = diag[i] * u.values[i];
        if (i > 0) au += lower[i] * u.values[i - 1];
        if (i + 1 < n) au += upper[i] * u.values[i + 1];
        rhs[i] = 2.0 * u.volume[i] * h * u.values[i] - au;
      }
      thomas(rhs);
      u.values.assign(rhs.begin(), rhs.end());
    }
  }
}

void solve_2d(const Domain& dom, ScalarField& u, double t, int steps,
              const SolveOptions& opts) {
  const auto& g = u.grid;
  const double h = g.h;
  const double dt = t / steps;
  const double c = dt / 2.0;

  std::vector<int64_t> ids;
  std::vector<int> compact(g.size(), -1);
  for (int64_t k = 0; k < g.size(); ++k)
    if (u.mask[k] != NodeMask::outside) {
      compact[k] = static_cast<int>(ids.size());
      ids.push_back(k);
    }
  const int n = static_cast<int>(ids.size());
  if (n == 0) throw DegenerateInput("solve_neumann: empty mask");

  Eigen::VectorXd m(n);
  for (int r = 0; r < n; ++r) m[r] = u.volume[ids[r]] * h * h;

  // A = M - (dt/2) K; K has aperture fluxes, so A is an SPD M-matrix
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(n) * 5);
  std::vector<double> diag(n, 0.0);
  for (int r = 0; r < n; ++r) diag[r] = m[r];
  auto couple = [&](int64_t ka, int64_t kb, double aperture) {
    if (aperture <= 0.0) return;
    const int ra = compact[ka], rb = compact[kb];
    if (ra < 0 || rb < 0) return;
    diag[ra] += c * aperture;
    diag[rb] += c * aperture;
    trip.emplace_back(ra, rb, -c * aperture);
    trip.emplace_back(rb, ra, -c * aperture);
  };
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int64_t k = g.idx(i, j);
      if (compact[k] < 0) continue;
      if (i + 1 < g.nx) couple(k, g.idx(i + 1, j), u.ax[k]);
      if (j + 1 < g.ny) couple(k, g.idx(i, j + 1), u.ay[k]);
    }
  for (int r = 0; r < n; ++r) trip.emplace_back(r, r, diag[r]);

  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                           Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double>>
      cg;
  cg.setTolerance(opts.tol);
  cg.setMaxIterations(opts.max_iterations);
  cg.compute(A);
  if (cg.info() != Eigen::Success)
    throw NonConvergent("solve_neumann: preconditioner setup failed");

  Eigen::VectorXd x(n);
  for (int r = 0; r < n; ++r) x[r] = u.values[ids[r]];

  const int pairs = std::min(opts.rannacher_pairs, steps);
  Eigen::VectorXd rhs(n);
  for (int s = 0; s < steps; ++s) {
    const bool rannacher = s < pairs;
    for (int half = 0; half < (rannacher ? 2 : 1); ++half) {
      if (rannacher) rhs = m.cwiseProduct(x);
      else rhs = 2.0 * m.cwiseProduct(x) - A * x;
      x = cg.solveWithGuess(rhs, x);
      if (cg.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "solve_neumann: CG stalled at step " << s << " (error "
            << cg.error() << ", " << cg.iterations() << " iterations)";
        throw NonConvergent(msg.str());
      }
    }
  }
  for (int r = 0; r < n; ++r) u.values[ids[r]] = x[r];
}

}  // namespace

ScalarField solve_neumann(const Domain& dom, const ScalarField& f0, double t,
                          int steps, const SolveOptions& opts) {
  if (steps < 1) throw ConfigInvalid("solve_neumann: steps must be >= 1");
  if (!(t > 0.0)) throw ConfigInvalid("solve_neumann: t must be positive");
  if (f0.grid.h > dom.min_curvature_radius() / 8.0)
    throw GridTooCoarse("solve_neumann: need >= 8 nodes per curvature radius");
  ScalarField u = f0;
  if (u.grid.ny == 1) solve_1d(u, t, steps, opts);
  else solve_2d(dom, u, t, steps, opts);
  return u;
}

GradientField gradient_field(const ScalarField& u) {
  const auto& g = u.grid;
  GradientField out;
  out.grid = g;
  out.g.assign(g.size(), Vec2{0, 0});
  out.valid.assign(g.size(), 0);

  auto value = [&](int i, int j) { return u.values[g.idx(i, j)]; };
  auto active = [&](int i, int j) {
    return i >= 0 && j >= 0 && i < g.nx && j < g.ny &&
           u.mask[g.idx(i, j)] != NodeMask::outside;
  };
  auto one_axis = [&](int i, int j, int di, int dj, bool& ok) -> double {
    const bool plus = active(i + di, j + dj), minus = active(i - di, j - dj);
    ok = true;
    if (plus && minus)
      return (value(i + di, j + dj) - value(i - di, j - dj)) / (2.0 * g.h);
    if (plus) return (value(i + di, j + dj) - value(i, j)) / g.h;
    if (minus) return (value(i, j) - value(i - di, j - dj)) / g.h;
    ok = false;
    return 0.0;
  };

  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int64_t id = g.idx(i, j);
      if (u.mask[id] != NodeMask::inside) continue;
      bool okx = false, oky = true;
      Vec2 grad;
      grad.x = one_axis(i, j, 1, 0, okx);
      if (g.ny > 1) grad.y = one_axis(i, j, 0, 1, oky);
      if (okx && oky) {
        out.g[id] = grad;
        out.valid[id] = 1;
      }
    }
  return out;
}

double GradientField::max_norm() const {
  double m = 0.0;
  for (int64_t k = 0; k < grid.size(); ++k)
    if (valid[k]) m = std::max(m, norm(g[k]));
  return m;
}

double lipschitz_constant(const ScalarField& u, const Domain& dom) {
  (void)dom;
  if (count_components(u) > 1)
    throw DisconnectedMask("lipschitz_constant: active region is not connected");

  const GradientField gf = gradient_field(u);
  double best = gf.max_norm();

  // Cross-check with two-point quotients over the grid geodesic metric.
  // Sources: the extreme-value nodes plus the extreme-coordinate ones;
  // quotients can only sharpen the estimate where the gradient stencil
  // underresolves.
  const auto& g = u.grid;
  std::vector<int64_t> sources;
  int64_t lo_id = -1, hi_id = -1;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int64_t k = 0; k < g.size(); ++k) {
    if (u.mask[k] == NodeMask::outside) continue;
    if (u.values[k] < lo) { lo = u.values[k]; lo_id = k; }
    if (u.values[k] > hi) { hi = u.values[k]; hi_id = k; }
  }
  if (lo_id >= 0) sources.push_back(lo_id);
  if (hi_id >= 0 && hi_id != lo_id) sources.push_back(hi_id);

  for (const int64_t src : sources) {
    const int si = static_cast<int>(src % g.nx);
    const int sj = static_cast<int>(src / g.nx);
    const auto d = grid_geodesic_distances(u, si, sj);
    const double us = u.values[src];
    for (int64_t k = 0; k < g.size(); ++k) {
      if (u.mask[k] == NodeMask::outside || k == src) continue;
      if (!(d[k] > 0.5 * g.h) || !std::isfinite(d[k])) continue;
      best = std::max(best, std::abs(u.values[k] - us) / d[k]);
    }
  }
  return best;
}

TangentialBump::TangentialBump(Vec2 z0, Vec2 tau, double cutoff_c)
    : z0_(z0), tau_(normalized(tau)), c_(cutoff_c) {
  if (!(cutoff_c > 0.0)) throw ConfigInvalid("TangentialBump: cutoff_c must be positive");
  rho_m_ = 1.0 / std::sqrt(3.0 * c_);
}

double TangentialBump::operator()(Vec2 x) const {
  const Vec2 d = x - z0_;
  const double rho2 = norm2(d);
  const double uu = dot(d, tau_);
  if (rho2 <= rho_m_ * rho_m_) return uu * (1.0 - c_ * rho2);
  // h(rho_m)/rho = (2/3) rho_m / rho
  return uu * (2.0 / 3.0) * rho_m_ / std::sqrt(rho2);
}

Vec2 TangentialBump::gradient(Vec2 x) const {
  const Vec2 d = x - z0_;
  const double rho2 = norm2(d);
  const double uu = dot(d, tau_);
  if (rho2 <= rho_m_ * rho_m_)
    return (1.0 - c_ * rho2) * tau_ - (2.0 * c_ * uu) * d;
  const double rho = std::sqrt(rho2);
  const double k = (2.0 / 3.0) * rho_m_;
  // grad of k * u / rho
  return (k / rho) * tau_ - (k * uu / (rho2 * rho)) * d;
}

namespace {

struct ProbeSetup {
  Domain dom;
  Vec2 z0, tau;
  double S = 0.0;
  std::function<Vec2(double)> probe;      // boundary point at parameter r
  std::function<double(double)> arc_dist; // intrinsic distance z0 -> probe(r)
  // box builder: given r and margin, produce box corners
  std::function<void(double, double, double&, double&, double&, double&)> box;

  explicit ProbeSetup(Domain d) : dom(std::move(d)) {}
};

SharpnessResult run_sharpness(const ProbeSetup& setup,
                              const std::vector<double>& t_grid,
                              double probe_scale, double eps, double delta,
                              const SharpnessOptions& opts) {
  if (t_grid.size() < 3)
    throw ConfigInvalid("sharpness_experiment: need at least 3 grid times");
  for (size_t i = 0; i + 1 < t_grid.size(); ++i)
    if (!(t_grid[i] < t_grid[i + 1]))
      throw ConfigInvalid("sharpness_experiment: t_grid must be strictly increasing");
  if (!(probe_scale > 0.0))
    throw ConfigInvalid("sharpness_experiment: probe_scale must be positive");

  const double r_max = probe_scale * std::sqrt(t_grid.back());
  const double cutoff =
      opts.cutoff_c > 0.0
          ? opts.cutoff_c
          : std::min(1.0 / 3.0, 1.0 / (3.0 * (2.5 * r_max) * (2.5 * r_max)));
  const TangentialBump f(setup.z0, setup.tau, cutoff);
  if (r_max > 0.8 * f.cutoff_radius())
    throw ConfigInvalid("sharpness_experiment: probes leave the unit-Lipschitz core");

  SharpnessResult res;
  res.cutoff_c = cutoff;
  std::vector<std::pair<double, double>> pairs;

  for (const double t : t_grid) {
    const double r = probe_scale * std::sqrt(t);
    const double h = std::min(opts.h_max, std::sqrt(t) / opts.points_per_sqrt_t);
    const double margin = opts.box_sigmas * std::sqrt(2.0 * t) + opts.box_pad;
    double xlo, xhi, ylo, yhi;
    setup.box(r, margin, xlo, xhi, ylo, yhi);

    ScalarField f0 = make_field(setup.dom, xlo, xhi, ylo, yhi, h,
                                [&](Vec2 p) { return f(p); });
    const ScalarField u = solve_neumann(setup.dom, f0, t, opts.steps, opts.solve);

    const double off = opts.sample_offset_cells * h;
    const Vec2 zr = setup.probe(r);
    const double vr = u.sample(zr + off * setup.dom.inward_normal(zr));
    const double v0 = u.sample(setup.z0 + off * setup.dom.inward_normal(setup.z0));
    const double quotient = (vr - v0) / setup.arc_dist(r);

    pairs.emplace_back(t, quotient);
    double slope;
    if (pairs.size() == 1) {
      slope = std::log(quotient) / std::sqrt(t);
    } else if (pairs.size() == 2) {
      // exact 2x2 solve of log q = a sqrt(t) + b t
      const double x1 = std::sqrt(pairs[0].first), y1 = pairs[0].first;
      const double x2 = std::sqrt(pairs[1].first), y2 = pairs[1].first;
      const double l1 = std::log(pairs[0].second), l2 = std::log(pairs[1].second);
      const double det = x1 * y2 - x2 * y1;
      slope = det != 0.0 ? (l1 * y2 - l2 * y1) / det : 0.0;
    } else {
      slope = fit_sqrt_rate(pairs).a;
    }
    const double bound =
        std::exp(2.0 * setup.S * (1.0 - eps) * std::sqrt(t / kPi) -
                 delta * std::sqrt(t));
    res.rows.push_back({t, quotient, bound, slope});
  }

  const SqrtRateFit fit = fit_sqrt_rate(pairs);
  res.slope_est = fit.a;
  res.S_hat = fit.S_hat();
  res.C_hat = fit.b;
  return res;
}

ProbeSetup cap_setup(double S1, double r_max) {
  const double truncation = std::max(2.0, 1.5 * r_max);
  ProbeSetup s(Domain::parabolic_cap(S1, truncation));
  s.z0 = {0.0, 0.0};
  s.tau = {1.0, 0.0};
  s.S = S1;
  const Domain dom = s.dom;
  s.probe = [dom](double r) { return Vec2{r, dom.cap_profile(r)}; };
  s.arc_dist = [dom](double r) { return dom.cap_arc_length(0.0, r); };
  s.box = [dom](double r, double m, double& xlo, double& xhi, double& ylo,
                double& yhi) {
    // samples sit at graph coordinates 0 and r, so the box needs the full
    // margin beyond those only — not a symmetric span
    xlo = -m;
    xhi = r + m;
    // the profile is <= 0; pad below its lowest point in the box so the
    // boundary curve is strictly interior to the grid (dry cells are free)
    ylo = dom.cap_profile(r + m) - 0.1 * m;
    yhi = m;
  };
  return s;
}

ProbeSetup disk_setup(double R, double r_max) {
  ProbeSetup s(Domain::disk_exterior(R));
  s.z0 = {R, 0.0};
  s.tau = {0.0, 1.0};
  s.S = 1.0 / R;
  if (r_max > R * kPi / 3.0)
    throw ConfigInvalid("sharpness_experiment_disk: probe arc exceeds 60 degrees");
  s.probe = [R](double r) {
    return Vec2{R * std::cos(r / R), R * std::sin(r / R)};
  };
  s.arc_dist = [](double r) { return r; };
  s.box = [R](double r, double m, double& xlo, double& xhi, double& ylo,
              double& yhi) {
    // probes span boundary angles [0, r/R]; cover the arc reached within
    // the diffusion margin on either side, plus the radial margin
    const double phi_hi = std::min((r + m) / R, 2.0 * kPi / 3.0);
    const double phi_lo = std::min(m / R, 2.0 * kPi / 3.0);
    xlo = R * std::cos(phi_hi) - m;
    xhi = R + m;
    yhi = R * std::sin(std::min(phi_hi, kPi / 2.0)) + m;
    ylo = -(R * std::sin(std::min(phi_lo, kPi / 2.0)) + m);
  };
  return s;
}

}  // namespace

SharpnessResult sharpness_experiment(double S1,
                                     const std::vector<double>& t_grid,
                                     double probe_scale, double eps,
                                     double delta,
                                     const SharpnessOptions& opts) {
  if (!(S1 > 0.0)) throw ConfigInvalid("sharpness_experiment: S1 must be positive");
  if (t_grid.empty()) throw ConfigInvalid("sharpness_experiment: empty t_grid");
  const double r_max = probe_scale * std::sqrt(t_grid.back());
  return run_sharpness(cap_setup(S1, r_max), t_grid, probe_scale, eps, delta, opts);
}

SharpnessResult sharpness_experiment_disk(double R,
                                          const std::vector<double>& t_grid,
                                          double probe_scale, double eps,
                                          double delta,
                                          const SharpnessOptions& opts) {
  if (!(R > 0.0)) throw ConfigInvalid("sharpness_experiment_disk: R must be positive");
  if (t_grid.empty()) throw ConfigInvalid("sharpness_experiment_disk: empty t_grid");
  const double r_max = probe_scale * std::sqrt(t_grid.back());
  return run_sharpness(disk_setup(R, r_max), t_grid, probe_scale, eps, delta, opts);
}

double pde_gradient_at_contact(const Domain& dom, const TangentialBump& f,
                               double t, const SharpnessOptions& opts) {
  const Vec2 z0 = f.contact();
  const double h = std::min(opts.h_max, std::sqrt(t) / opts.points_per_sqrt_t);
  const double margin = opts.box_sigmas * std::sqrt(2.0 * t) + opts.box_pad;

  double xlo, xhi, ylo, yhi;
  if (dom.kind() == DomainKind::parabolic_cap) {
    xlo = z0.x - margin;
    xhi = z0.x + margin;
    ylo = dom.cap_profile(std::max(std::abs(xlo), std::abs(xhi)));
    yhi = z0.y + margin;
  } else if (dom.kind() == DomainKind::disk_exterior) {
    const double R = dom.radius();
    const double phi = std::min(margin / R * 1.5 + 0.05, 2.0 * kPi / 3.0);
    xlo = R * std::cos(phi) - margin;
    xhi = R + margin;
    yhi = R * std::sin(phi) + margin;
    ylo = -yhi;
  } else {
    throw ConfigInvalid("pde_gradient_at_contact: unsupported domain kind");
  }

  ScalarField f0 = make_field(dom, xlo, xhi, ylo, yhi, h,
                              [&](Vec2 p) { return f(p); });
  const ScalarField u = solve_neumann(dom, f0, t, opts.steps, opts.solve);
  const double off = opts.sample_offset_cells * h;
  return norm(u.sample_gradient(z0 + off * dom.inward_normal(z0)));
}

}  // namespace nfl
