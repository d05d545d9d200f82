#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nfl/geometry.hpp"
#include "nfl/vec.hpp"

namespace nfl {

// Node-centered rectangular lattice; node (i,j) sits at
// (x0 + i h, y0 + j h). 1-D grids use ny = 1.
struct GridSpec {
  double x0 = 0.0, y0 = 0.0;
  double h = 0.0;
  int nx = 0, ny = 1;

  int64_t size() const { return static_cast<int64_t>(nx) * ny; }
  int64_t idx(int i, int j) const { return static_cast<int64_t>(j) * nx + i; }
  Vec2 center(int i, int j) const { return {x0 + i * h, y0 + j * h}; }
};

enum class NodeMask : uint8_t {
  outside = 0,
  inside = 1,  // cell center strictly inside the domain
  halo = 2,    // cut cell with positive volume but center outside
};

// Finite-volume scalar field. Each node owns the cell of side h around
// it; `volume` is the fraction of that cell inside the domain, and
// ax/ay are the wet fractions of the faces toward the +x / +y
// neighbors. Mass sum(volume * h^dim * value) is what the Neumann
// solver conserves (exactly, up to linear-solver tolerance).
struct ScalarField {
  GridSpec grid;
  int dim = 2;
  std::vector<NodeMask> mask;
  std::vector<double> volume;
  std::vector<double> ax, ay;
  std::vector<double> values;

  bool active(int i, int j) const {
    return mask[grid.idx(i, j)] != NodeMask::outside;
  }
  double total_mass() const;
  double min_value() const;  // over active cells
  double max_value() const;

  // Bilinear interpolation among the active nodes around p (weights
  // renormalized when a corner of the surrounding cell is outside).
  double sample(Vec2 p) const;
  // Central-difference gradient of sample(), step h.
  Vec2 sample_gradient(Vec2 p) const;
};

// Samples f0 at active cell centers of a fresh grid over the box.
ScalarField make_field(const Domain& dom, double xlo, double xhi, double ylo,
                       double yhi, double h,
                       const std::function<double(Vec2)>& f0);

// 1-D half-line grid on [0, length] with a node at 0.
ScalarField make_halfline_field(double length, double h,
                                const std::function<double(double)>& f0);

// Unit-mass hat concentrated at the node nearest to x.
ScalarField make_halfline_dirac(double length, double h, double x);

// Neumann heat kernel of the generator-Delta semigroup on [0, inf):
// (4 pi t)^{-1/2} [exp(-(x-y)^2/4t) + exp(-(x+y)^2/4t)].
double halfline_heat_kernel(double x, double y, double t);

struct SolveOptions {
  double tol = 1e-10;        // linear-solver relative residual
  int max_iterations = 8000;
  // Number of implicit-Euler half-step pairs run before Crank-Nicolson
  // takes over; damps the ringing CN produces on rough initial data.
  int rannacher_pairs = 2;
};

// Crank-Nicolson time stepping of du/dt = Laplacian(u) with zero-flux
// boundary, `steps` uniform steps of size t/steps.
ScalarField solve_neumann(const Domain& dom, const ScalarField& f0, double t,
                          int steps, const SolveOptions& opts = {});

struct GradientField {
  GridSpec grid;
  std::vector<Vec2> g;
  std::vector<uint8_t> valid;
  double max_norm() const;
};

// Central differences on inside nodes, one-sided at mask edges.
GradientField gradient_field(const ScalarField& u);

// max |grad u| over inside nodes, cross-checked against two-point
// quotients |u(a) - u(b)| / d(a,b) with d the 8-neighbor grid-Dijkstra
// intrinsic distance; returns the larger of the two estimates.
// Throws DisconnectedMask if the active region splits.
double lipschitz_constant(const ScalarField& u, const Domain& dom);

// Test function for the sharpness experiments: with u = <x - z0, tau>
// and rho = |x - z0|,
//   f(x) = u (1 - c rho^2)            for rho <= rho_m = 1/sqrt(3c),
//   f(x) = u (2/3) rho_m / rho        beyond,
// which is C^1, bounded, has |grad f| <= 1 everywhere with equality
// exactly at z0, and is odd under reflection across the normal at z0.
class TangentialBump {
 public:
  TangentialBump(Vec2 z0, Vec2 tau, double cutoff_c);

  double operator()(Vec2 x) const;
  Vec2 gradient(Vec2 x) const;
  double cutoff_radius() const { return rho_m_; }
  double cutoff_c() const { return c_; }
  Vec2 contact() const { return z0_; }
  Vec2 tangent() const { return tau_; }

 private:
  Vec2 z0_, tau_;
  double c_, rho_m_;
};

struct SharpnessRow {
  double t;
  double quotient;       // (P_t f(z_r) - P_t f(z0)) / d(z0, z_r)
  double bound;          // exp(2 S (1-eps) sqrt(t/pi) - delta sqrt(t))
  double slope_partial;  // sqrt(t)-slope fitted over rows up to here
};

struct SharpnessResult {
  std::vector<SharpnessRow> rows;
  double slope_est = 0.0;  // full-fit a, target 2 S / sqrt(pi)
  double S_hat = 0.0;      // slope_est * sqrt(pi) / 2
  double C_hat = 0.0;      // fitted t coefficient
  double cutoff_c = 0.0;
};

struct SharpnessOptions {
  double h_max = 1.0 / 512.0;
  double points_per_sqrt_t = 16.0;  // h = min(h_max, sqrt(t)/this)
  int steps = 64;                   // CN steps per solve
  // box margin in units of sqrt(2t); influence past the margin falls off
  // like exp(-(sigmas^2/2)), so 5 keeps truncation below 4e-6
  double box_sigmas = 5.0;
  double box_pad = 0.02;
  double cutoff_c = 0.0;            // 0 = automatic from the probe range
  double sample_offset_cells = 1.5; // inward offset (in h) of the probes
  SolveOptions solve{1e-10, 8000, 0};
};

// The two-point-quotient experiment at a nonconvex contact point. For
// each t: solve the Neumann flow of the tangential bump, probe at the
// boundary point sitting r = probe_scale * sqrt(t) along the boundary
// from the contact, divide by the intrinsic (arc) distance, and compare
// against exp(2 S (1-eps) sqrt(t/pi) - delta sqrt(t)).
// The parabolic cap places probes at graph coordinate r; the disk
// exterior at arc length r along the circle.
SharpnessResult sharpness_experiment(double S1,
                                     const std::vector<double>& t_grid,
                                     double probe_scale, double eps,
                                     double delta,
                                     const SharpnessOptions& opts = {});

SharpnessResult sharpness_experiment_disk(double R,
                                          const std::vector<double>& t_grid,
                                          double probe_scale, double eps,
                                          double delta,
                                          const SharpnessOptions& opts = {});

// |grad P_t f| at the contact point z0 of the bump (sampled one cell
// inward, where the Neumann condition makes the offset second order).
// Domain must be disk_exterior or parabolic_cap.
double pde_gradient_at_contact(const Domain& dom, const TangentialBump& f,
                               double t, const SharpnessOptions& opts = {});

}  // namespace nfl
