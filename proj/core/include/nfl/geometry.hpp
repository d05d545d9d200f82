#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nfl/errors.hpp"
#include "nfl/vec.hpp"

namespace nfl {

enum class DomainKind { half_line, disk_interior, disk_exterior, parabolic_cap };

std::string to_string(DomainKind k);

// One weighted point of a boundary quadrature rule.
struct BoundaryPoint {
  Vec2 point;
  double weight;
};

// A domain with smooth boundary on which the reflected process lives.
//
// Sign conventions, used consistently everywhere:
//   signed_distance > 0 strictly inside, < 0 outside, = 0 on the boundary;
//   inward_normal points into the domain;
//   second_ff_lower_bound(z) is the curvature of the boundary at z with
//   respect to the inward normal, so it is >= 0 exactly on convex domains.
//   curvature_bound() returns S = sup_z max(0, -s(z)), the amount of
//   nonconvexity; S = 0 for half_line and disk_interior.
//
// Supported kinds:
//   half_line       [0, inf) on the first coordinate (1-D)
//   disk_interior   {|x| <= R}
//   disk_exterior   {|x| >= R}, the model nonconvex domain
//   parabolic_cap   {x2 >= psi(x1)} with psi(u) = -S1 u^2 / 2 for |u| <= R0,
//                   continued linearly (C^1) beyond, so the boundary is a
//                   complete curve whose curvature vanishes on the tails.
class Domain {
 public:
  Domain() = default;  // defaults to the half-line

  static Domain half_line();
  static Domain disk_interior(double radius);
  static Domain disk_exterior(double radius);
  static Domain parabolic_cap(double s1, double truncation = 2.0);

  // Accepts {"kind": "disk_exterior", "radius": 1.0}-style configs.
  // Cap configs take "s1" plus optional "truncation"; any kind may set
  // an optional "k_bound". Throws ConfigInvalid on anything malformed.
  static Domain from_json_text(const std::string& text);
  static Domain from_json_file(const std::string& path);

  DomainKind kind() const { return kind_; }
  int dimension() const { return kind_ == DomainKind::half_line ? 1 : 2; }
  double radius() const { return radius_; }
  double cap_slope() const { return s1_; }
  double cap_truncation() const { return r0_; }

  double signed_distance(Vec2 x) const;
  bool contains(Vec2 x) const;  // cheap membership test, no distance solve

  // Nearest boundary point and (unsigned) distance. Throws OutsideCollar
  // when |signed_distance(x)| > collar_width(); inside the collar the
  // nearest point is unique because the collar stays clear of the
  // boundary's focal set.
  std::pair<Vec2, double> project_to_boundary(Vec2 x) const;

  // Unit inward normal at the projection of x; same collar requirement.
  Vec2 inward_normal(Vec2 x) const;

  // s(z) for z on the boundary (|sdf| <= 1e-8, else NotOnBoundary).
  double second_ff_lower_bound(Vec2 z) const;

  double curvature_bound() const;      // S >= 0
  double min_curvature_radius() const; // 1 / sup|s|, large when flat
  double collar_width() const;         // min(r_min / 10, 0.1)

  // Lower bound -k for the curvature term in the generator; 0 here
  // (Brownian motion), kept as data so weighted processes can reuse
  // the same estimates.
  double drift_bound() const { return k_bound_; }
  void set_drift_bound(double k) { k_bound_ = k; }

  // Deterministic boundary quadrature: n points with positive weights
  // summing to the sampled boundary length. The seed rotates the
  // stratification offset, so different seeds give different but equally
  // valid rules. half_line always returns the single point 0 with
  // weight 1; the cap samples its curved section |u| <= R0.
  std::vector<BoundaryPoint> boundary_sample(int n, uint64_t seed) const;

  // psi(u) including the linear tails (parabolic_cap only).
  double cap_profile(double u) const;
  // arc length of the curved section between graph coordinates a and b
  double cap_arc_length(double a, double b) const;

  // Nearest boundary point with no collar restriction. Exact for every
  // kind (the cap solves the stationarity cubic in closed form), at any
  // distance; project_to_boundary is this plus the collar guard.
  std::pair<Vec2, double> nearest_boundary(Vec2 x) const;

 private:
  DomainKind kind_ = DomainKind::half_line;
  double radius_ = 1.0;  // disks
  double s1_ = 1.0;      // cap curvature at the apex
  double r0_ = 2.0;      // cap truncation in graph coordinate
  double k_bound_ = 0.0;
};

}  // namespace nfl
