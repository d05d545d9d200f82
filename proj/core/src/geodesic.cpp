#include "nfl/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace nfl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double len2 = norm2(d);
  if (len2 == 0.0) return dist(p, a);
  const double s = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
  return dist(p, a + s * d);
}

double wrap_around_disk(double R, Vec2 a, Vec2 b) {
  const double ra = norm(a), rb = norm(b);
  const double phi = std::acos(std::clamp(dot(a, b) / (ra * rb), -1.0, 1.0));
  const double ta = std::acos(std::clamp(R / ra, -1.0, 1.0));
  const double tb = std::acos(std::clamp(R / rb, -1.0, 1.0));
  const double arc = phi - ta - tb;
  return std::sqrt(std::max(0.0, ra * ra - R * R)) +
         std::sqrt(std::max(0.0, rb * rb - R * R)) + R * std::max(0.0, arc);
}

// Signed clearance of the segment a-b above the cap profile; negative
// means the segment dips below the boundary graph. The clearance is a
// convex function of the segment parameter, so golden-section search
// finds its minimum.
double cap_segment_clearance(const Domain& dom, Vec2 a, Vec2 b) {
  auto g = [&](double s) {
    const Vec2 p = a + s * (b - a);
    return p.y - dom.cap_profile(p.x);
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double g1 = g(x1), g2 = g(x2);
  for (int it = 0; it < 80; ++it) {
    if (g1 < g2) {
      hi = x2; x2 = x1; g2 = g1;
      x1 = hi - inv_phi * (hi - lo);
      g1 = g(x1);
    } else {
      lo = x1; x1 = x2; g1 = g2;
      x2 = lo + inv_phi * (hi - lo);
      g2 = g(x2);
    }
  }
  return std::min({g(0.0), g(1.0), g1, g2});
}

// Taut band around the graph boundary: the blocked geodesic runs
// straight to a tangent point, follows the curve, and leaves straight.
// With AL the arc-length antiderivative, the total splits into two
// one-dimensional minimizations — valid only over candidates whose
// straight part stays above the graph. On that feasible set each piece
// decreases monotonically up to the true tangency, so the constrained
// minimum is the tangent point; without the constraint the scan drifts
// onto crossed tangent pairs whose straight parts cut the obstacle and
// the sum collapses below the chord.
double wrap_around_cap(const Domain& dom, Vec2 a, Vec2 b) {
  if (a.x > b.x) std::swap(a, b);
  const double r0 = dom.cap_truncation();
  const double lo = std::min({a.x, b.x, -r0}) - 2.0;
  const double hi = std::max({a.x, b.x, r0}) + 2.0;
  const int n = 4000;
  // An endpoint lying on the curve must keep its own abscissa (and the
  // neighboring scan cell) admissible: allow the curvature sag of one
  // scan cell, which is far below any genuine cut through the hump.
  const double du = (hi - lo) / n;
  const double feas_tol = -(0.5 * dom.cap_slope() * du * du + 1e-9);

  auto curve = [&](double u) { return Vec2{u, dom.cap_profile(u)}; };
  auto arc_from_0 = [&](double u) { return dom.cap_arc_length(0.0, u); };

  auto minimize = [&](auto&& fn) {
    double best = kInf, best_u = lo;
    for (int i = 0; i <= n; ++i) {
      const double u = lo + (hi - lo) * i / n;
      const double v = fn(u);
      if (v < best) { best = v; best_u = u; }
    }
    // golden refinement around the scan minimum
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double l = best_u - (hi - lo) / n, r = best_u + (hi - lo) / n;
    double x1 = r - inv_phi * (r - l), x2 = l + inv_phi * (r - l);
    double f1 = fn(x1), f2 = fn(x2);
    for (int it = 0; it < 60; ++it) {
      if (f1 < f2) { r = x2; x2 = x1; f2 = f1; x1 = r - inv_phi * (r - l); f1 = fn(x1); }
      else { l = x1; x1 = x2; f1 = f2; x2 = l + inv_phi * (r - l); f2 = fn(x2); }
    }
    return std::min({best, f1, f2});
  };

  const double left = minimize([&](double u) {
    if (cap_segment_clearance(dom, a, curve(u)) < feas_tol) return kInf;
    return dist(a, curve(u)) - arc_from_0(u);
  });
  const double right = minimize([&](double u) {
    if (cap_segment_clearance(dom, b, curve(u)) < feas_tol) return kInf;
    return dist(b, curve(u)) + arc_from_0(u);
  });
  return left + right;
}

}  // namespace

double intrinsic_distance(const Domain& dom, Vec2 a, Vec2 b) {
  if (dom.signed_distance(a) < -1e-9 || dom.signed_distance(b) < -1e-9)
    throw DegenerateInput("intrinsic_distance: endpoint outside the domain");
  switch (dom.kind()) {
    case DomainKind::half_line:
      return std::abs(a.x - b.x);
    case DomainKind::disk_interior:
      return dist(a, b);
    case DomainKind::disk_exterior: {
      if (point_segment_distance({0.0, 0.0}, a, b) >= dom.radius() - 1e-12)
        return dist(a, b);
      return wrap_around_disk(dom.radius(), a, b);
    }
    case DomainKind::parabolic_cap: {
      if (cap_segment_clearance(dom, a, b) >= -1e-12) return dist(a, b);
      return std::max(dist(a, b), wrap_around_cap(dom, a, b));
    }
  }
  return dist(a, b);
}

int count_components(const ScalarField& field, std::vector<int>* labels) {
  const auto& g = field.grid;
  std::vector<int> lab(g.size(), -1);
  int n_comp = 0;
  std::vector<int64_t> stack;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int64_t id = g.idx(i, j);
      if (field.mask[id] == NodeMask::outside || lab[id] >= 0) continue;
      stack.push_back(id);
      lab[id] = n_comp;
      while (!stack.empty()) {
        const int64_t cur = stack.back();
        stack.pop_back();
        const int ci = static_cast<int>(cur % g.nx);
        const int cj = static_cast<int>(cur / g.nx);
        auto visit = [&](int ni, int nj, double aperture) {
          if (ni < 0 || nj < 0 || ni >= g.nx || nj >= g.ny || aperture <= 0.0) return;
          const int64_t nid = g.idx(ni, nj);
          if (field.mask[nid] == NodeMask::outside || lab[nid] >= 0) return;
          lab[nid] = n_comp;
          stack.push_back(nid);
        };
        visit(ci + 1, cj, field.ax[cur]);
        visit(ci - 1, cj, ci > 0 ? field.ax[g.idx(ci - 1, cj)] : 0.0);
        if (g.ny > 1) {
          visit(ci, cj + 1, field.ay[cur]);
          visit(ci, cj - 1, cj > 0 ? field.ay[g.idx(ci, cj - 1)] : 0.0);
        }
      }
      ++n_comp;
    }
  }
  if (labels) *labels = std::move(lab);
  return n_comp;
}

std::vector<double> grid_geodesic_distances(const ScalarField& field, int si,
                                            int sj) {
  const auto& g = field.grid;
  std::vector<double> dist_map(g.size(), kInf);
  if (si < 0 || sj < 0 || si >= g.nx || sj >= g.ny)
    throw DegenerateInput("grid_geodesic_distances: source outside grid");
  if (field.mask[g.idx(si, sj)] == NodeMask::outside)
    throw DegenerateInput("grid_geodesic_distances: source not active");

  using Item = std::pair<double, int64_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist_map[g.idx(si, sj)] = 0.0;
  pq.push({0.0, g.idx(si, sj)});
  const double h = g.h;
  const double diag = std::sqrt(2.0) * h;

  auto active = [&](int i, int j) {
    return i >= 0 && j >= 0 && i < g.nx && j < g.ny &&
           field.mask[g.idx(i, j)] != NodeMask::outside;
  };

  while (!pq.empty()) {
    const auto [d, id] = pq.top();
    pq.pop();
    if (d > dist_map[id]) continue;
    const int i = static_cast<int>(id % g.nx);
    const int j = static_cast<int>(id / g.nx);
    auto relax = [&](int ni, int nj, double w) {
      if (!active(ni, nj)) return;
      const int64_t nid = g.idx(ni, nj);
      if (d + w < dist_map[nid]) {
        dist_map[nid] = d + w;
        pq.push({d + w, nid});
      }
    };
    relax(i + 1, j, h);
    relax(i - 1, j, h);
    if (g.ny > 1) {
      relax(i, j + 1, h);
      relax(i, j - 1, h);
      // diagonals must not leak across a boundary corner
      if (active(i + 1, j) && active(i, j + 1)) relax(i + 1, j + 1, diag);
      if (active(i - 1, j) && active(i, j + 1)) relax(i - 1, j + 1, diag);
      if (active(i + 1, j) && active(i, j - 1)) relax(i + 1, j - 1, diag);
      if (active(i - 1, j) && active(i, j - 1)) relax(i - 1, j - 1, diag);
    }
  }
  return dist_map;
}

}  // namespace nfl
