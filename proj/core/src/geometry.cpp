#include "nfl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nfl/rng.hpp"

namespace nfl {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kOnBoundaryTol = 1e-8;

double seeded_offset(uint64_t seed) {
  uint64_t st = seed;
  return (splitmix64(st) >> 11) * 0x1.0p-53;
}

// Real roots of t^3 + p t + q = 0, Newton-polished.
int solve_depressed_cubic(double p, double q, double roots[3]) {
  int n = 0;
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    const double a = std::cbrt(-0.5 * q + sq);
    const double b = std::cbrt(-0.5 * q - sq);
    roots[n++] = a + b;
  } else {
    // three real roots; here p < 0 necessarily
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k)
      roots[n++] = m * std::cos(theta - 2.0 * kPi * k / 3.0);
  }
  for (int i = 0; i < n; ++i) {
    for (int it = 0; it < 2; ++it) {
      const double t = roots[i];
      const double f = t * t * t + p * t + q;
      const double df = 3.0 * t * t + p;
      if (df != 0.0) roots[i] = t - f / df;
    }
  }
  return n;
}

}  // namespace

std::string to_string(DomainKind k) {
  switch (k) {
    case DomainKind::half_line: return "half_line";
    case DomainKind::disk_interior: return "disk_interior";
    case DomainKind::disk_exterior: return "disk_exterior";
    case DomainKind::parabolic_cap: return "parabolic_cap";
  }
  return "?";
}

Domain Domain::half_line() {
  Domain d;
  d.kind_ = DomainKind::half_line;
  return d;
}

Domain Domain::disk_interior(double radius) {
  if (!(radius > 0.0)) throw ConfigInvalid("disk_interior: radius must be positive");
  Domain d;
  d.kind_ = DomainKind::disk_interior;
  d.radius_ = radius;
  return d;
}

Domain Domain::disk_exterior(double radius) {
  if (!(radius > 0.0)) throw ConfigInvalid("disk_exterior: radius must be positive");
  Domain d;
  d.kind_ = DomainKind::disk_exterior;
  d.radius_ = radius;
  return d;
}

Domain Domain::parabolic_cap(double s1, double truncation) {
  if (!(s1 >= 0.0)) throw ConfigInvalid("parabolic_cap: s1 must be >= 0");
  if (!(truncation > 0.0)) throw ConfigInvalid("parabolic_cap: truncation must be positive");
  Domain d;
  d.kind_ = DomainKind::parabolic_cap;
  d.s1_ = s1;
  d.r0_ = truncation;
  return d;
}

Domain Domain::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigInvalid(std::string("domain config is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw ConfigInvalid("domain config needs a string field \"kind\"");
  const std::string kind = j["kind"].get<std::string>();

  auto number = [&](const char* key, bool required, double fallback) {
    if (!j.contains(key)) {
      if (required) throw ConfigInvalid(std::string("domain config: missing \"") + key + "\"");
      return fallback;
    }
    if (!j[key].is_number())
      throw ConfigInvalid(std::string("domain config: \"") + key + "\" must be a number");
    return j[key].get<double>();
  };

  Domain d;
  if (kind == "half_line") {
    d = half_line();
  } else if (kind == "disk_interior") {
    d = disk_interior(number("radius", true, 0.0));
  } else if (kind == "disk_exterior") {
    d = disk_exterior(number("radius", true, 0.0));
  } else if (kind == "parabolic_cap") {
    d = parabolic_cap(number("s1", true, 0.0), number("truncation", false, 2.0));
  } else {
    throw ConfigInvalid("unknown domain kind: " + kind);
  }
  d.set_drift_bound(number("k_bound", false, 0.0));
  return d;
}

Domain Domain::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open domain config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

double Domain::cap_profile(double u) const {
  const double a = std::abs(u);
  if (a <= r0_) return -0.5 * s1_ * u * u;
  return -0.5 * s1_ * r0_ * r0_ - s1_ * r0_ * (a - r0_);
}

double Domain::cap_arc_length(double a, double b) const {
  const double c = s1_;
  if (c == 0.0) return b - a;
  auto antideriv = [&](double u) {
    const double m = std::abs(u);
    const double r = std::min(m, r0_);
    double al = 0.5 * (r * std::sqrt(1.0 + c * c * r * r) + std::asinh(c * r) / c);
    if (m > r0_) al += std::sqrt(1.0 + c * c * r0_ * r0_) * (m - r0_);
    return u >= 0.0 ? al : -al;
  };
  return antideriv(b) - antideriv(a);
}

std::pair<Vec2, double> Domain::nearest_boundary(Vec2 x) const {
  switch (kind_) {
    case DomainKind::half_line:
      return {{0.0, 0.0}, std::abs(x.x)};
    case DomainKind::disk_interior:
    case DomainKind::disk_exterior: {
      const double r = norm(x);
      if (r == 0.0) return {{radius_, 0.0}, radius_};
      return {(radius_ / r) * x, std::abs(r - radius_)};
    }
    case DomainKind::parabolic_cap:
      break;
  }

  const double c = s1_;
  if (c == 0.0) return {{x.x, 0.0}, std::abs(x.y)};

  Vec2 best{0.0, 0.0};
  double best_d2 = std::numeric_limits<double>::infinity();
  auto consider = [&](Vec2 p) {
    const double d2 = norm2(x - p);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = p;
    }
  };

  // stationary points on the parabola section: roots of the cubic
  //   u^3 + 2(1 + c x2)/c^2 u - 2 x1 / c^2 = 0
  double roots[3];
  const int n = solve_depressed_cubic(2.0 * (1.0 + c * x.y) / (c * c),
                                      -2.0 * x.x / (c * c), roots);
  for (int i = 0; i < n; ++i) {
    const double u = roots[i];
    if (std::abs(u) <= r0_) consider({u, -0.5 * c * u * u});
  }

  // the two linear tails, parameterised away from the joints
  const double w = std::sqrt(1.0 + c * c * r0_ * r0_);
  const Vec2 joint_r{r0_, -0.5 * c * r0_ * r0_};
  const Vec2 joint_l{-r0_, -0.5 * c * r0_ * r0_};
  const Vec2 dir_r = Vec2{1.0, -c * r0_} / w;
  const Vec2 dir_l = Vec2{-1.0, -c * r0_} / w;
  consider(joint_r + std::max(0.0, dot(x - joint_r, dir_r)) * dir_r);
  consider(joint_l + std::max(0.0, dot(x - joint_l, dir_l)) * dir_l);

  return {best, std::sqrt(best_d2)};
}

double Domain::signed_distance(Vec2 x) const {
  switch (kind_) {
    case DomainKind::half_line:
      return x.x;
    case DomainKind::disk_interior:
      return radius_ - norm(x);
    case DomainKind::disk_exterior:
      return norm(x) - radius_;
    case DomainKind::parabolic_cap: {
      const auto [p, d] = nearest_boundary(x);
      (void)p;
      return x.y >= cap_profile(x.x) ? d : -d;
    }
  }
  return 0.0;
}

bool Domain::contains(Vec2 x) const {
  switch (kind_) {
    case DomainKind::half_line: return x.x >= 0.0;
    case DomainKind::disk_interior: return norm2(x) <= radius_ * radius_;
    case DomainKind::disk_exterior: return norm2(x) >= radius_ * radius_;
    case DomainKind::parabolic_cap: return x.y >= cap_profile(x.x);
  }
  return false;
}

std::pair<Vec2, double> Domain::project_to_boundary(Vec2 x) const {
  const auto near = nearest_boundary(x);
  if (near.second > collar_width()) {
    std::ostringstream msg;
    msg << "project_to_boundary: point at distance " << near.second
        << " exceeds collar width " << collar_width();
    throw OutsideCollar(msg.str());
  }
  return near;
}

Vec2 Domain::inward_normal(Vec2 x) const {
  switch (kind_) {
    case DomainKind::half_line:
      if (std::abs(x.x) > collar_width())
        throw OutsideCollar("inward_normal: outside collar");
      return {1.0, 0.0};
    case DomainKind::disk_interior:
    case DomainKind::disk_exterior: {
      const double r = norm(x);
      if (std::abs(r - radius_) > collar_width())
        throw OutsideCollar("inward_normal: outside collar");
      const Vec2 out = x / r;  // r > 0 inside the collar
      return kind_ == DomainKind::disk_interior ? -1.0 * out : out;
    }
    case DomainKind::parabolic_cap: {
      const auto [p, d] = nearest_boundary(x);
      if (d > collar_width()) throw OutsideCollar("inward_normal: outside collar");
      if (d > 1e-12) {
        const double sgn = x.y >= cap_profile(x.x) ? 1.0 : -1.0;
        return (sgn / d) * (x - p);
      }
      const double u = p.x;
      const double slope = -s1_ * std::clamp(u, -r0_, r0_);
      const double w = std::sqrt(1.0 + slope * slope);
      return {-slope / w, 1.0 / w};
    }
  }
  return {1.0, 0.0};
}

double Domain::second_ff_lower_bound(Vec2 z) const {
  if (std::abs(signed_distance(z)) > kOnBoundaryTol)
    throw NotOnBoundary("second_ff_lower_bound: point is not on the boundary");
  switch (kind_) {
    case DomainKind::half_line: return 0.0;
    case DomainKind::disk_interior: return 1.0 / radius_;
    case DomainKind::disk_exterior: return -1.0 / radius_;
    case DomainKind::parabolic_cap: {
      const double u = z.x;
      if (std::abs(u) >= r0_) return 0.0;
      const double w2 = 1.0 + s1_ * s1_ * u * u;
      return -s1_ / (w2 * std::sqrt(w2));
    }
  }
  return 0.0;
}

double Domain::curvature_bound() const {
  switch (kind_) {
    case DomainKind::half_line:
    case DomainKind::disk_interior: return 0.0;
    case DomainKind::disk_exterior: return 1.0 / radius_;
    case DomainKind::parabolic_cap: return s1_;
  }
  return 0.0;
}

double Domain::min_curvature_radius() const {
  switch (kind_) {
    case DomainKind::half_line: return 1e30;
    case DomainKind::disk_interior:
    case DomainKind::disk_exterior: return radius_;
    case DomainKind::parabolic_cap: return s1_ > 0.0 ? 1.0 / s1_ : 1e30;
  }
  return 1e30;
}

double Domain::collar_width() const {
  return std::min(0.1 * min_curvature_radius(), 0.1);
}

std::vector<BoundaryPoint> Domain::boundary_sample(int n, uint64_t seed) const {
  if (n < 1) throw ConfigInvalid("boundary_sample: n must be >= 1");
  std::vector<BoundaryPoint> out;
  switch (kind_) {
    case DomainKind::half_line:
      out.push_back({{0.0, 0.0}, 1.0});
      return out;
    case DomainKind::disk_interior:
    case DomainKind::disk_exterior: {
      const double phase = seeded_offset(seed);
      const double weight = 2.0 * kPi * radius_ / n;
      out.reserve(n);
      for (int i = 0; i < n; ++i) {
        const double th = 2.0 * kPi * (i + phase) / n;
        out.push_back({{radius_ * std::cos(th), radius_ * std::sin(th)}, weight});
      }
      return out;
    }
    case DomainKind::parabolic_cap: {
      const double total = cap_arc_length(-r0_, r0_);
      const double phase = seeded_offset(seed);
      out.reserve(n);
      for (int i = 0; i < n; ++i) {
        const double target = total * (i + phase) / n;
        // invert arc length from the left joint; integrand >= 1 so
        // Newton from a linear guess converges in a few steps
        double u = -r0_ + std::min(target, 2.0 * r0_);
        for (int it = 0; it < 50; ++it) {
          const double f = cap_arc_length(-r0_, u) - target;
          const double df = std::sqrt(1.0 + s1_ * s1_ * u * u);
          const double step = f / df;
          u -= step;
          u = std::clamp(u, -r0_, r0_);
          if (std::abs(step) < 1e-14) break;
        }
        out.push_back({{u, cap_profile(u)}, total / n});
      }
      return out;
    }
  }
  return out;
}

}  // namespace nfl
