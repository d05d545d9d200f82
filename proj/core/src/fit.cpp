#include "nfl/fit.hpp"

#include <cmath>

#include "nfl/errors.hpp"

namespace nfl {
namespace {

// Least squares for v ~ c0 * phi0(t) + c1 * phi1(t) via the 2x2 normal
// equations; tiny systems, so no need for a matrix library here.
struct TwoTermFit {
  double c0 = 0.0, c1 = 0.0, residual = 0.0;
};

template <class F0, class F1, class G>
TwoTermFit fit_two_term(const std::vector<std::pair<double, double>>& pts,
                        F0 phi0, F1 phi1, G transform) {
  if (pts.size() < 3)
    throw SingularFit("fit: need at least 3 (t, value) pairs");
  double s00 = 0, s01 = 0, s11 = 0, b0 = 0, b1 = 0;
  for (const auto& [t, v] : pts) {
    const double y = transform(t, v);
    const double x0 = phi0(t), x1 = phi1(t);
    s00 += x0 * x0;
    s01 += x0 * x1;
    s11 += x1 * x1;
    b0 += x0 * y;
    b1 += x1 * y;
  }
  const double det = s00 * s11 - s01 * s01;
  const double scale = s00 * s11;
  if (!(std::abs(det) > 1e-12 * std::max(scale, 1e-300)))
    throw SingularFit("fit: design matrix is singular (collinear regressors)");
  TwoTermFit out;
  out.c0 = (b0 * s11 - b1 * s01) / det;
  out.c1 = (b1 * s00 - b0 * s01) / det;
  double ss = 0;
  for (const auto& [t, v] : pts) {
    const double r = transform(t, v) - out.c0 * phi0(t) - out.c1 * phi1(t);
    ss += r * r;
  }
  out.residual = std::sqrt(ss / pts.size());
  return out;
}

}  // namespace

SqrtRateFit fit_sqrt_rate(const std::vector<std::pair<double, double>>& pts) {
  for (const auto& [t, v] : pts) {
    if (!(t > 0.0)) throw SingularFit("fit_sqrt_rate: times must be positive");
    if (!(v > 0.0)) throw SingularFit("fit_sqrt_rate: values must be positive");
  }
  const TwoTermFit f = fit_two_term(
      pts, [](double t) { return std::sqrt(t); }, [](double t) { return t; },
      [](double, double v) { return std::log(v); });
  return {f.c0, f.c1, f.residual};
}

PowerFit power_fit(const std::vector<std::pair<double, double>>& pts) {
  for (const auto& [t, v] : pts) {
    if (!(t > 0.0)) throw SingularFit("power_fit: times must be positive");
    if (!(v > 0.0)) throw SingularFit("power_fit: values must be positive");
  }
  const TwoTermFit f = fit_two_term(
      pts, [](double) { return 1.0; }, [](double t) { return std::log(t); },
      [](double, double v) { return std::log(v); });
  return {f.c1, std::exp(f.c0), f.residual};
}

}  // namespace nfl
