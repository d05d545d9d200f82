#pragma once

#include <utility>
#include <vector>

#include "nfl/errors.hpp"

namespace nfl {

struct SqrtRateFit {
  double a = 0.0;         // coefficient of sqrt(t)
  double b = 0.0;         // coefficient of t
  double residual = 0.0;  // rms of log residuals
  // the boundary-rate constant implied by the slope: S = a * sqrt(pi) / 2
  double S_hat() const { return a * 0.8862269254527580; }
};

// Least squares for log(value) = a sqrt(t) + b t. No constant term: all
// fitted quantities equal 1 at t = 0 by construction, so intercept-free
// fitting forces small-t growth into the sqrt(t) coefficient.
// Throws SingularFit on fewer than 3 pairs or a collinear design.
SqrtRateFit fit_sqrt_rate(const std::vector<std::pair<double, double>>& pairs);

struct PowerFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double residual = 0.0;
};

// Least squares for log(value) = log(prefactor) + exponent * log(t).
PowerFit power_fit(const std::vector<std::pair<double, double>>& pairs);

}  // namespace nfl
