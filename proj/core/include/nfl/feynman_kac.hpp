#pragma once

#include <functional>

#include "nfl/geometry.hpp"
#include "nfl/rbm.hpp"

namespace nfl {

// Rate parameters of the comparison estimates: S bounds the boundary
// nonconvexity (s >= -S), k >= -K bounds the curvature term, C is the
// O(t) constant, t0 the validity window.
struct RateModel {
  double S = 0.0;
  double K = 0.0;
  double C = 0.0;
  double t0 = 1.0;

  void validate() const {
    if (!(S >= 0.0)) throw ConfigInvalid("RateModel: S must be >= 0");
    if (!(C >= 0.0)) throw ConfigInvalid("RateModel: C must be >= 0");
    if (!(t0 > 0.0)) throw ConfigInvalid("RateModel: t0 must be > 0");
  }
};

// Leading factor of the sharp gradient estimate: exp(2 S sqrt(t/pi)).
double sharp_rate(double S, double t);

// Convex-domain comparison rate exp(K t).
double convex_rate(double K, double t);

// Full comparison bound exp(2 S sqrt(t/pi) + (C + K) t).
double rate_bound(const RateModel& m, double t);

// Khasminskii envelope (1 / (1 - q S Lbar))^{1/q}, an upper bound for
// sup_x E_x[ exp(q S l_t) ]^{1/q} whenever q S Lbar < 1, where Lbar
// bounds sup_x E_x[l_t]. Throws RegimeExceeded at or past the pole.
double khasminskii_bound(double q, double S, double Lbar);

// MC estimate of E_x0[ exp(q S l_t) ]. Heavy-tailed near the Khasminskii
// pole: refuses (RegimeExceeded) when q S * (measured mean l) > 0.8.
MeanResult exp_moment_mc(const Domain& dom, Vec2 x0, double q, double S,
                         double t, const SimConfig& cfg);

using VectorField = std::function<Vec2(Vec2)>;
using BoundaryField = std::function<double(Vec2)>;

// The boundary curvature field of the domain itself, s(z).
BoundaryField domain_s_field(const Domain& dom);

// MC estimate of the probabilistic gradient bound
//   E_x[ exp(-k t - sum s(contact) dl) * |grad f|(B_t) ],
// an upper bound for |grad P_t f|(x). The local-time increment of each
// contact step is attributed to its projected boundary point; the
// curvature term uses the constant drift_bound of the domain.
MeanResult fk_gradient_bound(const Domain& dom, const VectorField& grad_f,
                             const BoundaryField& s_field, Vec2 x, double t,
                             const SimConfig& cfg);

}  // namespace nfl
