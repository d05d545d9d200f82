#include "nfl/feynman_kac.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "nfl/parallel.hpp"
#include "nfl/rng.hpp"

namespace nfl {
namespace {

constexpr double kPi = 3.14159265358979323846;

MeanResult summarize(const std::vector<double>& values) {
  MeanResult r;
  r.n = static_cast<int64_t>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(r.n);
  if (r.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.stderr_ = std::sqrt(ss / static_cast<double>(r.n - 1) /
                          static_cast<double>(r.n));
  }
  return r;
}

}  // namespace

double sharp_rate(double S, double t) {
  if (!(S >= 0.0) || !(t >= 0.0)) throw ConfigInvalid("sharp_rate: need S >= 0, t >= 0");
  return std::exp(2.0 * S * std::sqrt(t / kPi));
}

double convex_rate(double K, double t) {
  if (!(t >= 0.0)) throw ConfigInvalid("convex_rate: need t >= 0");
  return std::exp(K * t);
}

double rate_bound(const RateModel& m, double t) {
  m.validate();
  return std::exp(2.0 * m.S * std::sqrt(t / kPi) + (m.C + m.K) * t);
}

double khasminskii_bound(double q, double S, double Lbar) {
  if (!(q > 1.0)) throw ConfigInvalid("khasminskii_bound: need q > 1");
  if (!(S >= 0.0) || !(Lbar >= 0.0))
    throw ConfigInvalid("khasminskii_bound: need S >= 0 and Lbar >= 0");
  if (S == 0.0) return 1.0;
  const double x = q * S * Lbar;
  if (x >= 1.0) {
    std::ostringstream msg;
    msg << "khasminskii_bound: q*S*Lbar = " << x << " >= 1, outside the validity window";
    throw RegimeExceeded(msg.str());
  }
  return std::pow(1.0 / (1.0 - x), 1.0 / q);
}

MeanResult exp_moment_mc(const Domain& dom, Vec2 x0, double q, double S,
                         double t, const SimConfig& cfg) {
  if (!(S >= 0.0)) throw ConfigInvalid("exp_moment_mc: need S >= 0");
  if (S == 0.0) {
    // every sample is exactly 1
    return {1.0, 0.0, cfg.n_paths};
  }
  // local-time samples by the configured scheme, shared driving noise
  const MeanResult ell = local_time_mean(dom, x0, t, cfg);
  if (q * S * ell.mean > 0.8) {
    std::ostringstream msg;
    msg << "exp_moment_mc: q*S*E[l] = " << q * S * ell.mean
        << " > 0.8, too close to the Khasminskii pole for a stable estimate";
    throw RegimeExceeded(msg.str());
  }

  std::vector<double> values(cfg.n_paths);
  const bool penal = cfg.scheme == Scheme::penalization;
  const double eps = cfg.penalization_epsilon;
  std::exception_ptr failure;
  parallel_for(cfg.n_paths, [&](int64_t begin, int64_t end) {
    try {
      for (int64_t i = begin; i < end; ++i) {
        const auto traj = simulate_path(dom, x0, t, cfg, static_cast<uint64_t>(i));
        const double l = penal
            ? penalization_local_time(traj, dom, eps > 0.0 ? eps : std::sqrt(traj.dt))
            : traj.final_local_time();
        values[i] = std::exp(q * S * l);
      }
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
  }, cfg.threads);
  if (failure) std::rethrow_exception(failure);
  return summarize(values);
}

BoundaryField domain_s_field(const Domain& dom) {
  // by value: the field must stay usable after the caller's domain object
  // goes out of scope (Domain is a small value type)
  return [dom](Vec2 z) { return dom.second_ff_lower_bound(z); };
}

MeanResult fk_gradient_bound(const Domain& dom, const VectorField& grad_f,
                             const BoundaryField& s_field, Vec2 x, double t,
                             const SimConfig& cfg) {
  if (!grad_f) throw ConfigInvalid("fk_gradient_bound: grad_f is empty");
  if (!s_field) throw ConfigInvalid("fk_gradient_bound: s_field is empty");
  const double k_term = dom.drift_bound() * t;

  std::vector<double> values(cfg.n_paths);
  std::exception_ptr failure;
  parallel_for(cfg.n_paths, [&](int64_t begin, int64_t end) {
    try {
      for (int64_t i = begin; i < end; ++i) {
        const auto traj = simulate_path(dom, x, t, cfg, static_cast<uint64_t>(i));
        double s_integral = 0.0;
        for (size_t k = 1; k < traj.positions.size(); ++k) {
          if (!traj.contact[k]) continue;
          const double dl = traj.local_time[k] - traj.local_time[k - 1];
          s_integral += s_field(traj.positions[k]) * dl;
        }
        values[i] = std::exp(-k_term - s_integral) * norm(grad_f(traj.positions.back()));
      }
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
  }, cfg.threads);
  if (failure) std::rethrow_exception(failure);
  return summarize(values);
}

}  // namespace nfl
