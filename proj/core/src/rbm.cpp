#include "nfl/rbm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nfl/csv.hpp"
#include "nfl/parallel.hpp"
#include "nfl/rng.hpp"

namespace nfl {
namespace {

constexpr double kPi = 3.14159265358979323846;

struct StepsSpec {
  int64_t n = 1;
  double dt = 0.0;
};

StepsSpec resolve_steps(double t, double dt) {
  if (!(t > 0.0) || !(dt > 0.0)) throw ConfigInvalid("simulate: need t > 0 and dt > 0");
  StepsSpec s;
  s.n = std::max<int64_t>(1, static_cast<int64_t>(std::ceil(t / dt - 1e-9)));
  s.dt = t / static_cast<double>(s.n);
  return s;
}

[[noreturn]] void throw_out_of_collar(const char* what, double value, double limit) {
  std::ostringstream msg;
  msg << what << " " << value << " exceeds " << limit
      << "; dt is too large for this geometry";
  throw StepOutOfCollar(msg.str());
}

// Shared inner loop. per_step(position_after, pushback_increment) is
// invoked once per step; the return value is the terminal pushback
// local time. Kept in one place so the public step() and the streaming
// estimators cannot drift apart.
template <class F>
double run_path(const Domain& dom, Vec2 x0, const StepsSpec& spec, PathRng& rng,
                F&& per_step) {
  const bool planar = dom.dimension() == 2;
  const double scale = std::sqrt(2.0 * spec.dt);
  const double max_disp = 0.25 * dom.min_curvature_radius();
  const double collar = dom.collar_width();

  Vec2 x = x0;
  double ell = 0.0;
  for (int64_t k = 0; k < spec.n; ++k) {
    const double dx = scale * rng.normal();
    const double dy = planar ? scale * rng.normal() : 0.0;
    const double disp = planar ? std::sqrt(dx * dx + dy * dy) : std::abs(dx);
    if (disp > max_disp) throw_out_of_collar("step displacement", disp, max_disp);
    Vec2 y{x.x + dx, x.y + dy};
    double inc = 0.0;
    if (!dom.contains(y)) {
      const auto [p, d] = dom.nearest_boundary(y);
      if (d > collar) throw_out_of_collar("pushback distance", d, collar);
      y = p;
      inc = d;
    }
    ell += inc;
    x = y;
    per_step(x, inc);
  }
  return ell;
}

double resolve_eps(const SimConfig& cfg, double dt_eff) {
  return cfg.penalization_epsilon > 0.0 ? cfg.penalization_epsilon
                                        : std::sqrt(dt_eff);
}

// The occupation band is the half-open layer {0 < sdf <= eps}. Steps that
// were projected sit exactly on the boundary and form an atom at sdf = 0
// that the continuous path does not have; counting them would inflate the
// estimate by O(1). The lower cutoff sits above the projection tolerance
// (1e-10) so "exactly on the boundary" is robust to roundoff.
constexpr double kBandFloor = 1e-9;

bool in_band(double sdf, double eps) { return sdf > kBandFloor && sdf <= eps; }

// Per-path penalization estimate. The target functional is the eps -> 0
// limit of (1/eps) * time spent in the band; at any fixed eps the band
// average carries an O(eps) bias (the occupation density is not constant
// across the band), so the limit is taken by linear extrapolation from
// the two widths eps and 2*eps measured on the same path. The width
// should be a few multiples of the step displacement sqrt(2*dt) so that
// the band resolves several states per crossing.
struct BandAccumulator {
  double eps = 0.0;
  double occ1 = 0.0;  // time in {0 < sdf <= eps}
  double occ2 = 0.0;  // time in {0 < sdf <= 2*eps}
  void add(double sdf, double dt) {
    if (!in_band(sdf, 2.0 * eps)) return;
    occ2 += dt;
    if (sdf <= eps) occ1 += dt;
  }
  double value() const { return (2.0 * occ1 - 0.5 * occ2) / eps; }
};

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

// Parallel loop over paths that surfaces the first worker exception.
template <class Body>
void for_each_path(int64_t n_paths, int threads, Body&& body) {
  std::exception_ptr failure;
  parallel_for(n_paths, [&](int64_t begin, int64_t end) {
    try {
      for (int64_t i = begin; i < end; ++i) body(i);
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
  }, threads);
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

StepResult step(const Domain& dom, Vec2 x, double dt, Vec2 noise) {
  if (!(dt > 0.0)) throw ConfigInvalid("step: dt must be positive");
  const bool planar = dom.dimension() == 2;
  const double scale = std::sqrt(2.0 * dt);
  const double dx = scale * noise.x;
  const double dy = planar ? scale * noise.y : 0.0;
  const double disp = planar ? std::sqrt(dx * dx + dy * dy) : std::abs(dx);
  const double max_disp = 0.25 * dom.min_curvature_radius();
  if (disp > max_disp) throw_out_of_collar("step displacement", disp, max_disp);
  const Vec2 y{x.x + dx, x.y + dy};
  if (dom.contains(y)) return {y, 0.0, false};
  const auto [p, d] = dom.nearest_boundary(y);
  if (d > dom.collar_width())
    throw_out_of_collar("pushback distance", d, dom.collar_width());
  return {p, d, true};
}

TrajectoryWithLocalTime simulate_path(const Domain& dom, Vec2 x0, double t,
                                      const SimConfig& cfg, uint64_t path_index) {
  const StepsSpec spec = resolve_steps(t, cfg.dt);
  TrajectoryWithLocalTime traj;
  traj.dt = spec.dt;
  traj.times.reserve(spec.n + 1);
  traj.positions.reserve(spec.n + 1);
  traj.local_time.reserve(spec.n + 1);
  traj.contact.reserve(spec.n + 1);
  traj.times.push_back(0.0);
  traj.positions.push_back(x0);
  traj.local_time.push_back(0.0);
  traj.contact.push_back(0);

  PathRng rng(cfg.seed, path_index);
  double cum = 0.0;
  int64_t k = 0;
  run_path(dom, x0, spec, rng, [&](Vec2 pos, double inc) {
    cum += inc;
    ++k;
    traj.times.push_back(static_cast<double>(k) * spec.dt);
    traj.positions.push_back(pos);
    traj.local_time.push_back(cum);
    traj.contact.push_back(inc > 0.0 ? 1 : 0);
  });
  traj.times.back() = t;  // kill the last rounding wobble
  return traj;
}

void write_trajectory_csv(const TrajectoryWithLocalTime& traj,
                          const std::string& path) {
  CsvWriter csv(path);
  csv.header({"t", "x1", "x2", "ell", "contact"});
  for (size_t i = 0; i < traj.times.size(); ++i)
    csv.row({traj.times[i], traj.positions[i].x, traj.positions[i].y,
             traj.local_time[i], static_cast<double>(traj.contact[i])});
}

double penalization_local_time(const TrajectoryWithLocalTime& traj,
                               const Domain& dom, double eps) {
  if (!(eps > 0.0)) throw ConfigInvalid("penalization_local_time: eps must be positive");
  if (traj.positions.size() < 2) throw DegenerateInput("penalization_local_time: empty trajectory");
  double occupation = 0.0;
  for (size_t k = 1; k < traj.positions.size(); ++k)
    if (in_band(dom.signed_distance(traj.positions[k]), eps)) occupation += traj.dt;
  return occupation / eps;
}

MeanResult local_time_mean(const Domain& dom, Vec2 x0, double t,
                           const SimConfig& cfg) {
  if (cfg.n_paths < 1) throw ConfigInvalid("local_time_mean: n_paths must be >= 1");
  const StepsSpec spec = resolve_steps(t, cfg.dt);
  const double eps = resolve_eps(cfg, spec.dt);
  const bool penal = cfg.scheme == Scheme::penalization;

  std::vector<double> values(cfg.n_paths);
  for_each_path(cfg.n_paths, cfg.threads, [&](int64_t i) {
    PathRng rng(cfg.seed, static_cast<uint64_t>(i));
    if (penal) {
      BandAccumulator acc{eps};
      run_path(dom, x0, spec, rng, [&](Vec2 pos, double) {
        acc.add(dom.signed_distance(pos), spec.dt);
      });
      values[i] = acc.value();
    } else {
      values[i] = run_path(dom, x0, spec, rng, [](Vec2, double) {});
    }
  });
  return summarize(values);
}

DualMeanResult dual_local_time_mean(const Domain& dom, Vec2 x0, double t,
                                    const SimConfig& cfg) {
  if (cfg.n_paths < 1) throw ConfigInvalid("dual_local_time_mean: n_paths must be >= 1");
  const StepsSpec spec = resolve_steps(t, cfg.dt);
  const double eps = resolve_eps(cfg, spec.dt);

  std::vector<double> push(cfg.n_paths), penal(cfg.n_paths);
  for_each_path(cfg.n_paths, cfg.threads, [&](int64_t i) {
    PathRng rng(cfg.seed, static_cast<uint64_t>(i));
    BandAccumulator acc{eps};
    push[i] = run_path(dom, x0, spec, rng, [&](Vec2 pos, double) {
      acc.add(dom.signed_distance(pos), spec.dt);
    });
    penal[i] = acc.value();
  });
  return {summarize(push), summarize(penal)};
}

SupLocalTime sup_local_time_mean(const Domain& dom, double t,
                                 const SimConfig& cfg, int n_probes) {
  SupLocalTime out;
  const auto probes = dom.boundary_sample(n_probes, cfg.seed);
  out.probes.reserve(probes.size());
  bool first = true;
  for (const auto& bp : probes) {
    const MeanResult r = local_time_mean(dom, bp.point, t, cfg);
    out.probes.emplace_back(bp.point, r);
    if (first || r.mean > out.at_argmax.mean) {
      out.argmax = bp.point;
      out.at_argmax = r;
      first = false;
    }
  }
  return out;
}

double halfline_local_time_mean_exact(double t) {
  return 2.0 * std::sqrt(t / kPi);
}

}  // namespace nfl
