#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nfl/geometry.hpp"
#include "nfl/vec.hpp"

namespace nfl {

// The simulated process has generator Delta (not Delta/2): each Euler step
// adds sqrt(2 dt) * N(0, I). Started on the boundary of the half line its
// boundary local time satisfies E l_t = 2 sqrt(t / pi).
//
// Two local-time estimators are provided and must never be merged:
//   pushback      accumulate the projection distances of steps that land
//                 outside the domain (the position is snapped back to the
//                 nearest boundary point);
//   penalization  (1/eps) * occupation time of the band {0 < sdf <= eps},
//                 computed from the positions after the fact. The band is
//                 open at 0: projected steps sit exactly on the boundary,
//                 an atom the continuous path does not have. The mean-level
//                 estimators extrapolate the band functional linearly from
//                 widths eps and 2*eps to remove its O(eps) bias; pick eps
//                 a few multiples of the step displacement sqrt(2*dt).

enum class Scheme { pushback, penalization };

struct SimConfig {
  double dt = 1e-4;
  int64_t n_paths = 1000;
  uint64_t seed = 0;
  Scheme scheme = Scheme::pushback;
  // Band width for the penalization estimator; 0 means sqrt(dt).
  double penalization_epsilon = 0.0;
  int threads = 0;  // 0 = NFL_THREADS / hardware
};

struct StepResult {
  Vec2 position;
  double pushback;  // projection distance, 0 if the proposal stayed inside
  bool contact;
};

// One Euler step with projection. `noise` is a standard normal pair
// (second component ignored on 1-D domains). Throws StepOutOfCollar when
// the proposal exits by more than the collar width or moves farther than
// a quarter of the minimal curvature radius in one step: both indicate
// dt too large for the geometry, making the projection unreliable.
StepResult step(const Domain& dom, Vec2 x, double dt, Vec2 noise);

struct TrajectoryWithLocalTime {
  double dt = 0.0;
  std::vector<double> times;      // 0 = t_0 < ... < t_m = t
  std::vector<Vec2> positions;    // same size, positions[0] = start
  std::vector<double> local_time; // cumulative pushback, [0] = 0
  std::vector<char> contact;      // contact[k]: step k-1 -> k touched

  double final_local_time() const { return local_time.back(); }
};

// Full trajectory with the pushback local time attached. Takes
// ceil(t / cfg.dt) steps (at least 1), with dt adjusted to divide t.
// Deterministic in (cfg.seed, path_index).
TrajectoryWithLocalTime simulate_path(const Domain& dom, Vec2 x0, double t,
                                      const SimConfig& cfg,
                                      uint64_t path_index = 0);

// Debug dump, columns t,x1,x2,ell,contact.
void write_trajectory_csv(const TrajectoryWithLocalTime& traj,
                          const std::string& path);

// Penalization estimate recomputed from the stored positions:
// sum over steps of dt * (1/eps) * [0 < sdf(position) <= eps].
double penalization_local_time(const TrajectoryWithLocalTime& traj,
                               const Domain& dom, double eps);

struct MeanResult {
  double mean = 0.0;
  double stderr_ = 0.0;
  int64_t n = 0;
};

// Monte Carlo mean of the terminal local time over cfg.n_paths paths,
// estimator chosen by cfg.scheme. Deterministic in cfg.seed regardless
// of thread count; paths are streamed, nothing is stored.
MeanResult local_time_mean(const Domain& dom, Vec2 x0, double t,
                           const SimConfig& cfg);

// Both estimators on the same driving noise (shared paths, one pass).
struct DualMeanResult {
  MeanResult pushback;
  MeanResult penalization;
};
DualMeanResult dual_local_time_mean(const Domain& dom, Vec2 x0, double t,
                                    const SimConfig& cfg);

struct SupLocalTime {
  Vec2 argmax;
  MeanResult at_argmax;
  std::vector<std::pair<Vec2, MeanResult>> probes;
};

// Maximises E_z[l_t] over boundary probes (boundary_sample of the domain);
// the supremum over all starting points is attained on the boundary.
// Probes share driving noise, so their comparison is much tighter than
// each individual estimate.
SupLocalTime sup_local_time_mean(const Domain& dom, double t,
                                 const SimConfig& cfg, int n_probes);

// Time change between the two Brownian conventions: a process with
// generator Delta/2 run to time t sees the same law of (path, local time)
// as the generator-Delta process run to time t/2.
inline double convention_rescale(double t) { return 0.5 * t; }

// E_0[l_t] on the half line for the generator-Delta process, exact.
double halfline_local_time_mean_exact(double t);

}  // namespace nfl
