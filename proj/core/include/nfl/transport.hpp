#pragma once

// Exact q-Wasserstein distances between small discrete measures, the
// particle heat flow on measures, and the transport-contraction experiment.
//
// wasserstein() is exact: it solves the transportation problem by
// successive shortest augmenting paths with node potentials, so the value
// matches brute-force plan enumeration to rounding error. The exactness
// contract is only honoured up to 512 combined atoms; larger inputs are
// rejected rather than silently approximated.

#include <cstdint>
#include <string>
#include <vector>

#include "nfl/errors.hpp"
#include "nfl/geometry.hpp"
#include "nfl/rbm.hpp"
#include "nfl/vec.hpp"

namespace nfl {

struct DiscreteMeasure {
  std::vector<Vec2> atoms;
  std::vector<double> weights;

  static DiscreteMeasure dirac(Vec2 x) { return {{x}, {1.0}}; }

  // weights strictly positive, summing to 1 within 1e-12; every atom in
  // the closed domain (sdf >= -1e-9). Throws ConfigInvalid otherwise.
  void validate(const Domain& dom) const;
};

// Load atoms from CSV with header x1,x2,weight.
DiscreteMeasure read_measure_csv(const std::string& path);
void write_measure_csv(const DiscreteMeasure& mu, const std::string& path);

// One entry of an optimal transport plan: moves mass from mu.atoms[from]
// to nu.atoms[to].
struct PlanEntry {
  int from = 0;
  int to = 0;
  double mass = 0.0;
};

struct TransportResult {
  double value = 0.0;  // W_q = (sum mass * d^q)^(1/q)
  std::vector<PlanEntry> plan;
};

// Exact q-Wasserstein distance with intrinsic-distance cost d_D(x,y)^q.
// Requires q >= 1 and at most 512 combined atoms (TooManyAtoms). Throws
// DisconnectedSupport if any pair is at infinite distance.
double wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                   double q, const Domain& dom);
TransportResult wasserstein_with_plan(const DiscreteMeasure& mu,
                                      const DiscreteMeasure& nu, double q,
                                      const Domain& dom);

// Particle representation of the Neumann heat flow acting on mu: each atom
// spawns cfg.n_paths reflected paths (streams i*n_paths+k, deterministic),
// and the endpoints carry weight w_i / n_paths. t = 0 returns mu unchanged.
DiscreteMeasure evolve_measure(const Domain& dom, const DiscreteMeasure& mu,
                               double t, const SimConfig& cfg);

struct RateModel;  // feynman_kac.hpp

struct ContractionRow {
  double t = 0.0;
  double ratio = 0.0;    // W_q(P_t mu, P_t nu) / W_q(mu, nu)
  double bound = 0.0;    // exp(2 S sqrt(t/pi) + (C + K) t)
  double stderr_ = 0.0;  // spread over 8 path-index batches
};

// Evolves both measures with coupled noise — path pairs are matched by the
// optimal plan between mu and nu and share one noise stream — and compares
// the exact transport ratio against the rate bound. Requires
// W_q(mu, nu) > 0 (DegenerateInput otherwise).
std::vector<ContractionRow> contraction_check(const Domain& dom,
                                              const DiscreteMeasure& mu,
                                              const DiscreteMeasure& nu,
                                              const std::vector<double>& t_grid,
                                              double q, const RateModel& rate,
                                              const SimConfig& cfg);

void write_contraction_csv(const std::vector<ContractionRow>& rows,
                           const std::string& path);

}  // namespace nfl
