#pragma once

// Named experiment runner: binds the simulation, PDE, and transport modules
// into six reproducible scenarios driven by a JSON config, each emitting one
// CSV of per-time rows and one JSON summary with fitted rate constants and
// pass/fail bands. Reruns with the same config are byte-identical.

#include <optional>
#include <string>
#include <vector>

#include "nfl/feynman_kac.hpp"
#include "nfl/geometry.hpp"
#include "nfl/rbm.hpp"
#include "nfl/transport.hpp"
#include "nfl/vec.hpp"

namespace nfl {

enum class ExperimentKind {
  localtime,        // E[boundary local time] vs t, power-law fit
  kernel_validate,  // half-line solver against the closed-form heat kernel
  gradbound,        // PDE gradient at a contact point vs stochastic bound
  sharpness,        // boundary difference quotients vs the sqrt-rate bound
  transport,        // Wasserstein contraction ratios under the heat flow
  convex_contrast,  // Lipschitz non-expansion on a convex domain
};

const char* to_string(ExperimentKind k);
ExperimentKind experiment_from_string(const std::string& name);

// name, one-line description — what `nfl list-experiments` prints
std::vector<std::pair<std::string, std::string>> list_experiments();

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::localtime;
  Domain domain;
  SimConfig sim;
  std::vector<double> t_grid;
  RateModel rate;          // S, K, C, horizon t0
  std::string output;      // path prefix: writes <output>.csv, <output>.json

  Vec2 x0{0.0, 0.0};       // start / contact point (localtime, gradbound)
  double q = 1.0;          // Wasserstein exponent (transport)
  double probe_scale = 4.0;  // probe arc radius = probe_scale * sqrt(t)
  double eps = 0.05;       // slack in the sharpness lower bound
  double delta = 0.0;      // additive sqrt(t) slack in the same bound
  double h = 0.0;          // grid spacing; 0 = per-experiment default
  double length = 12.0;    // half-line grid length (kernel_validate)
  int steps = 0;           // time steps per solve; 0 = per-experiment default
  double h_max = 0.0;              // spacing cap; 0 = per-experiment default
  int points_per_sqrt_t = 16;      // resolution of the diffusion scale
  double cutoff_c = 0.0;           // bump cutoff; 0 = auto from probe range
  double dirac_arc = 0.01;         // boundary arc between default Dirac pairs
  bool scale_dt_with_t = true;     // keep steps-per-horizon constant over t_grid
  std::optional<DiscreteMeasure> mu, nu;  // transport inputs (else Dirac pair)

  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
  void validate() const;  // throws ConfigInvalid
};

struct Band {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;
  bool pass = false;
};

struct ExperimentReport {
  std::string experiment;
  double S_hat = 0.0;
  double C_hat = 0.0;
  std::vector<std::pair<std::string, double>> fitted_extra;
  std::vector<Band> bands;
  bool pass = true;
  std::string csv_path;
  std::string json_path;
};

// Runs the experiment, writes <output>.csv and <output>.json, and returns
// the summary. Deterministic for a fixed config (including thread count
// changes). Module errors propagate with the experiment name prefixed.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

}  // namespace nfl
