#include "nfl/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "nfl/csv.hpp"
#include "nfl/feynman_kac.hpp"
#include "nfl/geodesic.hpp"
#include "nfl/parallel.hpp"

namespace nfl {

void DiscreteMeasure::validate(const Domain& dom) const {
  if (atoms.empty()) throw ConfigInvalid("measure: no atoms");
  if (atoms.size() != weights.size())
    throw ConfigInvalid("measure: atom/weight count mismatch");
  double total = 0.0;
  for (size_t i = 0; i < atoms.size(); ++i) {
    if (!(weights[i] > 0.0))
      throw ConfigInvalid("measure: weights must be strictly positive");
    total += weights[i];
    if (dom.signed_distance(atoms[i]) < -1e-9)
      throw ConfigInvalid("measure: atom outside the closed domain");
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ConfigInvalid("measure: weights must sum to 1 within 1e-12");
}

DiscreteMeasure read_measure_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open measure file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigInvalid("empty measure file: " + path);
  DiscreteMeasure mu;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double x, y, w;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &w) != 3)
      throw ConfigInvalid("bad measure row: " + line);
    mu.atoms.push_back({x, y});
    mu.weights.push_back(w);
  }
  return mu;
}

void write_measure_csv(const DiscreteMeasure& mu, const std::string& path) {
  CsvWriter csv(path);
  csv.header({"x1", "x2", "weight"});
  for (size_t i = 0; i < mu.atoms.size(); ++i)
    csv.row({mu.atoms[i].x, mu.atoms[i].y, mu.weights[i]});
}

namespace {

// Transportation problem by successive shortest augmenting paths with node
// potentials. Sources 0..n-1, sinks 0..m-1; forward arcs have unlimited
// capacity, so the residual graph is the complete bipartite graph plus the
// reversals of arcs that carry flow. Exact up to floating-point rounding.
struct FlowSolver {
  int n, m;
  const std::vector<double>& cost;  // n*m, row-major
  std::vector<double> flow;
  std::vector<double> supply, deficit;
  std::vector<double> pot;  // node potentials, sources then sinks

  FlowSolver(int n_, int m_, const std::vector<double>& c,
             const std::vector<double>& s, const std::vector<double>& d)
      : n(n_), m(m_), cost(c), flow(static_cast<size_t>(n_) * m_, 0.0),
        supply(s), deficit(d), pot(n_ + m_, 0.0) {}

  double c(int i, int j) const { return cost[static_cast<size_t>(i) * m + j]; }
  double& f(int i, int j) { return flow[static_cast<size_t>(i) * m + j]; }

  void run() {
    constexpr double kExhausted = 1e-14;
    const double inf = std::numeric_limits<double>::infinity();
    const int N = n + m;
    std::vector<double> dist(N);
    std::vector<int> parent(N);
    std::vector<char> done(N);

    const long max_rounds = 1000 + 50L * N * N;
    for (long round = 0;; ++round) {
      if (round > max_rounds)
        throw NonConvergent("wasserstein: augmentation failed to terminate");
      bool have_supply = false;
      for (int i = 0; i < n; ++i)
        if (supply[i] > kExhausted) { have_supply = true; break; }
      bool have_deficit = false;
      for (int j = 0; j < m; ++j)
        if (deficit[j] > kExhausted) { have_deficit = true; break; }
      if (!have_supply || !have_deficit) break;

      // multi-source Dijkstra on reduced costs, dense (no heap needed at
      // this size)
      std::fill(dist.begin(), dist.end(), inf);
      std::fill(parent.begin(), parent.end(), -1);
      std::fill(done.begin(), done.end(), 0);
      for (int i = 0; i < n; ++i)
        if (supply[i] > kExhausted) dist[i] = 0.0;

      for (int it = 0; it < N; ++it) {
        int u = -1;
        double best = inf;
        for (int v = 0; v < N; ++v)
          if (!done[v] && dist[v] < best) { best = dist[v]; u = v; }
        if (u < 0) break;
        done[u] = 1;
        if (u < n) {
          const int i = u;
          for (int j = 0; j < m; ++j) {
            const double w = std::max(0.0, c(i, j) + pot[i] - pot[n + j]);
            if (dist[i] + w < dist[n + j]) {
              dist[n + j] = dist[i] + w;
              parent[n + j] = i;
            }
          }
        } else {
          const int j = u - n;
          for (int i = 0; i < n; ++i) {
            if (f(i, j) <= 0.0) continue;
            const double w = std::max(0.0, -c(i, j) + pot[n + j] - pot[i]);
            if (dist[n + j] + w < dist[i]) {
              dist[i] = dist[n + j] + w;
              parent[i] = n + j;
            }
          }
        }
      }

      int target = -1;
      double tdist = inf;
      for (int j = 0; j < m; ++j)
        if (deficit[j] > kExhausted && dist[n + j] < tdist) {
          tdist = dist[n + j];
          target = j;
        }
      if (target < 0)
        throw DisconnectedSupport("wasserstein: no augmenting path between supports");

      for (int v = 0; v < N; ++v) pot[v] += std::min(dist[v], tdist);

      // bottleneck along the parent chain
      double delta = deficit[target];
      int head = -1;
      for (int v = n + target; v >= 0;) {
        const int p = parent[v];
        if (p < 0) { head = v; break; }
        if (v >= n) {  // forward arc p -> v: unlimited
        } else {       // backward arc p(sink) -> v(source): bounded by flow
          delta = std::min(delta, f(v, p - n));
        }
        v = p;
      }
      delta = std::min(delta, supply[head]);

      supply[head] -= delta;
      deficit[target] -= delta;
      for (int v = n + target; v != head;) {
        const int p = parent[v];
        if (v >= n) f(p, v - n) += delta;
        else f(v, p - n) -= delta;
        v = p;
      }
    }
  }
};

std::vector<double> cost_matrix(const DiscreteMeasure& mu,
                                const DiscreteMeasure& nu, double q,
                                const Domain& dom) {
  const int n = static_cast<int>(mu.atoms.size());
  const int m = static_cast<int>(nu.atoms.size());
  std::vector<double> c(static_cast<size_t>(n) * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const double d = intrinsic_distance(dom, mu.atoms[i], nu.atoms[j]);
      if (!std::isfinite(d))
        throw DisconnectedSupport("wasserstein: supports in different components");
      c[static_cast<size_t>(i) * m + j] = std::pow(d, q);
    }
  return c;
}

}  // namespace

TransportResult wasserstein_with_plan(const DiscreteMeasure& mu,
                                      const DiscreteMeasure& nu, double q,
                                      const Domain& dom) {
  if (!(q >= 1.0)) throw ConfigInvalid("wasserstein: q must be >= 1");
  mu.validate(dom);
  nu.validate(dom);
  const int n = static_cast<int>(mu.atoms.size());
  const int m = static_cast<int>(nu.atoms.size());
  if (n + m > 512)
    throw TooManyAtoms("wasserstein: exact solver accepts at most 512 atoms");

  const std::vector<double> c = cost_matrix(mu, nu, q, dom);
  FlowSolver solver(n, m, c, mu.weights, nu.weights);
  solver.run();

  TransportResult out;
  double value = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const double f = solver.flow[static_cast<size_t>(i) * m + j];
      if (f > 1e-15) {
        out.plan.push_back({i, j, f});
        value += f * c[static_cast<size_t>(i) * m + j];
      }
    }
  out.value = std::pow(std::max(value, 0.0), 1.0 / q);
  return out;
}

double wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                   double q, const Domain& dom) {
  return wasserstein_with_plan(mu, nu, q, dom).value;
}

DiscreteMeasure evolve_measure(const Domain& dom, const DiscreteMeasure& mu,
                               double t, const SimConfig& cfg) {
  mu.validate(dom);
  if (t < 0.0) throw ConfigInvalid("evolve_measure: t must be >= 0");
  if (t == 0.0) return mu;
  if (cfg.n_paths < 1) throw ConfigInvalid("evolve_measure: n_paths must be >= 1");

  const int64_t na = static_cast<int64_t>(mu.atoms.size());
  const int64_t total = na * cfg.n_paths;
  DiscreteMeasure out;
  out.atoms.resize(total);
  out.weights.resize(total);
  parallel_for(total, [&](int64_t lo, int64_t hi) {
    for (int64_t k = lo; k < hi; ++k) {
      const int64_t atom = k / cfg.n_paths;
      const auto traj = simulate_path(dom, mu.atoms[atom], t, cfg, k);
      out.atoms[k] = traj.positions.back();
      out.weights[k] = mu.weights[atom] / cfg.n_paths;
    }
  }, cfg.threads);
  return out;
}

std::vector<ContractionRow> contraction_check(
    const Domain& dom, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
    const std::vector<double>& t_grid, double q, const RateModel& rate,
    const SimConfig& cfg) {
  const TransportResult base = wasserstein_with_plan(mu, nu, q, dom);
  if (!(base.value > 0.0))
    throw DegenerateInput("contraction_check: measures coincide (W = 0)");
  rate.validate();
  if (cfg.n_paths < 1) throw ConfigInvalid("contraction_check: n_paths must be >= 1");

  const int64_t entries = static_cast<int64_t>(base.plan.size());
  const int64_t pairs = entries * cfg.n_paths;
  if (2 * pairs > 512)
    throw TooManyAtoms(
        "contraction_check: plan entries * n_paths exceeds the exact solver "
        "budget; lower n_paths");

  const int batches = static_cast<int>(std::min<int64_t>(8, cfg.n_paths));
  std::vector<ContractionRow> rows;

  for (const double t : t_grid) {
    if (!(t > 0.0)) throw ConfigInvalid("contraction_check: t_grid must be positive");
    std::vector<Vec2> end_mu(pairs), end_nu(pairs);
    parallel_for(pairs, [&](int64_t lo, int64_t hi) {
      for (int64_t k = lo; k < hi; ++k) {
        const PlanEntry& e = base.plan[k / cfg.n_paths];
        // the pair shares one noise stream: coupled reflected paths
        end_mu[k] = simulate_path(dom, mu.atoms[e.from], t, cfg, k).positions.back();
        end_nu[k] = simulate_path(dom, nu.atoms[e.to], t, cfg, k).positions.back();
      }
    }, cfg.threads);

    auto cloud = [&](const std::vector<Vec2>& ends, int64_t klo, int64_t khi) {
      DiscreteMeasure m;
      const int64_t span = khi - klo;
      double total = 0.0;
      for (int64_t e = 0; e < entries; ++e)
        for (int64_t k = klo; k < khi; ++k) {
          m.atoms.push_back(ends[e * cfg.n_paths + k]);
          m.weights.push_back(base.plan[e].mass / span);
          total += m.weights.back();
        }
      // the plan can undershoot unit mass by the augmentation slack;
      // renormalize so the empirical measures are exactly probability ones
      for (double& w : m.weights) w /= total;
      return m;
    };

    const DiscreteMeasure mu_t = cloud(end_mu, 0, cfg.n_paths);
    const DiscreteMeasure nu_t = cloud(end_nu, 0, cfg.n_paths);
    const double ratio = wasserstein(mu_t, nu_t, q, dom) / base.value;

    double se = 0.0;
    if (batches > 1) {
      std::vector<double> batch_ratio(batches);
      for (int b = 0; b < batches; ++b) {
        const int64_t klo = b * cfg.n_paths / batches;
        const int64_t khi = (b + 1) * cfg.n_paths / batches;
        batch_ratio[b] =
            wasserstein(cloud(end_mu, klo, khi), cloud(end_nu, klo, khi), q, dom) /
            base.value;
      }
      double mean = 0.0;
      for (const double r : batch_ratio) mean += r;
      mean /= batches;
      double ss = 0.0;
      for (const double r : batch_ratio) ss += (r - mean) * (r - mean);
      se = std::sqrt(ss / (batches - 1)) / std::sqrt(double(batches));
    }

    rows.push_back({t, ratio, rate_bound(rate, t), se});
  }
  return rows;
}

void write_contraction_csv(const std::vector<ContractionRow>& rows,
                           const std::string& path) {
  CsvWriter csv(path);
  csv.header({"t", "ratio", "bound", "stderr"});
  for (const auto& r : rows) csv.row({r.t, r.ratio, r.bound, r.stderr_});
}

}  // namespace nfl
