#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ucmin/problems.hpp"
#include "ucmin/proxmap.hpp"
#include "ucmin/types.hpp"

namespace ucmin {

// ---------------------------------------------------------------------------
// Single-stage dual averaging
// ---------------------------------------------------------------------------

struct DAConfig {
  long long iterations = 0;  // N; the run makes exactly N+1 oracle queries
  // constant gain: beta_i = gamma sqrt(N+1) for all i (default), or an
  // explicit nondecreasing schedule beta_0..beta_{N+1}
  double gamma = 1.0;
  std::optional<std::vector<double>> beta_schedule;
  std::optional<std::vector<double>> lambda_schedule;  // default all ones
  bool record_iterates = false;   // keep (x_i, g_i) for certificate checks
  bool collect_witnesses = false; // keep dual witnesses when supplied
};

struct DAIterate {
  Vec x;
  Vec g;
  double lambda;
  double beta;  // beta_i used when producing x_i (beta_0 := beta_1)
};

struct DAState {
  Vec center;       // x-bar
  double radius;    // R
  Vec s;            // accumulated scaled (observed) subgradients
  Vec s_exact;      // same with exact subgradients when available
  Vec x;            // last iterate
  double weight_total = 0.0;
  double sum_inner = 0.0;        // sum lambda_i <g_i, x_i - xbar>
  double sum_inner_exact = 0.0;  // with exact subgradients when available
  bool have_exact = false;
  long long k = -1;              // last completed iteration index
  double beta_last = 0.0;        // beta_{k+1}
};

struct DARun {
  Vec x_out;
  DAState state;
  long long oracle_calls = 0;
  std::optional<double> delta_observed;  // gap value from observed g
  std::optional<double> delta_exact;     // gap value from exact subgradients
  std::optional<double> best_value;      // best observed f(x_i)
  std::optional<Vec> best_iterate;
  std::vector<DAIterate> iterates;       // when record_iterates
  std::vector<Vec> witnesses;            // when collect_witnesses
};

// Runs dual averaging on min f over Q ∩ B_R(center): x_0 = center,
// s_{k+1} = s_k + lambda_k g_k, x_{k+1} = prox(-s_{k+1}) with gain
// beta_{k+1}; returns the lambda-weighted average of x_0..x_N.
DARun da_run(FirstOrderOracle& oracle, const LocalProblem& lp,
             const DAConfig& cfg);

// Gap value delta_k = (sum lambda)^{-1} [ sum_i lambda_i <g_i, x_i - xbar>
// + max_{x in Q_R(xbar)} <-s_{k+1}, x - xbar> ]; needs an exact support
// function for the geometry.
double gap_value(const DAState& state, const LocalProblem& lp);
double gap_value_exact(const DAState& state, const LocalProblem& lp);

// ---------------------------------------------------------------------------
// Closed-form bounds
// ---------------------------------------------------------------------------

struct TheoreticalBounds {
  double gamma_star = 0.0;
  double f_gap_bound = 0.0;
  double dist_pow_bound = 0.0;  // bound on ||x_out - x*||^rho
  std::optional<double> confidence_term;
};

// A(d)-route when r is absent, quadratic-growth C(d)-route when r is given;
// sigma > 0 replaces L^2 by L^2 + sigma^2 everywhere; alpha adds the
// confidence term 2 R sigma sqrt(3 ln(1/alpha) / (N+1)).
TheoreticalBounds theoretical_bounds(const ConvexityParams& params,
                                     const ProxFunction& prox, double R,
                                     std::optional<double> r, long long N,
                                     std::optional<double> alpha = std::nullopt);

// ---------------------------------------------------------------------------
// Shared trace schema
// ---------------------------------------------------------------------------

struct StageRecord {
  int stage = 0;
  long long iters = 0;         // N_k of the stage
  long long oracle_calls = 0;  // cumulative after the stage
  double beta = 0.0;
  double radius = 0.0;
  std::optional<double> f_gap;
  std::optional<double> dist_to_opt;
  std::optional<double> delta_observed;
  std::optional<double> delta_exact;
  std::optional<std::string> note;
};

struct Trace {
  std::vector<StageRecord> stages;
  long long oracle_calls = 0;
  long long probe_calls = 0;  // value probes outside the iteration budget
};

}  // namespace ucmin
