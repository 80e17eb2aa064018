#pragma once

#include "ucmin/da_core.hpp"

namespace ucmin {

// Largest integer strictly smaller than a (the restart schedules' floor).
long long strict_floor(double a);
// Ordinary round-down [a] (the adaptive schedules' floor).
long long floor_int(double a);

// ---------------------------------------------------------------------------
// Stage schedules
// ---------------------------------------------------------------------------

struct StageSpec {
  int k = 0;
  long long n_k = 0;   // inner DA iterations (stage makes n_k + 1 queries)
  double radius = 0.0; // prox ball radius of the stage
  double target = 0.0; // R_{k-1} (ball) or r_{k-1} (dilation) in the gain
  double gamma = 0.0;
};

struct StageSchedule {
  double tau = 1.0;
  std::vector<StageSpec> stages;
  double total_budget_bound = 0.0;  // closed-form call bound (eps mode)
};

// Shrinking-ball schedule for target accuracy eps.
StageSchedule schedule_ball_eps(const ConvexityParams& params,
                                const ProxFunction& prox, double R0,
                                double eps);
// Fixed-dilation (quadratic-growth) schedule for target accuracy eps.
StageSchedule schedule_dilation_eps(const ConvexityParams& params,
                                    const ProxFunction& prox, double R0,
                                    double eps);

// ---------------------------------------------------------------------------
// Restart runs
// ---------------------------------------------------------------------------

enum class RunMode { TargetAccuracy, FixedBudget };

struct RunParams {
  RunMode mode = RunMode::TargetAccuracy;
  double eps = 1e-3;      // TargetAccuracy
  long long budget = 0;   // FixedBudget: total oracle calls allowed
  ConvexityParams params;
  ProxSetup setup;
  Vec x0;
  double R0 = 1.0;        // >= ||x0 - x*|| (ball) / diameter of Q (dilation)
  bool stochastic = false;  // use L^2 + sigma^2 in schedules and gains
  bool collect_witnesses = false;  // final stage only
  bool record_iterates = false;    // final stage only
};

struct MultistageResult {
  Vec x_hat;
  Trace trace;
  std::vector<StageSpec> schedule;
  std::vector<Vec> stage_points;  // y_1..y_m
  std::vector<Vec> last_stage_witnesses;
  std::vector<DAIterate> last_stage_iterates;
  long long last_stage_queries = 0;  // N_m + 1
  std::optional<double> eps_certificate;
};

MultistageResult run_ball(FirstOrderOracle& oracle, const RunParams& rp);
MultistageResult run_fixed_dilation(FirstOrderOracle& oracle,
                                    const RunParams& rp);

// ---------------------------------------------------------------------------
// Adaptive runs (rho, mu_f unknown)
// ---------------------------------------------------------------------------

enum class AdaptiveVariant {
  Deterministic,           // shrinking balls, output argmin_k f(y_k)
  StocaFixedDilation,      // quadratic-growth prox, fixed R0, output y_m
  ConfidenceShrinkingBall  // shrinking balls, output y_m (certificate apart)
};

struct AdaptiveParams {
  long long budget = 0;  // total N
  ProxSetup setup;
  Vec x0;
  double R0 = 1.0;
  double L = 1.0;
  double sigma = 0.0;
  bool collect_witnesses = false;
};

MultistageResult run_adaptive(FirstOrderOracle& oracle, AdaptiveVariant variant,
                              const AdaptiveParams& ap);

// Confidence radius eps(N, alpha) of the shrinking-ball stochastic adaptive
// run, evaluated for caller-supplied convexity parameters.
double adaptive_s_certificate(long long N, long long N0, double rho,
                              double mu_f, double L, double sigma,
                              const ProxFunction& prox, double alpha);

// Stage count and per-stage iteration budget the adaptive variants use.
struct AdaptiveLayout {
  long long m = 0;
  long long n0 = 0;
};
AdaptiveLayout adaptive_layout(long long N, const ProxFunction& prox,
                               bool quadratic_growth);

}  // namespace ucmin
