#pragma once

#include <map>
#include <string>
#include <vector>

#include "ucmin/multistage.hpp"
#include "ucmin/primal_dual.hpp"

namespace ucmin {

// ---------------------------------------------------------------------------
// Experiment configuration (flat-section key = value text file)
// ---------------------------------------------------------------------------

enum class ProblemFamily { Power, Saddle };
enum class Scheme { Single, Ball, Dilation, Adaptive, Stoca, AdaptiveS };

struct ExperimentConfig {
  // [problem]
  ProblemFamily family = ProblemFamily::Power;
  int n = 2;
  double rho = 2.0;
  double q = 2.0;           // saddle
  std::string xstar = "zero";  // zero | center | vertex | comma list
  // [prox]
  ProxKind prox_kind = ProxKind::HalfSqEuclid;
  double p = 2.0;           // pnorm
  SetKind set_kind = SetKind::EuclideanBall;
  double set_radius = 1.0;
  double box_lo = -1.0;
  double box_hi = 1.0;
  // [algorithm]
  Scheme scheme = Scheme::Ball;
  RunMode mode = RunMode::TargetAccuracy;
  double eps = 1e-3;
  long long budget = 0;
  double r0 = 0.0;          // 0: derived from the geometry
  double alpha = 0.1;
  // [noise]
  NoiseKind noise_kind = NoiseKind::None;
  double sigma = 0.0;
  // [run]
  int trials = 1;
  std::uint64_t seed = 1;
  std::vector<long long> sweep;
  std::string out_dir = "out";
  int workers = 1;
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);
void validate_config(const ExperimentConfig& cfg);
std::string render_config(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Problem instantiation
// ---------------------------------------------------------------------------

struct ProblemInstance {
  ProxSetup setup;
  std::unique_ptr<PowerObjective> power;
  std::unique_ptr<SaddlePNorm> saddle;
  Vec x0;
  double r0 = 1.0;
  double f_star = 0.0;
  std::optional<Vec> x_star;
  ConvexityParams params;

  FirstOrderOracle& base_oracle();
  double value(const Vec& x) const;
};

ProblemInstance build_problem(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

struct TrialResult {
  int trial = 0;
  Trace trace;
  double final_gap = 0.0;
  double dist_to_opt = 0.0;
  long long oracle_calls = 0;
  std::optional<GapCertificate> pd_certificate;
  std::optional<double> eps_certificate;
  Vec x_hat;
  std::optional<Vec> w_bar;
};

// One seeded trial at the given budget/eps; `budget_override` (>0) replaces
// cfg.budget for sweeps.
TrialResult run_trial(const ExperimentConfig& cfg, int trial,
                      long long budget_override = 0);

struct ExperimentResult {
  std::vector<TrialResult> trials;
  long long budget = 0;
};

// Runs trials (optionally in parallel), writes traces.csv, summary.txt and
// the resolved config into cfg.out_dir. Returns the in-memory results.
std::vector<ExperimentResult> run_experiment(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Post-processing
// ---------------------------------------------------------------------------

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int excluded = 0;  // nonpositive gaps dropped
};
RateFit rate_fit(const std::vector<std::pair<double, double>>& n_gap_points);

struct CoverageResult {
  int violations = 0;
  double rate = 0.0;
  bool pass = false;
  double threshold = 0.0;
};
CoverageResult coverage_check(const std::vector<double>& gaps,
                              double certificate, double alpha);

// Log-log SVG of gap vs N with a theoretical overlay; writes <dir>/plot.svg
// and <dir>/sweep.csv. Throws on an empty sweep.
struct SweepPoint {
  long long budget;
  double mean_gap;
  double bound;
};
void emit_plots(const std::vector<SweepPoint>& sweep, const std::string& dir);

// CSV helpers (bit-exact float formatting, 17 significant digits)
std::string format_double(double v);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace ucmin
