#include "ucmin/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ucmin {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

[[noreturn]] void config_error(const std::string& field,
                               const std::string& msg) {
  throw std::invalid_argument("config field '" + field + "': " + msg);
}

double parse_num(const std::string& field, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing junk");
    return x;
  } catch (...) {
    config_error(field, "not a number: '" + v + "'");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::string section;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected key = value, got '" + line +
                                  "'");
    }
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (key == "problem.family") {
      if (val == "power") {
        cfg.family = ProblemFamily::Power;
      } else if (val == "saddle") {
        cfg.family = ProblemFamily::Saddle;
      } else {
        config_error(key, "expected power|saddle");
      }
    } else if (key == "problem.n") {
      cfg.n = static_cast<int>(parse_num(key, val));
    } else if (key == "problem.rho") {
      cfg.rho = parse_num(key, val);
    } else if (key == "problem.q") {
      cfg.q = parse_num(key, val);
    } else if (key == "problem.xstar") {
      cfg.xstar = val;
    } else if (key == "prox.kind") {
      if (val == "euclid") {
        cfg.prox_kind = ProxKind::HalfSqEuclid;
      } else if (val == "entropy") {
        cfg.prox_kind = ProxKind::EntropySym;
      } else if (val == "pnorm") {
        cfg.prox_kind = ProxKind::PNormSq;
      } else {
        config_error(key, "expected euclid|entropy|pnorm");
      }
    } else if (key == "prox.p") {
      cfg.p = parse_num(key, val);
    } else if (key == "prox.set") {
      if (val == "fullspace") {
        cfg.set_kind = SetKind::FullSpace;
      } else if (val == "ball") {
        cfg.set_kind = SetKind::EuclideanBall;
      } else if (val == "simplex") {
        cfg.set_kind = SetKind::Simplex;
      } else if (val == "l1ball") {
        cfg.set_kind = SetKind::L1Ball;
      } else if (val == "box") {
        cfg.set_kind = SetKind::Box;
      } else {
        config_error(key, "expected fullspace|ball|simplex|l1ball|box");
      }
    } else if (key == "prox.radius") {
      cfg.set_radius = parse_num(key, val);
    } else if (key == "prox.box_lo") {
      cfg.box_lo = parse_num(key, val);
    } else if (key == "prox.box_hi") {
      cfg.box_hi = parse_num(key, val);
    } else if (key == "algorithm.scheme") {
      if (val == "single") {
        cfg.scheme = Scheme::Single;
      } else if (val == "ball") {
        cfg.scheme = Scheme::Ball;
      } else if (val == "dilation") {
        cfg.scheme = Scheme::Dilation;
      } else if (val == "adaptive") {
        cfg.scheme = Scheme::Adaptive;
      } else if (val == "stoca") {
        cfg.scheme = Scheme::Stoca;
      } else if (val == "adaptive_s") {
        cfg.scheme = Scheme::AdaptiveS;
      } else {
        config_error(key, "expected single|ball|dilation|adaptive|stoca|adaptive_s");
      }
    } else if (key == "algorithm.mode") {
      if (val == "eps") {
        cfg.mode = RunMode::TargetAccuracy;
      } else if (val == "budget") {
        cfg.mode = RunMode::FixedBudget;
      } else {
        config_error(key, "expected eps|budget");
      }
    } else if (key == "algorithm.eps") {
      cfg.eps = parse_num(key, val);
    } else if (key == "algorithm.budget") {
      cfg.budget = static_cast<long long>(parse_num(key, val));
    } else if (key == "algorithm.r0") {
      cfg.r0 = parse_num(key, val);
    } else if (key == "algorithm.alpha") {
      cfg.alpha = parse_num(key, val);
    } else if (key == "noise.kind") {
      if (val == "none") {
        cfg.noise_kind = NoiseKind::None;
      } else if (val == "ball") {
        cfg.noise_kind = NoiseKind::BoundedDualBall;
      } else if (val == "gaussian") {
        cfg.noise_kind = NoiseKind::SubGaussian;
      } else {
        config_error(key, "expected none|ball|gaussian");
      }
    } else if (key == "noise.sigma") {
      cfg.sigma = parse_num(key, val);
    } else if (key == "run.trials") {
      cfg.trials = static_cast<int>(parse_num(key, val));
    } else if (key == "run.seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_num(key, val));
    } else if (key == "run.sweep") {
      cfg.sweep.clear();
      if (!val.empty()) {
        for (const std::string& tok : split(val, ',')) {
          if (tok.empty()) continue;
          cfg.sweep.push_back(static_cast<long long>(parse_num(key, tok)));
        }
      }
    } else if (key == "run.out") {
      cfg.out_dir = val;
    } else if (key == "run.workers") {
      cfg.workers = static_cast<int>(parse_num(key, val));
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  return parse_config_text(read_text_file(path));
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n < 1) config_error("problem.n", "must be >= 1");
  if (cfg.rho < 2.0) config_error("problem.rho", "must be >= 2");
  if (cfg.family == ProblemFamily::Saddle && cfg.q < 2.0) {
    config_error("problem.q", "must be >= 2");
  }
  if (cfg.prox_kind == ProxKind::PNormSq && (cfg.p <= 1.0 || cfg.p > 2.0)) {
    config_error("prox.p", "must lie in (1, 2]");
  }
  if (cfg.set_kind != SetKind::FullSpace && cfg.set_kind != SetKind::Simplex &&
      cfg.set_kind != SetKind::Box && cfg.set_radius <= 0.0) {
    config_error("prox.radius", "must be > 0");
  }
  if (cfg.set_kind == SetKind::Box && cfg.box_hi < cfg.box_lo) {
    config_error("prox.box_hi", "must be >= box_lo");
  }
  if (cfg.mode == RunMode::TargetAccuracy && cfg.eps <= 0.0) {
    config_error("algorithm.eps", "must be > 0");
  }
  if (cfg.mode == RunMode::FixedBudget && cfg.budget < 1 && cfg.sweep.empty()) {
    config_error("algorithm.budget", "must be >= 1 (or give run.sweep)");
  }
  if ((cfg.scheme == Scheme::AdaptiveS) &&
      (cfg.alpha <= 0.0 || cfg.alpha >= 1.0)) {
    config_error("algorithm.alpha", "must lie in (0,1)");
  }
  if (cfg.noise_kind != NoiseKind::None && cfg.sigma < 0.0) {
    config_error("noise.sigma", "must be >= 0");
  }
  if (cfg.trials < 1) config_error("run.trials", "must be >= 1");
  if (cfg.workers < 1) config_error("run.workers", "must be >= 1");
  const bool adaptive_scheme = cfg.scheme == Scheme::Adaptive ||
                               cfg.scheme == Scheme::Stoca ||
                               cfg.scheme == Scheme::AdaptiveS;
  if (adaptive_scheme && cfg.mode == RunMode::TargetAccuracy) {
    config_error("algorithm.mode",
                 "adaptive schemes are fixed-budget only (mode = budget)");
  }
}

std::string render_config(const ExperimentConfig& cfg) {
  std::stringstream ss;
  ss << "[problem]\n";
  ss << "family = "
     << (cfg.family == ProblemFamily::Power ? "power" : "saddle") << "\n";
  ss << "n = " << cfg.n << "\n";
  ss << "rho = " << format_double(cfg.rho) << "\n";
  ss << "q = " << format_double(cfg.q) << "\n";
  ss << "xstar = " << cfg.xstar << "\n";
  ss << "[prox]\n";
  ss << "kind = "
     << (cfg.prox_kind == ProxKind::HalfSqEuclid
             ? "euclid"
             : cfg.prox_kind == ProxKind::EntropySym ? "entropy" : "pnorm")
     << "\n";
  ss << "p = " << format_double(cfg.p) << "\n";
  const char* sname = "ball";
  switch (cfg.set_kind) {
    case SetKind::FullSpace:
      sname = "fullspace";
      break;
    case SetKind::EuclideanBall:
      sname = "ball";
      break;
    case SetKind::Simplex:
      sname = "simplex";
      break;
    case SetKind::L1Ball:
      sname = "l1ball";
      break;
    case SetKind::Box:
      sname = "box";
      break;
  }
  ss << "set = " << sname << "\n";
  ss << "radius = " << format_double(cfg.set_radius) << "\n";
  ss << "box_lo = " << format_double(cfg.box_lo) << "\n";
  ss << "box_hi = " << format_double(cfg.box_hi) << "\n";
  ss << "[algorithm]\n";
  const char* scheme = "ball";
  switch (cfg.scheme) {
    case Scheme::Single:
      scheme = "single";
      break;
    case Scheme::Ball:
      scheme = "ball";
      break;
    case Scheme::Dilation:
      scheme = "dilation";
      break;
    case Scheme::Adaptive:
      scheme = "adaptive";
      break;
    case Scheme::Stoca:
      scheme = "stoca";
      break;
    case Scheme::AdaptiveS:
      scheme = "adaptive_s";
      break;
  }
  ss << "scheme = " << scheme << "\n";
  ss << "mode = " << (cfg.mode == RunMode::TargetAccuracy ? "eps" : "budget")
     << "\n";
  ss << "eps = " << format_double(cfg.eps) << "\n";
  ss << "budget = " << cfg.budget << "\n";
  ss << "r0 = " << format_double(cfg.r0) << "\n";
  ss << "alpha = " << format_double(cfg.alpha) << "\n";
  ss << "[noise]\n";
  ss << "kind = "
     << (cfg.noise_kind == NoiseKind::None
             ? "none"
             : cfg.noise_kind == NoiseKind::BoundedDualBall ? "ball"
                                                            : "gaussian")
     << "\n";
  ss << "sigma = " << format_double(cfg.sigma) << "\n";
  ss << "[run]\n";
  ss << "trials = " << cfg.trials << "\n";
  ss << "seed = " << cfg.seed << "\n";
  ss << "sweep = ";
  for (size_t i = 0; i < cfg.sweep.size(); ++i) {
    ss << (i ? "," : "") << cfg.sweep[i];
  }
  ss << "\n";
  ss << "out = " << cfg.out_dir << "\n";
  ss << "workers = " << cfg.workers << "\n";
  return ss.str();
}

// ---------------------------------------------------------------------------
// Problem instantiation
// ---------------------------------------------------------------------------

FirstOrderOracle& ProblemInstance::base_oracle() {
  if (power) return *power;
  return *saddle;
}

double ProblemInstance::value(const Vec& x) const {
  return power ? power->value(x) : saddle->value(x);
}

ProblemInstance build_problem(const ExperimentConfig& cfg) {
  validate_config(cfg);
  FeasibleSet set = FeasibleSet::full_space(cfg.n);
  switch (cfg.set_kind) {
    case SetKind::FullSpace:
      break;
    case SetKind::EuclideanBall:
      set = FeasibleSet::euclidean_ball(cfg.n, cfg.set_radius);
      break;
    case SetKind::Simplex:
      set = FeasibleSet::simplex(cfg.n);
      break;
    case SetKind::L1Ball:
      set = FeasibleSet::l1_ball(cfg.n, cfg.set_radius);
      break;
    case SetKind::Box:
      set = FeasibleSet::box(Vec::Constant(cfg.n, cfg.box_lo),
                             Vec::Constant(cfg.n, cfg.box_hi));
      break;
  }
  ProblemInstance prob;
  prob.setup = ProxSetup::make(cfg.prox_kind, set, cfg.p);

  // deterministic start away from the typical optimum
  switch (set.kind) {
    case SetKind::FullSpace: {
      prob.x0 = Vec::Zero(cfg.n);
      prob.x0[0] = 1.0;
      break;
    }
    case SetKind::EuclideanBall:
    case SetKind::L1Ball: {
      prob.x0 = Vec::Zero(cfg.n);
      prob.x0[0] = set.radius;
      break;
    }
    case SetKind::Simplex: {
      prob.x0 = Vec::Zero(cfg.n);
      prob.x0[0] = 1.0;
      break;
    }
    case SetKind::Box:
      prob.x0 = set.hi;
      break;
  }

  Vec xstar;
  if (cfg.xstar == "zero") {
    xstar = Vec::Zero(cfg.n);
  } else if (cfg.xstar == "center") {
    xstar = set.center_point();
  } else if (cfg.xstar == "vertex") {
    xstar = prob.x0;
  } else {
    const auto toks = split(cfg.xstar, ',');
    if (static_cast<int>(toks.size()) != cfg.n) {
      config_error("problem.xstar", "expected zero|center|vertex or n numbers");
    }
    xstar = Vec(cfg.n);
    for (int i = 0; i < cfg.n; ++i) xstar[i] = parse_num("problem.xstar", toks[i]);
  }
  if (set.kind == SetKind::Simplex && cfg.xstar == "zero") {
    xstar = set.center_point();
  }

  if (cfg.family == ProblemFamily::Power) {
    std::optional<double> hint;
    if (set.kind == SetKind::FullSpace) {
      hint = (prob.x0 - xstar).norm() + 2.0 * std::max(cfg.r0, 1.0);
    }
    prob.power = make_power_objective(cfg.rho, xstar, prob.setup, hint);
    prob.params = prob.power->params();
    prob.f_star = 0.0;
    prob.x_star = xstar;
  } else {
    prob.saddle = make_saddle_pnorm(cfg.q, prob.setup);
    prob.params = prob.saddle->params();
    prob.f_star = prob.saddle->f_star();
    prob.x_star = set.kind == SetKind::Simplex
                      ? std::optional<Vec>(set.center_point())
                      : std::optional<Vec>(Vec::Zero(cfg.n));
  }
  prob.params.sigma = cfg.noise_kind == NoiseKind::None ? 0.0 : cfg.sigma;

  if (cfg.r0 > 0.0) {
    prob.r0 = cfg.r0;
  } else if (cfg.scheme == Scheme::Dilation || cfg.scheme == Scheme::Stoca) {
    // diameter of Q in the geometry norm
    switch (set.kind) {
      case SetKind::EuclideanBall:
      case SetKind::L1Ball:
        prob.r0 = 2.0 * set.radius;
        break;
      case SetKind::Simplex:
        prob.r0 = 2.0;
        break;
      case SetKind::Box:
        prob.r0 = prob.setup.norm.kind == NormKind::L2
                      ? (set.hi - set.lo).norm()
                      : (set.hi - set.lo).cwiseAbs().sum();
        break;
      default:
        config_error("algorithm.r0", "required for unbounded sets");
    }
  } else if (prob.x_star) {
    prob.r0 = std::max(norm(prob.setup.norm, Vec(prob.x0 - *prob.x_star)),
                       1e-6);
  } else {
    config_error("algorithm.r0", "required when x* is unknown");
  }
  return prob;
}

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

TrialResult run_trial(const ExperimentConfig& cfg, int trial,
                      long long budget_override) {
  ProblemInstance prob = build_problem(cfg);
  FirstOrderOracle& base = prob.base_oracle();
  NoiseModel nm{cfg.noise_kind, cfg.sigma, CounterRng::derive(cfg.seed, trial)};
  std::unique_ptr<StochasticOracle> wrapped;
  FirstOrderOracle* oracle = &base;
  if (cfg.noise_kind != NoiseKind::None && cfg.sigma > 0.0) {
    wrapped = stochastic_wrap(base, nm, prob.setup.norm);
    oracle = wrapped.get();
  }
  const long long budget = budget_override > 0 ? budget_override : cfg.budget;
  const bool want_witnesses = cfg.family == ProblemFamily::Saddle;

  TrialResult out;
  out.trial = trial;

  MultistageResult ms;
  switch (cfg.scheme) {
    case Scheme::Single: {
      const LocalProblem lp(prob.setup, prob.x0, prob.r0, 1.0);
      const TheoreticalBounds tb = theoretical_bounds(
          prob.params, prob.setup.prox, prob.r0, std::nullopt,
          std::max<long long>(0, budget - 1));
      DAConfig dc;
      dc.iterations = std::max<long long>(0, budget - 1);
      dc.gamma = tb.gamma_star;
      dc.collect_witnesses = want_witnesses;
      DARun run = da_run(*oracle, lp, dc);
      ms.x_hat = run.x_out;
      ms.trace.oracle_calls = run.oracle_calls;
      StageRecord rec;
      rec.stage = 1;
      rec.iters = dc.iterations;
      rec.oracle_calls = run.oracle_calls;
      rec.beta = dc.gamma * std::sqrt(double(dc.iterations + 1));
      rec.radius = prob.r0;
      rec.delta_observed = run.delta_observed;
      rec.delta_exact = run.delta_exact;
      ms.trace.stages.push_back(rec);
      ms.stage_points.push_back(run.x_out);
      ms.last_stage_witnesses = std::move(run.witnesses);
      ms.last_stage_queries = run.oracle_calls;
      break;
    }
    case Scheme::Ball:
    case Scheme::Dilation: {
      RunParams rp;
      rp.mode = cfg.mode;
      rp.eps = cfg.eps;
      rp.budget = budget;
      rp.params = prob.params;
      rp.setup = prob.setup;
      rp.x0 = prob.x0;
      rp.R0 = prob.r0;
      rp.stochastic = prob.params.sigma > 0.0;
      rp.collect_witnesses = want_witnesses;
      ms = cfg.scheme == Scheme::Ball ? run_ball(*oracle, rp)
                                      : run_fixed_dilation(*oracle, rp);
      break;
    }
    case Scheme::Adaptive:
    case Scheme::Stoca:
    case Scheme::AdaptiveS: {
      AdaptiveParams ap;
      ap.budget = budget;
      ap.setup = prob.setup;
      ap.x0 = prob.x0;
      ap.R0 = prob.r0;
      ap.L = prob.params.L;
      ap.sigma = prob.params.sigma;
      ap.collect_witnesses = want_witnesses;
      const AdaptiveVariant variant =
          cfg.scheme == Scheme::Adaptive
              ? AdaptiveVariant::Deterministic
              : cfg.scheme == Scheme::Stoca
                    ? AdaptiveVariant::StocaFixedDilation
                    : AdaptiveVariant::ConfidenceShrinkingBall;
      ms = run_adaptive(*oracle, variant, ap);
      if (cfg.scheme == Scheme::AdaptiveS) {
        const AdaptiveLayout layout =
            adaptive_layout(budget, prob.setup.prox, false);
        if (layout.m >= 1 && budget >= 4) {
          out.eps_certificate = adaptive_s_certificate(
              budget, layout.n0, prob.params.rho, prob.params.mu_f,
              prob.params.L, prob.params.sigma, prob.setup.prox, cfg.alpha);
        }
      }
      break;
    }
  }

  // fill exact measurements (direct evaluations, not oracle queries)
  for (size_t i = 0; i < ms.trace.stages.size(); ++i) {
    if (i < ms.stage_points.size()) {
      const Vec& y = ms.stage_points[i];
      ms.trace.stages[i].f_gap = prob.value(y) - prob.f_star;
      if (prob.x_star) {
        ms.trace.stages[i].dist_to_opt =
            norm(prob.setup.norm, Vec(y - *prob.x_star));
      }
    }
  }

  out.trace = std::move(ms.trace);
  out.x_hat = ms.x_hat;
  out.final_gap = prob.value(ms.x_hat) - prob.f_star;
  out.dist_to_opt = prob.x_star
                        ? norm(prob.setup.norm, Vec(ms.x_hat - *prob.x_star))
                        : std::numeric_limits<double>::quiet_NaN();
  out.oracle_calls = out.trace.oracle_calls;

  if (want_witnesses && !ms.last_stage_witnesses.empty()) {
    const DualAggregate agg = aggregate_dual(
        ms.last_stage_witnesses,
        ms.trace.stages.empty() ? 1 : ms.trace.stages.back().stage);
    out.w_bar = agg.w_bar;
    if (cfg.mode == RunMode::TargetAccuracy && prob.saddle) {
      out.pd_certificate =
          certify_gap(*prob.saddle, ms.x_hat, agg.w_bar, cfg.eps,
                      prob.params.rho);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment orchestration
// ---------------------------------------------------------------------------

namespace {

const char* kCsvHeader =
    "trial,stage,iter,oracle_calls,f_gap,dist_to_opt,delta_observed,"
    "delta_exact,beta,radius\n";

std::string opt_num(const std::optional<double>& v) {
  return v ? format_double(*v) : "";
}

std::string trace_csv(const std::vector<TrialResult>& trials) {
  std::stringstream ss;
  ss << kCsvHeader;
  for (const TrialResult& t : trials) {
    for (const StageRecord& r : t.trace.stages) {
      ss << t.trial << ',' << r.stage << ',' << r.iters << ','
         << r.oracle_calls << ',' << opt_num(r.f_gap) << ','
         << opt_num(r.dist_to_opt) << ',' << opt_num(r.delta_observed) << ','
         << opt_num(r.delta_exact) << ',' << format_double(r.beta) << ','
         << format_double(r.radius) << "\n";
    }
  }
  return ss.str();
}

std::vector<TrialResult> run_trials(const ExperimentConfig& cfg,
                                    long long budget_override) {
  std::vector<TrialResult> results(cfg.trials);
  if (cfg.workers <= 1 || cfg.trials == 1) {
    for (int t = 0; t < cfg.trials; ++t) {
      results[t] = run_trial(cfg, t, budget_override);
    }
    return results;
  }
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= cfg.trials) return;
      results[t] = run_trial(cfg, t, budget_override);
    }
  };
  std::vector<std::thread> pool;
  const int nw = std::min(cfg.workers, cfg.trials);
  pool.reserve(nw);
  for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return results;
}

double mean_of(const std::vector<double>& v) {
  Kahan acc;
  for (double x : v) acc.add(x);
  return acc.value() / double(v.size());
}

double quantile_of(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, v.size() - 1);
  const double w = pos - double(lo);
  return (1.0 - w) * v[lo] + w * v[hi];
}

}  // namespace

std::vector<ExperimentResult> run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<long long> budgets = cfg.sweep;
  if (budgets.empty()) budgets.push_back(0);  // no override

  std::vector<ExperimentResult> all;
  std::stringstream summary;
  std::vector<SweepPoint> sweep_points;

  for (long long b : budgets) {
    ExperimentResult er;
    er.budget = b > 0 ? b : cfg.budget;
    er.trials = run_trials(cfg, b);
    const std::string name = budgets.size() == 1 && b == 0
                                 ? "traces.csv"
                                 : "traces_" + std::to_string(er.budget) + ".csv";
    write_text_file(cfg.out_dir + "/" + name, trace_csv(er.trials));

    std::vector<double> gaps, calls;
    for (const TrialResult& t : er.trials) {
      gaps.push_back(t.final_gap);
      calls.push_back(double(t.oracle_calls));
    }
    summary << "[result_" << er.budget << "]\n";
    summary << "budget = " << er.budget << "\n";
    summary << "trials = " << er.trials.size() << "\n";
    summary << "mean_gap = " << format_double(mean_of(gaps)) << "\n";
    summary << "median_gap = " << format_double(quantile_of(gaps, 0.5)) << "\n";
    summary << "q10_gap = " << format_double(quantile_of(gaps, 0.1)) << "\n";
    summary << "q90_gap = " << format_double(quantile_of(gaps, 0.9)) << "\n";
    summary << "mean_oracle_calls = " << format_double(mean_of(calls)) << "\n";
    if (er.trials.front().eps_certificate) {
      summary << "eps_certificate = "
              << format_double(*er.trials.front().eps_certificate) << "\n";
    }
    if (er.trials.front().pd_certificate) {
      const GapCertificate& c = *er.trials.front().pd_certificate;
      summary << "pd_gap = " << format_double(c.gap) << "\n";
      summary << "pd_bound = " << format_double(c.bound) << "\n";
      summary << "pd_pass = " << (c.pass ? 1 : 0) << "\n";
    }

    if (er.budget > 0) {
      // bound overlay for the sweep: fixed-budget restart rate
      ProblemInstance prob = build_problem(cfg);
      const double tau = 2.0 * (prob.params.rho - 1.0) / prob.params.rho;
      const double growth =
          (cfg.scheme == Scheme::Dilation || cfg.scheme == Scheme::Stoca)
              ? prob.setup.prox.c_d.value_or(prob.setup.prox.a_d)
              : prob.setup.prox.a_d;
      const double l2 = prob.params.L * prob.params.L +
                        prob.params.sigma * prob.params.sigma;
      const double bound =
          2.0 * std::pow(8.0 * l2 * growth /
                             (std::pow(prob.params.mu_f, 2.0 / prob.params.rho) *
                              prob.setup.prox.mu_d * double(er.budget)),
                         1.0 / tau);
      sweep_points.push_back({er.budget, mean_of(gaps), bound});
    }
    all.push_back(std::move(er));
  }

  // persist saddle certification inputs for the certify subcommand
  const ExperimentResult& first = all.front();
  if (first.trials.front().w_bar) {
    std::stringstream xs, ws;
    const Vec& xh = first.trials.front().x_hat;
    const Vec& wb = *first.trials.front().w_bar;
    for (Index i = 0; i < xh.size(); ++i) {
      xs << (i ? "," : "") << format_double(xh[i]);
    }
    for (Index i = 0; i < wb.size(); ++i) {
      ws << (i ? "," : "") << format_double(wb[i]);
    }
    write_text_file(cfg.out_dir + "/xhat.txt", xs.str() + "\n");
    write_text_file(cfg.out_dir + "/wbar.txt", ws.str() + "\n");
  }

  if (sweep_points.size() >= 3) {
    std::vector<std::pair<double, double>> pts;
    for (const SweepPoint& p : sweep_points) {
      pts.push_back({double(p.budget), p.mean_gap});
    }
    const RateFit fit = rate_fit(pts);
    summary << "[rate_fit]\n";
    summary << "slope = " << format_double(fit.slope) << "\n";
    summary << "intercept = " << format_double(fit.intercept) << "\n";
    summary << "r2 = " << format_double(fit.r2) << "\n";
    summary << "excluded = " << fit.excluded << "\n";
  }
  if (!sweep_points.empty()) {
    std::stringstream sw;
    sw << "budget,mean_gap,bound\n";
    for (const SweepPoint& p : sweep_points) {
      sw << p.budget << ',' << format_double(p.mean_gap) << ','
         << format_double(p.bound) << "\n";
    }
    write_text_file(cfg.out_dir + "/sweep.csv", sw.str());
  }

  write_text_file(cfg.out_dir + "/config_resolved.txt", render_config(cfg));
  const auto t1 = std::chrono::steady_clock::now();
  summary << "[timing]\n";
  summary << "wall_time_seconds = "
          << std::chrono::duration<double>(t1 - t0).count() << "\n";
  write_text_file(cfg.out_dir + "/summary.txt", summary.str());
  return all;
}

// ---------------------------------------------------------------------------
// Post-processing
// ---------------------------------------------------------------------------

RateFit rate_fit(const std::vector<std::pair<double, double>>& pts) {
  RateFit out;
  std::vector<double> xs, ys;
  for (const auto& [n, gap] : pts) {
    if (gap > 0.0 && n > 0.0) {
      xs.push_back(std::log(n));
      ys.push_back(std::log(gap));
    } else {
      ++out.excluded;
    }
  }
  if (xs.size() < 3) {
    throw std::invalid_argument("rate_fit: need at least 3 positive points");
  }
  const double n = double(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  out.slope = (n * sxy - sx * sy) / denom;
  out.intercept = (sy - out.slope * sx) / n;
  const double ss_tot = syy - sy * sy / n;
  double ss_res = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (out.intercept + out.slope * xs[i]);
    ss_res += e * e;
  }
  out.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return out;
}

CoverageResult coverage_check(const std::vector<double>& gaps,
                              double certificate, double alpha) {
  if (gaps.empty()) throw std::invalid_argument("coverage: no trials");
  CoverageResult out;
  for (double g : gaps) {
    if (g > certificate) ++out.violations;
  }
  out.rate = double(out.violations) / double(gaps.size());
  out.threshold =
      alpha + 3.0 * std::sqrt(alpha * (1.0 - alpha) / double(gaps.size()));
  out.pass = out.rate <= out.threshold;
  return out;
}

void emit_plots(const std::vector<SweepPoint>& sweep, const std::string& dir) {
  if (sweep.empty()) {
    throw std::invalid_argument("emit_plots: empty sweep");
  }
  const int w = 640, h = 480, ml = 70, mr = 20, mt = 20, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const SweepPoint& p : sweep) {
    const double lx = std::log10(double(p.budget));
    xmin = std::min(xmin, lx);
    xmax = std::max(xmax, lx);
    for (double v : {p.mean_gap, p.bound}) {
      if (v > 0.0) {
        ymin = std::min(ymin, std::log10(v));
        ymax = std::max(ymax, std::log10(v));
      }
    }
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  auto px = [&](double lx) {
    return ml + (lx - xmin) / (xmax - xmin) * (w - ml - mr);
  };
  auto py = [&](double ly) {
    return h - mb - (ly - ymin) / (ymax - ymin) * (h - mt - mb);
  };
  std::stringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
      << h << "'>\n";
  svg << "<rect width='" << w << "' height='" << h << "' fill='white'/>\n";
  svg << "<line x1='" << ml << "' y1='" << (h - mb) << "' x2='" << (w - mr)
      << "' y2='" << (h - mb) << "' stroke='black'/>\n";
  svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
      << (h - mb) << "' stroke='black'/>\n";
  auto polyline = [&](bool bound, const char* color) {
    svg << "<polyline fill='none' stroke='" << color << "' points='";
    for (const SweepPoint& p : sweep) {
      const double v = bound ? p.bound : p.mean_gap;
      if (v <= 0.0) continue;
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.6g,%.6g ",
                    px(std::log10(double(p.budget))), py(std::log10(v)));
      svg << buf;
    }
    svg << "'/>\n";
  };
  polyline(false, "#1f77b4");
  polyline(true, "#d62728");
  for (const SweepPoint& p : sweep) {
    if (p.mean_gap <= 0.0) continue;
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "<circle cx='%.6g' cy='%.6g' r='3' fill='#1f77b4'/>\n",
                  px(std::log10(double(p.budget))), py(std::log10(p.mean_gap)));
    svg << buf;
  }
  svg << "<text x='" << (w / 2) << "' y='" << (h - 12)
      << "' font-size='14' text-anchor='middle'>log10 N</text>\n";
  svg << "<text x='16' y='" << (h / 2)
      << "' font-size='14' transform='rotate(-90 16 " << (h / 2)
      << ")' text-anchor='middle'>log10 gap</text>\n";
  svg << "<text x='" << (w - mr - 150) << "' y='" << (mt + 16)
      << "' font-size='12' fill='#1f77b4'>measured mean gap</text>\n";
  svg << "<text x='" << (w - mr - 150) << "' y='" << (mt + 32)
      << "' font-size='12' fill='#d62728'>theoretical bound</text>\n";
  svg << "</svg>\n";
  write_text_file(dir + "/plot.svg", svg.str());
}

}  // namespace ucmin
