#include "ucmin/multistage.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ucmin {

long long strict_floor(double a) {
  return static_cast<long long>(std::ceil(a)) - 1;
}

long long floor_int(double a) { return static_cast<long long>(std::floor(a)); }

namespace {

double tau_of(double rho) { return 2.0 * (rho - 1.0) / rho; }

double l2eff(const ConvexityParams& p, bool stochastic) {
  return p.L * p.L + (stochastic ? p.sigma * p.sigma : 0.0);
}

// N_k coefficient: 4 L2 G / (mu_f^2 mu_d R0^{2(rho-1)}), G = A(d) or C(d)
double stage_coeff(const ConvexityParams& p, double growth, double mu_d,
                   double R0, bool stochastic) {
  return 4.0 * l2eff(p, stochastic) * growth /
         (p.mu_f * p.mu_f * mu_d * std::pow(R0, 2.0 * (p.rho - 1.0)));
}

StageSchedule schedule_eps_impl(const ConvexityParams& params,
                                const ProxFunction& prox, double R0, double eps,
                                bool quadratic_growth, bool stochastic) {
  if (params.mu_f <= 0.0) {
    throw std::invalid_argument("restart schedule needs mu_f > 0");
  }
  if (eps <= 0.0) throw std::invalid_argument("eps must be > 0");
  if (R0 <= 0.0) throw std::invalid_argument("R0 must be > 0");
  double growth = prox.a_d;
  if (quadratic_growth) {
    if (!prox.c_d) {
      throw std::invalid_argument("fixed-dilation schedule needs C(d)");
    }
    growth = *prox.c_d;
  }
  StageSchedule sched;
  const double rho = params.rho;
  sched.tau = tau_of(rho);
  const long long m = std::max<long long>(
      1, strict_floor(std::log2(params.mu_f * std::pow(R0, rho) / eps)) + 1);
  const double coeff = stage_coeff(params, growth, prox.mu_d, R0, stochastic);
  const double gain_scale =
      std::sqrt(l2eff(params, stochastic) / (2.0 * growth * prox.mu_d));
  for (long long k = 1; k <= m; ++k) {
    StageSpec st;
    st.k = static_cast<int>(k);
    st.n_k = std::max<long long>(
        0, strict_floor(std::pow(2.0, sched.tau * k) * coeff));
    const double contraction = std::pow(2.0, -double(k - 1) / rho);
    st.target = contraction * R0;  // R_{k-1} resp. r_{k-1}
    if (quadratic_growth) {
      st.radius = R0;
      st.gamma = (R0 * R0 / st.target) * gain_scale;
    } else {
      st.radius = st.target;
      st.gamma = st.target * gain_scale;
    }
    sched.stages.push_back(st);
  }
  sched.total_budget_bound = std::pow(4.0, sched.tau + 1.0) *
                             l2eff(params, stochastic) * growth /
                             (std::pow(params.mu_f, 2.0 / rho) * prox.mu_d) *
                             std::pow(eps, -sched.tau);
  return sched;
}

std::vector<StageSpec> schedule_budget_impl(const ConvexityParams& params,
                                            const ProxFunction& prox, double R0,
                                            long long budget,
                                            bool quadratic_growth,
                                            bool stochastic) {
  double growth = quadratic_growth ? *prox.c_d : prox.a_d;
  const double rho = params.rho;
  const double tau = tau_of(rho);
  const double coeff = stage_coeff(params, growth, prox.mu_d, R0, stochastic);
  const double gain_scale =
      std::sqrt(l2eff(params, stochastic) / (2.0 * growth * prox.mu_d));
  std::vector<StageSpec> stages;
  long long used = 0;
  for (long long k = 1;; ++k) {
    StageSpec st;
    st.k = static_cast<int>(k);
    st.n_k =
        std::max<long long>(0, strict_floor(std::pow(2.0, tau * k) * coeff));
    if (used + st.n_k + 1 > budget) break;
    used += st.n_k + 1;
    const double contraction = std::pow(2.0, -double(k - 1) / rho);
    st.target = contraction * R0;
    if (quadratic_growth) {
      st.radius = R0;
      st.gamma = (R0 * R0 / st.target) * gain_scale;
    } else {
      st.radius = st.target;
      st.gamma = st.target * gain_scale;
    }
    stages.push_back(st);
    if (std::pow(2.0, tau * (k + 1)) * coeff > 2.0 * double(budget)) break;
  }
  return stages;
}

struct StageLoopOutput {
  Vec y;
  Trace trace;
  std::vector<Vec> stage_points;
  std::vector<Vec> witnesses;
  std::vector<DAIterate> iterates;
  long long last_queries = 0;
};

StageLoopOutput run_stages(FirstOrderOracle& oracle, const ProxSetup& setup,
                           const Vec& x0, const std::vector<StageSpec>& stages,
                           bool collect_witnesses, bool record_iterates) {
  StageLoopOutput out;
  out.y = x0;
  for (size_t i = 0; i < stages.size(); ++i) {
    const StageSpec& st = stages[i];
    const bool last = (i + 1 == stages.size());
    const LocalProblem lp(setup, out.y, st.radius, 1.0);
    DAConfig cfg;
    cfg.iterations = st.n_k;
    cfg.gamma = st.gamma;
    cfg.collect_witnesses = collect_witnesses && last;
    cfg.record_iterates = record_iterates && last;
    DARun run = da_run(oracle, lp, cfg);
    out.y = run.x_out;
    out.stage_points.push_back(out.y);
    out.trace.oracle_calls += run.oracle_calls;
    StageRecord rec;
    rec.stage = st.k;
    rec.iters = st.n_k;
    rec.oracle_calls = out.trace.oracle_calls;
    rec.beta = st.gamma * std::sqrt(double(st.n_k + 1));
    rec.radius = st.radius;
    rec.delta_observed = run.delta_observed;
    rec.delta_exact = run.delta_exact;
    out.trace.stages.push_back(rec);
    if (last) {
      out.witnesses = std::move(run.witnesses);
      out.iterates = std::move(run.iterates);
      out.last_queries = run.oracle_calls;
    }
  }
  return out;
}

MultistageResult single_stage_fallback(FirstOrderOracle& oracle,
                                       const ProxSetup& setup, const Vec& x0,
                                       double R0, double gamma,
                                       long long iterations,
                                       bool collect_witnesses,
                                       bool record_iterates, const char* note) {
  const LocalProblem lp(setup, x0, R0, 1.0);
  DAConfig cfg;
  cfg.iterations = std::max<long long>(0, iterations);
  cfg.gamma = gamma;
  cfg.collect_witnesses = collect_witnesses;
  cfg.record_iterates = record_iterates;
  DARun run = da_run(oracle, lp, cfg);
  MultistageResult out;
  out.x_hat = run.x_out;
  out.trace.oracle_calls = run.oracle_calls;
  StageRecord rec;
  rec.stage = 1;
  rec.iters = cfg.iterations;
  rec.oracle_calls = run.oracle_calls;
  rec.beta = gamma * std::sqrt(double(cfg.iterations + 1));
  rec.radius = R0;
  rec.delta_observed = run.delta_observed;
  rec.delta_exact = run.delta_exact;
  rec.note = note;
  out.trace.stages.push_back(rec);
  out.stage_points.push_back(out.x_hat);
  out.last_stage_witnesses = std::move(run.witnesses);
  out.last_stage_iterates = std::move(run.iterates);
  out.last_stage_queries = run.oracle_calls;
  StageSpec sp;
  sp.k = 1;
  sp.n_k = cfg.iterations;
  sp.radius = R0;
  sp.target = R0;
  sp.gamma = gamma;
  out.schedule.push_back(sp);
  return out;
}

}  // namespace

StageSchedule schedule_ball_eps(const ConvexityParams& params,
                                const ProxFunction& prox, double R0,
                                double eps) {
  return schedule_eps_impl(params, prox, R0, eps, false, params.sigma > 0.0);
}

StageSchedule schedule_dilation_eps(const ConvexityParams& params,
                                    const ProxFunction& prox, double R0,
                                    double eps) {
  return schedule_eps_impl(params, prox, R0, eps, true, params.sigma > 0.0);
}

namespace {

MultistageResult run_restart(FirstOrderOracle& oracle, const RunParams& rp,
                             bool quadratic_growth) {
  if (!rp.setup.set.contains(rp.x0, 1e-10)) {
    throw std::invalid_argument("restart run: infeasible x0");
  }
  if (quadratic_growth && !rp.setup.prox.c_d) {
    throw std::invalid_argument("fixed-dilation run needs C(d)");
  }
  const bool stoch = rp.stochastic;
  const ConvexityParams& p = rp.params;
  const ProxFunction& prox = rp.setup.prox;
  const double growth = quadratic_growth ? *prox.c_d : prox.a_d;
  const double gain_scale =
      std::sqrt(l2eff(p, stoch) / (2.0 * growth * prox.mu_d));

  std::vector<StageSpec> stages;
  if (rp.mode == RunMode::TargetAccuracy) {
    stages = schedule_eps_impl(p, prox, rp.R0, rp.eps, quadratic_growth, stoch)
                 .stages;
  } else {
    const double tau = tau_of(p.rho);
    const double coeff =
        stage_coeff(p, growth, prox.mu_d, rp.R0, stoch);
    const double nbar =
        std::pow(2.0, tau) * (std::pow(2.0, tau) + 1.0) * coeff;
    if (double(rp.budget) < nbar) {
      // pre-procedure rule: plain single-stage DA over B_{R0}(x0)
      return single_stage_fallback(
          oracle, rp.setup, rp.x0, rp.R0, rp.R0 * gain_scale, rp.budget - 1,
          rp.collect_witnesses, rp.record_iterates, "below-threshold fallback");
    }
    stages = schedule_budget_impl(p, prox, rp.R0, rp.budget, quadratic_growth,
                                  stoch);
    if (stages.empty()) {
      return single_stage_fallback(
          oracle, rp.setup, rp.x0, rp.R0, rp.R0 * gain_scale, rp.budget - 1,
          rp.collect_witnesses, rp.record_iterates, "empty schedule fallback");
    }
  }

  StageLoopOutput loop = run_stages(oracle, rp.setup, rp.x0, stages,
                                    rp.collect_witnesses, rp.record_iterates);
  MultistageResult out;
  out.x_hat = loop.y;
  out.trace = std::move(loop.trace);
  out.schedule = std::move(stages);
  out.stage_points = std::move(loop.stage_points);
  out.last_stage_witnesses = std::move(loop.witnesses);
  out.last_stage_iterates = std::move(loop.iterates);
  out.last_stage_queries = loop.last_queries;
  return out;
}

}  // namespace

MultistageResult run_ball(FirstOrderOracle& oracle, const RunParams& rp) {
  return run_restart(oracle, rp, false);
}

MultistageResult run_fixed_dilation(FirstOrderOracle& oracle,
                                    const RunParams& rp) {
  return run_restart(oracle, rp, true);
}

AdaptiveLayout adaptive_layout(long long N, const ProxFunction& prox,
                               bool quadratic_growth) {
  AdaptiveLayout out;
  if (N < 2) return out;
  const double growth = quadratic_growth ? prox.c_d.value_or(prox.a_d)
                                         : prox.a_d;
  out.m = floor_int(0.5 * std::log2(prox.mu_d * double(N) /
                                    (growth * std::log2(double(N))))) -
          1;
  if (out.m >= 1) out.n0 = floor_int(double(N) / double(out.m));
  return out;
}

MultistageResult run_adaptive(FirstOrderOracle& oracle, AdaptiveVariant variant,
                              const AdaptiveParams& ap) {
  if (!ap.setup.set.contains(ap.x0, 1e-10)) {
    throw std::invalid_argument("adaptive run: infeasible x0");
  }
  const bool quadratic = variant == AdaptiveVariant::StocaFixedDilation;
  if (quadratic && !ap.setup.prox.c_d) {
    throw std::invalid_argument("stochastic fixed-dilation run needs C(d)");
  }
  const ProxFunction& prox = ap.setup.prox;
  const double growth = quadratic ? *prox.c_d : prox.a_d;
  const double l2 = ap.L * ap.L + ap.sigma * ap.sigma;
  const double gain_scale = std::sqrt(l2 / (2.0 * growth * prox.mu_d));

  const AdaptiveLayout layout = adaptive_layout(ap.budget, prox, quadratic);
  if (ap.budget < 4 || layout.m < 1) {
    return single_stage_fallback(oracle, ap.setup, ap.x0, ap.R0,
                                 ap.R0 * gain_scale, ap.budget - 1,
                                 ap.collect_witnesses, false,
                                 "adaptive fallback: budget too small");
  }

  std::vector<StageSpec> stages;
  for (long long k = 1; k <= layout.m; ++k) {
    StageSpec st;
    st.k = static_cast<int>(k);
    st.n_k = layout.n0;
    st.target = std::pow(2.0, -double(k - 1)) * ap.R0;  // R_{k-1} or r_{k-1}
    st.radius = quadratic ? ap.R0 : st.target;
    st.gamma = quadratic ? (ap.R0 * ap.R0 / st.target) * gain_scale
                         : st.target * gain_scale;
    stages.push_back(st);
  }

  StageLoopOutput loop = run_stages(oracle, ap.setup, ap.x0, stages,
                                    ap.collect_witnesses, false);
  MultistageResult out;
  out.trace = std::move(loop.trace);
  out.schedule = std::move(stages);
  out.stage_points = std::move(loop.stage_points);
  out.last_stage_witnesses = std::move(loop.witnesses);
  out.last_stage_queries = loop.last_queries;

  if (variant == AdaptiveVariant::Deterministic) {
    // argmin_k f(y_k); the value probes are oracle queries of their own
    double best = std::numeric_limits<double>::infinity();
    Vec best_y = out.stage_points.front();
    for (const Vec& y : out.stage_points) {
      const OracleResult r = oracle.query(y);
      ++out.trace.probe_calls;
      ++out.trace.oracle_calls;
      if (!r.value) {
        throw std::runtime_error(
            "adaptive run: oracle supplies no objective values");
      }
      if (*r.value < best) {
        best = *r.value;
        best_y = y;
      }
    }
    out.x_hat = best_y;
  } else {
    out.x_hat = out.stage_points.back();
  }
  return out;
}

double adaptive_s_certificate(long long N, long long N0, double rho,
                              double mu_f, double L, double sigma,
                              const ProxFunction& prox, double alpha) {
  if (alpha <= 0.0 || alpha >= 1.0) {
    throw std::invalid_argument("alpha must lie in (0,1)");
  }
  if (mu_f <= 0.0 || N < 4 || N0 < 1) {
    throw std::invalid_argument("certificate needs mu_f > 0, N >= 4, N0 >= 1");
  }
  const double l2 = L * L + sigma * sigma;
  const double head =
      4.0 * std::pow(16.0 / ((N0 + 1) * std::pow(mu_f, 2.0 / rho)),
                     rho / (2.0 * (rho - 1.0)));
  const double tail =
      std::sqrt(l2 * prox.a_d / (2.0 * prox.mu_d)) +
      sigma * std::sqrt(3.0 * std::log(std::log2(double(N)) / (2.0 * alpha)));
  return head * std::pow(tail, rho / (rho - 1.0));
}

}  // namespace ucmin
