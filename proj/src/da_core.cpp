#include "ucmin/da_core.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ucmin {

namespace {

double beta_at(const DAConfig& cfg, long long i) {
  if (cfg.beta_schedule) {
    const auto& b = *cfg.beta_schedule;
    if (i < 0 || i >= static_cast<long long>(b.size())) {
      throw std::invalid_argument("beta schedule too short");
    }
    return b[i];
  }
  return cfg.gamma * std::sqrt(double(cfg.iterations + 1));
}

double lambda_at(const DAConfig& cfg, long long i) {
  if (cfg.lambda_schedule) {
    const auto& l = *cfg.lambda_schedule;
    if (i < 0 || i >= static_cast<long long>(l.size())) {
      throw std::invalid_argument("lambda schedule too short");
    }
    return l[i];
  }
  return 1.0;
}

void validate(const DAConfig& cfg) {
  if (cfg.iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (!cfg.beta_schedule && cfg.gamma <= 0.0) {
    throw std::invalid_argument("gamma must be > 0");
  }
  if (cfg.beta_schedule) {
    const auto& b = *cfg.beta_schedule;
    if (static_cast<long long>(b.size()) < cfg.iterations + 2) {
      throw std::invalid_argument("beta schedule must cover beta_0..beta_{N+1}");
    }
    for (size_t i = 0; i < b.size(); ++i) {
      if (b[i] <= 0.0) throw std::invalid_argument("beta must be > 0");
      if (i > 0 && b[i] < b[i - 1]) {
        throw std::invalid_argument("beta schedule must be nondecreasing");
      }
    }
  }
  if (cfg.lambda_schedule) {
    for (double l : *cfg.lambda_schedule) {
      if (l <= 0.0) throw std::invalid_argument("lambda must be > 0");
    }
  }
}

}  // namespace

DARun da_run(FirstOrderOracle& oracle, const LocalProblem& lp,
             const DAConfig& cfg) {
  validate(cfg);
  const long long n_iter = cfg.iterations;
  const Index dim = lp.z.size();

  DARun run;
  DAState& st = run.state;
  st.center = lp.z;
  st.radius = lp.R;
  st.s = Vec::Zero(dim);
  st.s_exact = Vec::Zero(dim);
  st.x = lp.z;
  st.have_exact = true;

  KahanVec weighted_sum(dim);
  KahanVec s_acc(dim);
  KahanVec s_exact_acc(dim);
  Kahan weight_total;
  Kahan sum_inner;
  Kahan sum_inner_exact;

  const long long calls_before = oracle.calls();

  for (long long k = 0; k <= n_iter; ++k) {
    const OracleResult r = oracle.query(st.x);
    const double lam = lambda_at(cfg, k);
    const Vec& g = r.g;
    const Vec& g_exact = r.g_exact ? *r.g_exact : r.g;

    weighted_sum.add(lam * st.x);
    weight_total.add(lam);
    sum_inner.add(lam * g.dot(st.x - lp.z));
    sum_inner_exact.add(lam * g_exact.dot(st.x - lp.z));
    s_acc.add(lam * g);
    s_exact_acc.add(lam * g_exact);

    if (cfg.record_iterates) {
      run.iterates.push_back({st.x, g, lam, beta_at(cfg, k == 0 ? 1 : k)});
    }
    if (cfg.collect_witnesses) {
      if (!r.dual_witness) {
        throw std::runtime_error("da_run: oracle did not supply dual witnesses");
      }
      run.witnesses.push_back(*r.dual_witness);
    }
    if (r.value && (!run.best_value || *r.value < *run.best_value)) {
      run.best_value = r.value;
      run.best_iterate = st.x;
    }

    if (k < n_iter) {
      const double beta_next = beta_at(cfg, k + 1);
      st.beta_last = beta_next;
      st.x = prox_map(lp.with_beta(beta_next), Vec(-s_acc.value()));
    } else {
      st.beta_last = beta_at(cfg, n_iter + 1);
    }
    st.k = k;
  }

  st.s = s_acc.value();
  st.s_exact = s_exact_acc.value();
  st.weight_total = weight_total.value();
  st.sum_inner = sum_inner.value();
  st.sum_inner_exact = sum_inner_exact.value();

  run.x_out = weighted_sum.value() / st.weight_total;
  run.oracle_calls = oracle.calls() - calls_before;

  if (support_available(lp.setup)) {
    run.delta_observed = gap_value(st, lp);
    run.delta_exact = gap_value_exact(st, lp);
  }
  return run;
}

double gap_value(const DAState& state, const LocalProblem& lp) {
  const SupportResult sup =
      support(lp.setup, state.center, state.radius, Vec(-state.s));
  return (state.sum_inner + sup.value) / state.weight_total;
}

double gap_value_exact(const DAState& state, const LocalProblem& lp) {
  const SupportResult sup =
      support(lp.setup, state.center, state.radius, Vec(-state.s_exact));
  return (state.sum_inner_exact + sup.value) / state.weight_total;
}

TheoreticalBounds theoretical_bounds(const ConvexityParams& params,
                                     const ProxFunction& prox, double R,
                                     std::optional<double> r, long long N,
                                     std::optional<double> alpha) {
  if (N < 0) throw std::invalid_argument("N must be >= 0");
  if (R <= 0.0) throw std::invalid_argument("R must be > 0");
  const double l2eff = params.L * params.L + params.sigma * params.sigma;
  const double mu_d = prox.mu_d;
  TheoreticalBounds out;
  if (!r) {
    const double a_d = prox.a_d;
    out.gamma_star = R * std::sqrt(l2eff / (2.0 * mu_d * a_d));
    out.f_gap_bound =
        2.0 * R * std::sqrt(a_d * l2eff / (2.0 * mu_d * (N + 1)));
  } else {
    if (!prox.c_d) {
      throw std::invalid_argument(
          "quadratic-growth bounds need C(d); this prox-function has none");
    }
    if (*r <= 0.0 || *r > R) throw std::invalid_argument("need 0 < r <= R");
    const double c_d = *prox.c_d;
    out.gamma_star = (R * R / *r) * std::sqrt(l2eff / (2.0 * c_d * mu_d));
    out.f_gap_bound =
        *r * std::sqrt(2.0 * c_d * l2eff / (mu_d * (N + 1)));
  }
  out.dist_pow_bound = params.mu_f > 0.0
                           ? out.f_gap_bound / params.mu_f
                           : std::numeric_limits<double>::infinity();
  if (alpha) {
    if (*alpha <= 0.0 || *alpha >= 1.0) {
      throw std::invalid_argument("alpha must lie in (0,1)");
    }
    out.confidence_term =
        2.0 * R * params.sigma * std::sqrt(3.0 * std::log(1.0 / *alpha) / (N + 1));
  }
  return out;
}

}  // namespace ucmin
