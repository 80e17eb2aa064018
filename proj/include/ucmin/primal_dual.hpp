#pragma once

#include "ucmin/problems.hpp"

namespace ucmin {

struct DualAggregate {
  Vec w_bar;
  long long count = 0;  // N_m + 1
  int stage = 0;
};

// Plain average of the dual witnesses collected along the final stage.
DualAggregate aggregate_dual(const std::vector<Vec>& last_stage_witnesses,
                             int stage_id);

// eta(w) = min_{x in Q} Psi(x, w), exact for the saddle family's supported Q.
double dual_value(const SaddlePNorm& problem, const Vec& w);

// C(rho) of the duality-gap certificate; the rho = 2 certificate uses the
// sharper 8.5 instead.
double certificate_constant(double rho);

struct GapCertificate {
  double gap = 0.0;    // f(x_hat) - eta(w_bar)
  double bound = 0.0;  // C(rho) eps (8.5 eps at rho = 2)
  bool pass = false;
  double f_at_x = 0.0;
  double eta_at_w = 0.0;
};

GapCertificate certify_gap(const SaddlePNorm& problem, const Vec& x_hat,
                           const Vec& w_bar, double eps, double rho);

}  // namespace ucmin
