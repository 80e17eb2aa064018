#include "ucmin/primal_dual.hpp"

#include <cmath>
#include <stdexcept>

namespace ucmin {

DualAggregate aggregate_dual(const std::vector<Vec>& last_stage_witnesses,
                             int stage_id) {
  if (last_stage_witnesses.empty()) {
    throw std::invalid_argument("aggregate_dual: no witnesses collected");
  }
  KahanVec acc(last_stage_witnesses.front().size());
  for (const Vec& w : last_stage_witnesses) acc.add(w);
  DualAggregate out;
  out.w_bar = acc.value() / double(last_stage_witnesses.size());
  out.count = static_cast<long long>(last_stage_witnesses.size());
  out.stage = stage_id;
  return out;
}

double dual_value(const SaddlePNorm& problem, const Vec& w) {
  return problem.eta(w);
}

double certificate_constant(double rho) {
  if (rho < 2.0) throw std::invalid_argument("rho >= 2 required");
  const double rm1 = rho - 1.0;
  return 1.0 +
         3.0 *
             (std::pow(6.0, 1.0 / rm1) +
              std::pow(2.0, 1.0 / rho) * std::pow(rho, 1.0 / rm1)) /
             std::pow(rho, rho / rm1) +
         6.0 / (std::pow(2.0, rm1 / rho) * rho);
}

GapCertificate certify_gap(const SaddlePNorm& problem, const Vec& x_hat,
                           const Vec& w_bar, double eps, double rho) {
  GapCertificate out;
  out.f_at_x = problem.value(x_hat);
  out.eta_at_w = problem.eta(w_bar);
  out.gap = out.f_at_x - out.eta_at_w;
  out.bound = (rho == 2.0 ? 8.5 : certificate_constant(rho)) * eps;
  out.pass = out.gap <= out.bound;
  return out;
}

}  // namespace ucmin
