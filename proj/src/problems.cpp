#include "ucmin/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ucmin {

namespace {

double lp_norm_p(const Vec& x, double p) {
  const double m = x.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  double acc = 0.0;
  for (Index i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x[i]) / m, p);
  return m * std::pow(acc, 1.0 / p);
}

}  // namespace

// ---------------------------------------------------------------------------
// PowerObjective
// ---------------------------------------------------------------------------

PowerObjective::PowerObjective(double rho, Vec x_star,
                               const ProxSetup& geometry,
                               std::optional<double> diameter_hint)
    : rho_(rho), x_star_(std::move(x_star)) {
  if (rho < 2.0) throw std::invalid_argument("power objective needs rho >= 2");
  if (!geometry.set.contains(x_star_, 1e-9)) {
    throw std::invalid_argument("power objective: x* must lie in Q");
  }
  double diam;
  if (geometry.set.kind == SetKind::FullSpace) {
    if (!diameter_hint) {
      throw std::invalid_argument(
          "power objective: unbounded Q needs a diameter hint");
    }
    diam = *diameter_hint;
  } else {
    diam = geometry.set.max_euclidean_dist(x_star_);
    if (diameter_hint) diam = std::max(diam, *diameter_hint);
  }
  const double scale = std::pow(2.0, rho - 3.0);
  params_.rho = rho;
  params_.L = scale * rho * std::pow(diam, rho - 1.0);
  // mu = 1 w.r.t. l2; convert to the geometry norm where needed
  const int n = geometry.set.n;
  params_.mu_f =
      geometry.norm.kind == NormKind::L2 ? 1.0 : std::pow(double(n), -rho / 2.0);
  params_.sigma = 0.0;
}

double PowerObjective::value(const Vec& x) const {
  return std::pow(2.0, rho_ - 3.0) * std::pow((x - x_star_).norm(), rho_);
}

Vec PowerObjective::gradient(const Vec& x) const {
  const Vec d = x - x_star_;
  const double nd = d.norm();
  if (nd == 0.0) return Vec::Zero(x.size());
  return std::pow(2.0, rho_ - 3.0) * rho_ * std::pow(nd, rho_ - 2.0) * d;
}

OracleResult PowerObjective::do_query(const Vec& x, long long) {
  OracleResult r;
  r.g = gradient(x);
  r.value = value(x);
  return r;
}

std::unique_ptr<PowerObjective> make_power_objective(
    double rho, Vec x_star, const ProxSetup& geometry,
    std::optional<double> diameter_hint) {
  return std::make_unique<PowerObjective>(rho, std::move(x_star), geometry,
                                          diameter_hint);
}

// ---------------------------------------------------------------------------
// SaddlePNorm
// ---------------------------------------------------------------------------

SaddlePNorm::SaddlePNorm(double q, const ProxSetup& geometry)
    : q_(q), p_(q / (q - 1.0)), geometry_(geometry) {
  if (q < 2.0) throw std::invalid_argument("saddle objective needs q >= 2");
  const int n = geometry.set.n;
  // max of ||x||_p over Q
  double xp_max;
  switch (geometry.set.kind) {
    case SetKind::L1Ball:
      xp_max = geometry.set.radius;
      break;
    case SetKind::Simplex:
      xp_max = 1.0;
      break;
    case SetKind::EuclideanBall:
      xp_max = std::pow(double(n), 1.0 / p_ - 0.5) * geometry.set.radius;
      break;
    default:
      throw std::invalid_argument("saddle objective: unsupported Q");
  }
  params_.rho = 2.0;
  // 0.5 ||x||_p^2 is (p-1)-strongly convex w.r.t. ||.||_p, p in (1,2]
  params_.mu_f = geometry.norm.kind == NormKind::L2
                     ? (p_ - 1.0)
                     : (p_ - 1.0) * std::pow(double(n), 2.0 * (1.0 - p_) / p_);
  // ||w(x)||_q = ||x||_p; convert to the dual of the geometry norm
  params_.L = geometry.norm.kind == NormKind::L2
                  ? std::pow(double(n), std::max(0.0, 0.5 - 1.0 / q_)) * xp_max
                  : xp_max;
  params_.sigma = 0.0;
}

double SaddlePNorm::value(const Vec& x) const {
  const double nx = lp_norm_p(x, p_);
  return 0.5 * nx * nx;
}

Vec SaddlePNorm::witness(const Vec& x) const {
  const double nx = lp_norm_p(x, p_);
  Vec w = Vec::Zero(x.size());
  if (nx == 0.0) return w;
  const double scale = std::pow(nx, (q_ - 2.0) / (q_ - 1.0));
  for (Index i = 0; i < x.size(); ++i) {
    w[i] = scale * std::pow(std::abs(x[i]), 1.0 / (q_ - 1.0)) *
           (x[i] >= 0.0 ? 1.0 : -1.0);
  }
  return w;
}

double SaddlePNorm::psi(const Vec& x, const Vec& w) const {
  const double nw = lp_norm_p(w, q_);
  return w.dot(x) - 0.5 * nw * nw;
}

double SaddlePNorm::eta(const Vec& w) const {
  const double nw = lp_norm_p(w, q_);
  switch (geometry_.set.kind) {
    case SetKind::L1Ball:
      return -geometry_.set.radius * w.cwiseAbs().maxCoeff() - 0.5 * nw * nw;
    case SetKind::Simplex:
      return w.minCoeff() - 0.5 * nw * nw;
    case SetKind::EuclideanBall:
      return -geometry_.set.radius * w.norm() - 0.5 * nw * nw;
    default:
      throw std::invalid_argument("eta: unsupported Q");
  }
}

double SaddlePNorm::f_star() const {
  const Vec zero = Vec::Zero(geometry_.set.n);
  if (geometry_.set.kind == SetKind::Simplex) {
    // min over the simplex of 0.5 ||x||_p^2 at the barycenter
    const double nx = lp_norm_p(Vec(Vec::Constant(geometry_.set.n,
                                                  1.0 / geometry_.set.n)),
                                p_);
    return 0.5 * nx * nx;
  }
  (void)zero;
  return 0.0;  // 0 lies in the ball sets
}

OracleResult SaddlePNorm::do_query(const Vec& x, long long) {
  OracleResult r;
  const Vec w = witness(x);
  r.g = w;  // f'(x) = Psi'_x(x, w(x)) = w(x)
  r.value = value(x);
  r.dual_witness = w;
  return r;
}

std::unique_ptr<SaddlePNorm> make_saddle_pnorm(double q,
                                               const ProxSetup& geometry) {
  return std::make_unique<SaddlePNorm>(q, geometry);
}

// ---------------------------------------------------------------------------
// PiecewisePlusPower
// ---------------------------------------------------------------------------

PiecewisePlusPower::PiecewisePlusPower(double L, double rho, int M,
                                       std::vector<int> signs,
                                       std::vector<double> offsets,
                                       double domain_radius, int n,
                                       std::optional<double> delta)
    : half_l_(0.5 * L),
      rho_(rho),
      m_(M),
      signs_(std::move(signs)),
      offsets_(std::move(offsets)) {
  if (M > n) throw std::invalid_argument("piecewise objective needs M <= n");
  if (rho < 2.0) throw std::invalid_argument("rho >= 2 required");
  if (static_cast<int>(signs_.size()) != M ||
      static_cast<int>(offsets_.size()) != M) {
    throw std::invalid_argument("signs/offsets must have length M");
  }
  for (int s : signs_) {
    if (s != 1 && s != -1) throw std::invalid_argument("signs must be +-1");
  }
  if (delta) {
    for (double d : offsets_) {
      if (d <= 0.0 || d >= *delta) {
        throw std::invalid_argument("offsets must satisfy 0 < d_i < delta");
      }
    }
  }
  const double lbound =
      std::pow(2.0, rho - 2.0) * rho * std::pow(domain_radius, rho - 1.0);
  if (L < lbound) {
    throw std::invalid_argument("piecewise objective: L >= 2^{rho-2} rho R^{rho-1} violated");
  }
  params_.rho = rho;
  params_.mu_f = 1.0;
  params_.L = L;  // |pieces| <= L/2, power part <= L/2 on the domain
}

int PiecewisePlusPower::active_piece(const Vec& x) const {
  int best = 0;
  double best_val = signs_[0] * x[0] + offsets_[0];
  for (int i = 1; i < m_; ++i) {
    const double v = signs_[i] * x[i] + offsets_[i];
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  return best;  // lowest index wins ties through strict improvement
}

double PiecewisePlusPower::value(const Vec& x) const {
  const int i = active_piece(x);
  return half_l_ * (signs_[i] * x[i] + offsets_[i]) +
         std::pow(2.0, rho_ - 3.0) * std::pow(x.norm(), rho_);
}

Vec PiecewisePlusPower::subgradient(const Vec& x) const {
  const int i = active_piece(x);
  Vec g = Vec::Zero(x.size());
  g[i] = half_l_ * signs_[i];
  const double nx = x.norm();
  if (nx > 0.0) {
    g += std::pow(2.0, rho_ - 3.0) * rho_ * std::pow(nx, rho_ - 2.0) * x;
  }
  return g;
}

OracleResult PiecewisePlusPower::do_query(const Vec& x, long long) {
  OracleResult r;
  r.g = subgradient(x);
  r.value = value(x);
  return r;
}

std::unique_ptr<PiecewisePlusPower> make_piecewise_plus_power(
    double L, double rho, int M, std::vector<int> signs,
    std::vector<double> offsets, double domain_radius, int n,
    std::optional<double> delta) {
  return std::make_unique<PiecewisePlusPower>(L, rho, M, std::move(signs),
                                              std::move(offsets), domain_radius,
                                              n, delta);
}

// ---------------------------------------------------------------------------
// Appendix bookkeeping
// ---------------------------------------------------------------------------

long long strict_floor_ll(double a) {
  return static_cast<long long>(std::ceil(a)) - 1;
}

long long appendix_query_budget(double eps, double L, double R, double rho,
                                int n) {
  const double tau = 2.0 * (rho - 1.0) / rho;
  const double a = L * L * R * R / (16.0 * eps * eps);
  const double b = L * L / (8.0 * std::pow(eps, tau));
  return std::min<long long>(n, strict_floor_ll(std::min(a, b)));
}

double appendix_delta(double eps, double L, double R, double rho, long long M) {
  const double a = L * R / (4.0 * std::sqrt(double(M)));
  const double b = std::pow(L, rho / (rho - 1.0)) /
                   (8.0 * std::pow(double(M), rho / (2.0 * (rho - 1.0))));
  return std::min(a, b) - eps;
}

double appendix_lambda(double L, double R, double rho, long long M) {
  const double a = R / std::sqrt(double(M));
  const double b = std::pow(
      std::pow(2.0, 2.0 - rho) * L / (rho * std::pow(double(M), rho / 2.0)),
      1.0 / (rho - 1.0));
  return std::min(a, b);
}

// ---------------------------------------------------------------------------
// ResistingOracle
// ---------------------------------------------------------------------------

ResistingOracle::ResistingOracle(double L, double rho, int M, double delta,
                                 double domain_radius, int n)
    : l_(L), rho_(rho), m_(M), delta_(delta), radius_(domain_radius), n_(n) {
  if (M > n) throw std::invalid_argument("resisting oracle needs M <= n");
  if (delta <= 0.0) throw std::invalid_argument("delta must be > 0");
  used_.assign(n, false);
}

void ResistingOracle::fix_next(const Vec& x) {
  // index of the largest-magnitude unused coordinate; lowest index on ties,
  // sign(0) = +1
  int best = -1;
  double best_mag = -1.0;
  for (int i = 0; i < n_; ++i) {
    if (used_[i]) continue;
    const double mag = std::abs(x[i]);
    if (mag > best_mag) {
      best_mag = mag;
      best = i;
    }
  }
  used_[best] = true;
  piece_index_.push_back(best);
  piece_sign_.push_back(x[best] >= 0.0 ? 1 : -1);
  piece_offset_.push_back(std::pow(2.0, -(fixed_ + 1)) * delta_);
  ++fixed_;
}

double ResistingOracle::evaluate(const Vec& x, Vec* grad) const {
  double best_val = -std::numeric_limits<double>::infinity();
  int best_k = 0;
  for (int k = 0; k < fixed_; ++k) {
    const double v = piece_sign_[k] * x[piece_index_[k]] + piece_offset_[k];
    if (v > best_val) {
      best_val = v;
      best_k = k;
    }
  }
  const double nx = x.norm();
  const double scale = std::pow(2.0, rho_ - 3.0);
  if (grad) {
    *grad = Vec::Zero(x.size());
    (*grad)[piece_index_[best_k]] = 0.5 * l_ * piece_sign_[best_k];
    if (nx > 0.0) {
      *grad += scale * rho_ * std::pow(nx, rho_ - 2.0) * x;
    }
  }
  return 0.5 * l_ * best_val + scale * std::pow(nx, rho_);
}

OracleResult ResistingOracle::do_query(const Vec& x, long long) {
  if (fixed_ < m_) fix_next(x);
  OracleResult r;
  r.value = evaluate(x, &r.g);
  return r;
}

double ResistingOracle::frozen_value(const Vec& x) const {
  if (fixed_ < m_) {
    throw std::logic_error("resisting oracle: instance not frozen yet");
  }
  return evaluate(x, nullptr);
}

Vec ResistingOracle::frozen_subgradient(const Vec& x) const {
  if (fixed_ < m_) {
    throw std::logic_error("resisting oracle: instance not frozen yet");
  }
  Vec g;
  evaluate(x, &g);
  return g;
}

Vec ResistingOracle::adversarial_point() const {
  if (fixed_ < m_) {
    throw std::logic_error("resisting oracle: instance not frozen yet");
  }
  const double lambda = appendix_lambda(l_, radius_, rho_, m_);
  Vec x = Vec::Zero(n_);
  for (int k = 0; k < m_; ++k) {
    x[piece_index_[k]] = -lambda * piece_sign_[k];
  }
  return x;
}

// ---------------------------------------------------------------------------
// Stochastic wrapper
// ---------------------------------------------------------------------------

double subgaussian_coordinate_scale(const NormPair& norm, double sigma) {
  switch (norm.kind) {
    case NormKind::L1:
      // dual norm is l-infinity
      return sigma / std::sqrt(2.0 * std::log(2.0 * norm.n));
    case NormKind::L2:
      // exact-e scaling shrunk for margin (keeps the MC statistic stable)
      return 0.85 * sigma *
             std::sqrt(0.5 * (1.0 - std::exp(-2.0 / norm.n)));
    default:
      throw std::invalid_argument("subgaussian scale: unsupported norm");
  }
}

StochasticOracle::StochasticOracle(FirstOrderOracle& base, NoiseModel noise,
                                   const NormPair& geometry_norm)
    : base_(base), noise_(noise), norm_(geometry_norm) {
  if (noise.sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
}

Vec StochasticOracle::draw_noise(std::uint64_t k) const {
  const int n = norm_.n;
  Vec xi = Vec::Zero(n);
  if (noise_.kind == NoiseKind::None || noise_.sigma == 0.0) return xi;
  CounterRng rng(CounterRng::derive(noise_.seed, k));
  switch (noise_.kind) {
    case NoiseKind::BoundedDualBall: {
      if (norm_.kind == NormKind::L2) {
        // uniform in the l2 ball of radius sigma
        for (int i = 0; i < n; ++i) xi[i] = rng.normal();
        const double nx = xi.norm();
        const double r =
            noise_.sigma * std::pow(rng.uniform_pos(), 1.0 / n);
        xi = nx > 0.0 ? Vec(xi * (r / nx)) : Vec::Zero(n);
      } else if (norm_.kind == NormKind::L1) {
        // dual ball is the cube [-sigma, sigma]^n
        for (int i = 0; i < n; ++i) {
          xi[i] = rng.uniform(-noise_.sigma, noise_.sigma);
        }
      } else {
        throw std::invalid_argument("noise: unsupported norm");
      }
      break;
    }
    case NoiseKind::SubGaussian: {
      const double s = subgaussian_coordinate_scale(norm_, noise_.sigma);
      for (int i = 0; i < n; ++i) xi[i] = s * rng.normal();
      break;
    }
    case NoiseKind::None:
      break;
  }
  return xi;
}

OracleResult StochasticOracle::do_query(const Vec& x, long long k) {
  OracleResult r = base_.query(x);
  r.g_exact = r.g;
  if (noise_.kind != NoiseKind::None && noise_.sigma > 0.0) {
    r.g = r.g + draw_noise(static_cast<std::uint64_t>(k));
  }
  return r;
}

std::unique_ptr<StochasticOracle> stochastic_wrap(
    FirstOrderOracle& base, NoiseModel noise, const NormPair& geometry_norm) {
  return std::make_unique<StochasticOracle>(base, noise, geometry_norm);
}

}  // namespace ucmin
