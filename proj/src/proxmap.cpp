#include "ucmin/proxmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace ucmin {

namespace {

constexpr double kFloor = 1e-300;
constexpr double kCap = 1e30;
constexpr double kFeasTol = 1e-10;
constexpr double kDegenerateR = 1e-14;

double clamp_uv(double x) { return std::clamp(x, 0.0, kCap); }

double safe_exp(double a) { return clamp_uv(std::exp(std::min(a, 700.0))); }

void require_finite(const Vec& s) {
  if (!s.allFinite()) throw std::invalid_argument("non-finite dual vector");
}

double psi(double t) { return t > 0.0 ? t * std::log(t) : 0.0; }

}  // namespace

// ---------------------------------------------------------------------------
// FeasibleSet
// ---------------------------------------------------------------------------

FeasibleSet FeasibleSet::full_space(int n) {
  FeasibleSet q;
  q.kind = SetKind::FullSpace;
  q.n = n;
  return q;
}

FeasibleSet FeasibleSet::euclidean_ball(int n, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("ball radius must be > 0");
  FeasibleSet q;
  q.kind = SetKind::EuclideanBall;
  q.n = n;
  q.radius = radius;
  return q;
}

FeasibleSet FeasibleSet::simplex(int n) {
  if (n < 1) throw std::invalid_argument("simplex needs n >= 1");
  FeasibleSet q;
  q.kind = SetKind::Simplex;
  q.n = n;
  return q;
}

FeasibleSet FeasibleSet::l1_ball(int n, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("ball radius must be > 0");
  FeasibleSet q;
  q.kind = SetKind::L1Ball;
  q.n = n;
  q.radius = radius;
  return q;
}

FeasibleSet FeasibleSet::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || ((hi - lo).array() < 0.0).any()) {
    throw std::invalid_argument("invalid box bounds");
  }
  FeasibleSet q;
  q.kind = SetKind::Box;
  q.n = static_cast<int>(lo.size());
  q.lo = std::move(lo);
  q.hi = std::move(hi);
  return q;
}

bool FeasibleSet::contains(const Vec& x, double tol) const {
  if (x.size() != n) return false;
  switch (kind) {
    case SetKind::FullSpace:
      return true;
    case SetKind::EuclideanBall:
      return x.norm() <= radius + tol;
    case SetKind::Simplex:
      return x.minCoeff() >= -tol && std::abs(x.sum() - 1.0) <= tol;
    case SetKind::L1Ball:
      return x.cwiseAbs().sum() <= radius + tol;
    case SetKind::Box:
      return ((x - lo).array() >= -tol).all() &&
             ((hi - x).array() >= -tol).all();
  }
  return false;
}

Vec project_simplex(const Vec& y) {
  const Index n = y.size();
  std::vector<double> u(y.data(), y.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0;
  double tau = 0.0;
  int rho = 0;
  for (Index j = 0; j < n; ++j) {
    css += u[j];
    const double t = (css - 1.0) / double(j + 1);
    if (u[j] - t > 0.0) {
      rho = int(j + 1);
      tau = t;
    }
  }
  (void)rho;
  return (y.array() - tau).max(0.0);
}

Vec project_l1_ball(const Vec& y, double radius) {
  if (y.cwiseAbs().sum() <= radius) return y;
  const Vec a = y.cwiseAbs();
  std::vector<double> u(a.data(), a.data() + a.size());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0;
  double theta = 0.0;
  for (size_t j = 0; j < u.size(); ++j) {
    css += u[j];
    const double t = (css - radius) / double(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  Vec out(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    const double m = std::max(std::abs(y[i]) - theta, 0.0);
    out[i] = y[i] >= 0.0 ? m : -m;
  }
  return out;
}

Vec FeasibleSet::project_euclidean(const Vec& y) const {
  switch (kind) {
    case SetKind::FullSpace:
      return y;
    case SetKind::EuclideanBall: {
      const double ny = y.norm();
      return ny <= radius ? y : Vec(y * (radius / ny));
    }
    case SetKind::Simplex:
      return project_simplex(y);
    case SetKind::L1Ball:
      return project_l1_ball(y, radius);
    case SetKind::Box:
      return y.cwiseMax(lo).cwiseMin(hi);
  }
  return y;
}

Vec FeasibleSet::center_point() const {
  switch (kind) {
    case SetKind::FullSpace:
    case SetKind::EuclideanBall:
    case SetKind::L1Ball:
      return Vec::Zero(n);
    case SetKind::Simplex:
      return Vec::Constant(n, 1.0 / n);
    case SetKind::Box:
      return 0.5 * (lo + hi);
  }
  return Vec::Zero(n);
}

double FeasibleSet::max_euclidean_dist(const Vec& x0) const {
  switch (kind) {
    case SetKind::FullSpace:
      throw std::invalid_argument("max_euclidean_dist: unbounded set");
    case SetKind::EuclideanBall:
      return radius + x0.norm();
    case SetKind::Simplex: {
      double best = 0.0;
      for (int i = 0; i < n; ++i) {
        Vec v = Vec::Zero(n);
        v[i] = 1.0;
        best = std::max(best, (v - x0).norm());
      }
      return best;
    }
    case SetKind::L1Ball: {
      double best = 0.0;
      for (int i = 0; i < n; ++i) {
        Vec v = Vec::Zero(n);
        v[i] = radius;
        best = std::max(best, (v - x0).norm());
        v[i] = -radius;
        best = std::max(best, (v - x0).norm());
      }
      return best;
    }
    case SetKind::Box: {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        const double a = lo[i] - x0[i];
        const double b = hi[i] - x0[i];
        acc += std::max(a * a, b * b);
      }
      return std::sqrt(acc);
    }
  }
  return 0.0;
}

const char* FeasibleSet::name() const {
  switch (kind) {
    case SetKind::FullSpace:
      return "fullspace";
    case SetKind::EuclideanBall:
      return "ball";
    case SetKind::Simplex:
      return "simplex";
    case SetKind::L1Ball:
      return "l1ball";
    case SetKind::Box:
      return "box";
  }
  return "?";
}

ProxSetup ProxSetup::make(ProxKind prox_kind, const FeasibleSet& set,
                          double p) {
  ProxSetup su;
  su.prox = ProxFunction::make(prox_kind, set.n, p);
  su.norm = su.prox.paired_norm();
  su.set = set;
  return su;
}

LocalProblem::LocalProblem(ProxSetup setup_, Vec z_, double R_, double beta_)
    : setup(std::move(setup_)), z(std::move(z_)), R(R_), beta(beta_) {
  if (R <= 0.0) throw std::invalid_argument("LocalProblem: R must be > 0");
  if (beta <= 0.0) throw std::invalid_argument("LocalProblem: beta must be > 0");
  if (z.size() != setup.set.n) {
    throw std::invalid_argument("LocalProblem: center dimension mismatch");
  }
  if (!setup.set.contains(z, kFeasTol)) {
    throw std::invalid_argument("LocalProblem: infeasible center");
  }
}

LocalProblem LocalProblem::with_beta(double b) const {
  return LocalProblem(setup, z, R, b);
}

// ---------------------------------------------------------------------------
// Dykstra projection onto Q ∩ B_R(z)
// ---------------------------------------------------------------------------

namespace {

Vec project_trust_ball(const NormPair& ball_norm, const Vec& z, double R,
                       const Vec& y) {
  const Vec d = y - z;
  switch (ball_norm.kind) {
    case NormKind::L2: {
      const double nd = d.norm();
      return nd <= R ? y : Vec(z + d * (R / nd));
    }
    case NormKind::L1:
      return z + project_l1_ball(d, R);
    default:
      throw std::invalid_argument("unsupported trust-ball norm");
  }
}

}  // namespace

Vec project_intersection(const FeasibleSet& set, const NormPair& ball_norm,
                         const Vec& z, double R, const Vec& y) {
  if (set.kind == SetKind::FullSpace) return project_trust_ball(ball_norm, z, R, y);
  // Dykstra's alternating projections with correction terms. The iterate is
  // exact on the trust ball after each round; stop only once Q-membership is
  // met as well (movement alone can flatline while the corrections charge).
  Vec x = y;
  Vec p = Vec::Zero(y.size());
  Vec q = Vec::Zero(y.size());
  const double scale = 1.0 + y.norm();
  for (int it = 0; it < 100000; ++it) {
    const Vec ya = set.project_euclidean(x + p);
    p = x + p - ya;
    const Vec xn = project_trust_ball(ball_norm, z, R, ya + q);
    q = ya + q - xn;
    const double move = (xn - x).norm();
    x = xn;
    if (move <= 1e-14 * scale && set.contains(x, 1e-12 * scale) && it > 2) {
      return x;
    }
  }
  // cap hit: settle for a feasible point by plain alternating projections
  for (int it = 0; it < 1000; ++it) {
    const Vec xn = project_trust_ball(ball_norm, z, R, set.project_euclidean(x));
    const double move = (xn - x).norm();
    x = xn;
    if (move <= 1e-15 * scale && set.contains(x, 1e-11 * scale)) break;
  }
  return x;
}

// ---------------------------------------------------------------------------
// 2d entropy subproblem
// ---------------------------------------------------------------------------

double entropy2d_objective(double s, double t, double u, double v) {
  return s * u + t * v + psi(u) + psi(v);
}

Entropy2D solve_2d_entropy(double s, double t, double z) {
  if (!std::isfinite(s) || !std::isfinite(t) || !std::isfinite(z)) {
    throw std::invalid_argument("solve_2d_entropy: non-finite input");
  }
  const double ln_w = -2.0 - s - t;  // ln(u v) on the equality branch
  // sqrt(w), capped so q and the pair stay representable
  const double root_w = std::exp(std::min(0.5 * ln_w, 69.0));
  const double q = std::hypot(z, 2.0 * root_w);

  double u_eq, v_eq;
  if (z >= 0.0) {
    v_eq = 0.5 * (q + z);
    u_eq = v_eq > 0.0 ? (root_w * root_w) / v_eq : 0.0;
  } else {
    u_eq = 0.5 * (q - z);
    v_eq = u_eq > 0.0 ? (root_w * root_w) / u_eq : 0.0;
  }

  // psi'_u + psi'_v = s + t + 2 + ln(u v) = 0 holds identically on the
  // equality pair; the decisive test is psi'_u - psi'_v = s - t + ln(u/v) > 0,
  // evaluated in logs.
  double log_ratio;
  if (z == 0.0) {
    log_ratio = 0.0;
  } else if (z > 0.0) {
    log_ratio = std::log(4.0) + ln_w - 2.0 * std::log(q + z);
  } else {
    log_ratio = 2.0 * std::log(q - z) - std::log(4.0) - ln_w;
  }
  const double grad_diff = (s - t) + log_ratio;
  if (grad_diff > 0.0) {
    return {clamp_uv(u_eq), clamp_uv(v_eq), true};
  }
  return {safe_exp(-1.0 - s), safe_exp(-1.0 - t), false};
}

// ---------------------------------------------------------------------------
// Scalar root helpers (monotone decreasing residuals)
// ---------------------------------------------------------------------------

namespace {

struct RootResult {
  double x;
  bool ok;
};

// Root of a nonincreasing residual: expand a bracket around `center` by
// doubling (cap 1000 expansions), then bisect to width `tol` (max 200 its).
template <typename F>
RootResult solve_decreasing(F&& resid, double center, double tol) {
  double lo = center - 1.0;
  double hi = center + 1.0;
  double f_lo = resid(lo);
  double f_hi = resid(hi);
  if (std::isnan(f_lo) || std::isnan(f_hi)) return {center, false};
  double w = 1.0;
  for (int it = 0; it < 1000 && f_lo < 0.0; ++it) {
    hi = lo;
    f_hi = f_lo;
    w *= 2.0;
    lo = center - w;
    f_lo = resid(lo);
    if (std::isnan(f_lo)) return {center, false};
  }
  w = std::max(w, 1.0);
  for (int it = 0; it < 1000 && f_hi > 0.0; ++it) {
    lo = hi;
    f_lo = f_hi;
    w *= 2.0;
    hi = center + w;
    f_hi = resid(hi);
    if (std::isnan(f_hi)) return {center, false};
  }
  if (f_lo < 0.0 || f_hi > 0.0) return {center, false};
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= tol * (1.0 + std::abs(mid))) break;
    const double fm = resid(mid);
    if (fm >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), true};
}

}  // namespace

// ---------------------------------------------------------------------------
// Simplex setup: two-multiplier dual with a closed-form inner level
// ---------------------------------------------------------------------------

namespace {

// Per-coordinate pieces at gain-scaled sigma = -(R/beta) s. The inner
// multiplier nu (affine constraint sum(x) = 1) is solved exactly for fixed
// lambda by partitioning coordinates into equality/interior branches; the
// outer level bisects on lambda (sum(u+v) = R).
struct SimplexInner {
  double nu;
  double resid_sum;  // sum(u+v) - R at the solved nu
  bool ok;
};

SimplexInner simplex_inner_solve(const Vec& sigma, const Vec& z, double lam,
                                 double R) {
  const Index n = sigma.size();
  const double ln_w = -2.0 - 2.0 * lam;
  const double root_w = std::exp(std::min(0.5 * ln_w, 69.0));

  // Equality-branch threshold in nu and branch-constant contributions.
  // Coordinate i is on the equality branch iff nu > theta_i.
  std::vector<double> theta(n), q(n);
  for (Index i = 0; i < n; ++i) {
    const double zi = z[i];  // simplex center: zi >= 0
    const double qi = std::hypot(zi, 2.0 * root_w);
    q[i] = qi;
    double log_ratio;
    if (zi <= 0.0) {
      log_ratio = 0.0;
    } else {
      log_ratio = std::log(4.0) + ln_w - 2.0 * std::log(qi + zi);
    }
    theta[i] = -sigma[i] - 0.5 * log_ratio;
  }
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index(0));
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return theta[a] < theta[b]; });

  // Suffix log-sum-exp of exp(-sigma) and exp(+sigma) over interior sets
  // (interior = coordinates k..n-1 in sorted order when nu <= theta_(k)).
  std::vector<double> lse_neg(n + 1), lse_pos(n + 1);
  lse_neg[n] = lse_pos[n] = -std::numeric_limits<double>::infinity();
  for (Index k = n - 1; k >= 0; --k) {
    const double sn = -sigma[order[k]];
    const double sp = sigma[order[k]];
    lse_neg[k] = std::max(lse_neg[k + 1], sn) +
                 std::log(std::exp(std::min(lse_neg[k + 1], sn) -
                                   std::max(lse_neg[k + 1], sn)) +
                          1.0);
    lse_pos[k] = std::max(lse_pos[k + 1], sp) +
                 std::log(std::exp(std::min(lse_pos[k + 1], sp) -
                                   std::max(lse_pos[k + 1], sp)) +
                          1.0);
    if (!std::isfinite(lse_neg[k + 1])) lse_neg[k] = sn;
    if (!std::isfinite(lse_pos[k + 1])) lse_pos[k] = sp;
  }

  const double lnE = -1.0 - lam;
  // Partition with the first k sorted coordinates on the equality branch:
  // residual_nu(nu) = E [A_k e^{-nu} - B_k e^{nu}] - C_k, with C_k the
  // equality-set sum of z (equality pairs contribute u - v = -z).
  double c_prefix = 0.0;
  for (Index k = 0; k < n; ++k) {
    const double lnA = lse_neg[k];
    const double lnB = lse_pos[k];
    double nu;
    if (c_prefix <= 0.0) {
      nu = 0.5 * (lnA - lnB);
    } else {
      // E B y^2 + C y - E A = 0, y = e^nu > 0
      const double lnG = 2.0 * lnE + lnA + lnB + std::log(4.0);  // ln(4 E^2 A B)
      const double h = lnG - 2.0 * std::log(c_prefix);
      double log_y;
      if (h > 80.0) {
        log_y = std::log(c_prefix) + 0.5 * h - std::log(2.0) - lnE - lnB;
      } else {
        log_y = std::log(c_prefix) + h - std::log1p(std::sqrt(1.0 + std::exp(h))) -
                std::log(2.0) - lnE - lnB;
      }
      nu = log_y;
    }
    const double lo_edge = k == 0 ? -std::numeric_limits<double>::infinity()
                                  : theta[order[k - 1]];
    const double hi_edge = theta[order[k]];
    if (nu > lo_edge - 1e-12 && nu <= hi_edge + 1e-12) {
      // consistent partition; assemble sum(u+v)
      double total = 0.0;
      for (Index j = 0; j < k; ++j) total += q[order[j]];
      total += std::exp(std::min(lnE + lnA - nu, 69.0)) +
               std::exp(std::min(lnE + lnB + nu, 69.0));
      return {nu, total - R, true};
    }
    c_prefix += z[order[k]];
  }
  return {0.0, 0.0, false};
}

}  // namespace

EntropyDualSolution simplex_prox_dual_full(const LocalProblem& lp,
                                           const Vec& s) {
  require_finite(s);
  if (lp.setup.set.kind != SetKind::Simplex ||
      lp.setup.prox.kind != ProxKind::EntropySym) {
    throw std::invalid_argument("simplex_prox_dual: needs Simplex + EntropySym");
  }
  const Index n = s.size();
  if (lp.R <= kDegenerateR) {
    return {lp.z, 0.0, 0.0, 0.0, 0.0};
  }
  const Vec sigma = -(lp.R / lp.beta) * s;

  auto inner = [&](double lam) -> SimplexInner {
    SimplexInner fast = simplex_inner_solve(sigma, lp.z, lam, lp.R);
    if (fast.ok) return fast;
    // fallback: bisection on nu with literal per-coordinate solves
    auto resid_nu = [&](double nu) {
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        const Entropy2D e =
            solve_2d_entropy(sigma[i] + lam + nu, -sigma[i] + lam - nu, lp.z[i]);
        acc += e.u - e.v;
      }
      return acc;
    };
    const RootResult r = solve_decreasing(resid_nu, 0.0, 1e-12);
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      const Entropy2D e = solve_2d_entropy(sigma[i] + lam + r.x,
                                           -sigma[i] + lam - r.x, lp.z[i]);
      total += e.u + e.v;
    }
    return {r.x, total - lp.R, r.ok};
  };

  // residual sum(u+v) - R is decreasing in lambda
  auto resid_outer = [&](double lam) { return inner(lam).resid_sum; };
  const double lam0 = std::log(2.0 * n / lp.R) - 1.0;
  const RootResult root = solve_decreasing(resid_outer, lam0, 1e-12);
  if (!root.ok) {
    throw std::runtime_error("simplex_prox_dual: outer bracketing failed");
  }
  const double lam = root.x;
  const double nu = inner(lam).nu;

  Vec x(n);
  double sum_uv = 0.0, sum_x = 0.0, primal = 0.0, dual = -lam * lp.R;
  for (Index i = 0; i < n; ++i) {
    const double a = sigma[i] + lam + nu;
    const double b = -sigma[i] + lam - nu;
    const Entropy2D e = solve_2d_entropy(a, b, lp.z[i]);
    x[i] = lp.z[i] + e.u - e.v;
    sum_uv += e.u + e.v;
    sum_x += x[i];
    primal += sigma[i] * (e.u - e.v) + psi(e.u) + psi(e.v);
    dual += entropy2d_objective(a, b, e.u, e.v);
  }
  if (std::abs(sum_uv - lp.R) > 1e-8 * (1.0 + lp.R) ||
      std::abs(sum_x - 1.0) > 1e-8) {
    throw std::runtime_error(
        "simplex_prox_dual: dual solve did not converge (|sum(u+v)-R|=" +
        std::to_string(std::abs(sum_uv - lp.R)) +
        ", |sum(x)-1|=" + std::to_string(std::abs(sum_x - 1.0)) + ")");
  }
  // feasibility cleanup within tolerance
  for (Index i = 0; i < n; ++i) x[i] = std::max(x[i], 0.0);
  x /= x.sum();
  return {std::move(x), lam, nu, primal, dual};
}

Vec simplex_prox_dual(const LocalProblem& lp, const Vec& s) {
  return simplex_prox_dual_full(lp, s).x;
}

// ---------------------------------------------------------------------------
// Hyperoctahedron setup
// ---------------------------------------------------------------------------

namespace {

struct HyperoctCoord {
  double u, v, w, y;
  double value;  // per-coordinate Lagrangian minimum (enters the dual value)
};

// min over one coordinate: sigma(u-v) + lam(u+v) + nu(w+y) + psi(u) + psi(v)
// s.t. w - y = z + u - v, w, y >= 0. Either w or y vanishes; compare the two
// reduced problems (ties prefer the w-branch).
HyperoctCoord hyperoct_coord(double sigma, double z, double lam, double nu) {
  const Entropy2D ew =
      solve_2d_entropy(sigma + lam + nu, -sigma + lam - nu, z);
  const double val_w =
      entropy2d_objective(sigma + lam + nu, -sigma + lam - nu, ew.u, ew.v) +
      nu * z;
  const Entropy2D ey =
      solve_2d_entropy(-sigma + lam + nu, sigma + lam - nu, -z);
  // ey solves the swapped problem; translate back: (u, v) = (ey.v, ey.u)
  const double val_y =
      entropy2d_objective(sigma + lam - nu, -sigma + lam + nu, ey.v, ey.u) -
      nu * z;
  if (val_w <= val_y) {
    const double w = std::max(z + ew.u - ew.v, 0.0);
    return {ew.u, ew.v, w, 0.0, val_w};
  }
  const double u = ey.v, v = ey.u;
  const double yy = std::max(-(z + u - v), 0.0);
  return {u, v, 0.0, yy, val_y};
}

}  // namespace

EntropyDualSolution hyperoct_prox_dual_full(const LocalProblem& lp,
                                            const Vec& s) {
  require_finite(s);
  if (lp.setup.set.kind != SetKind::L1Ball ||
      lp.setup.prox.kind != ProxKind::EntropySym) {
    throw std::invalid_argument("hyperoct_prox_dual: needs L1Ball + EntropySym");
  }
  const Index n = s.size();
  if (lp.R <= kDegenerateR) {
    return {lp.z, 0.0, 0.0, 0.0, 0.0};
  }
  const double rq = lp.setup.set.radius;
  const Vec sigma = -(lp.R / lp.beta) * s;

  // inner: nu >= 0 enforces sum(w+y) = rq (as ||x||_1 <= rq with slack);
  // residual decreasing in nu. For nu < 0 the reduced per-coordinate problem
  // is unbounded, so the root is clamped at 0 when the constraint is slack.
  auto inner_nu = [&](double lam) -> RootResult {
    auto resid_nu = [&](double nu) {
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        const HyperoctCoord c = hyperoct_coord(sigma[i], lp.z[i], lam, nu);
        acc += c.w + c.y;
      }
      return acc - rq;
    };
    if (resid_nu(0.0) <= 0.0) return {0.0, true};
    RootResult r =
        solve_decreasing(resid_nu, std::log(2.0 * n / rq) - 1.0, 1e-12);
    r.x = std::max(r.x, 0.0);
    return r;
  };

  auto resid_lam = [&](double lam) {
    const RootResult r = inner_nu(lam);
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
      const HyperoctCoord c = hyperoct_coord(sigma[i], lp.z[i], lam, r.x);
      acc += c.u + c.v;
    }
    return acc - lp.R;
  };
  const double lam0 = std::log(2.0 * n / lp.R) - 1.0;
  const RootResult root = solve_decreasing(resid_lam, lam0, 1e-12);
  if (!root.ok) {
    throw std::runtime_error("hyperoct_prox_dual: outer bracketing failed");
  }
  const double lam = root.x;
  const RootResult rn = inner_nu(lam);
  const double nu = rn.x;

  Vec x(n);
  double sum_uv = 0.0, sum_wy = 0.0, primal = 0.0;
  double dual = -lam * lp.R - nu * rq;
  for (Index i = 0; i < n; ++i) {
    const HyperoctCoord c = hyperoct_coord(sigma[i], lp.z[i], lam, nu);
    x[i] = c.w - c.y;
    sum_uv += c.u + c.v;
    sum_wy += c.w + c.y;
    primal += sigma[i] * (c.u - c.v) + psi(c.u) + psi(c.v);
    dual += c.value;
  }
  // with nu = 0 the l1 constraint is slack: sum(w+y) only needs to reach rq
  // after distributing free slack, i.e. sum|x| <= rq suffices
  const double wy_resid =
      nu > 0.0 ? std::abs(sum_wy - rq) : std::max(sum_wy - rq, 0.0);
  if (std::abs(sum_uv - lp.R) > 1e-8 * (1.0 + lp.R) ||
      wy_resid > 1e-8 * (1.0 + rq)) {
    throw std::runtime_error(
        "hyperoct_prox_dual: dual solve did not converge (|sum(u+v)-R|=" +
        std::to_string(std::abs(sum_uv - lp.R)) +
        ", |sum(w+y)-rq|=" + std::to_string(wy_resid) + ")");
  }
  const double l1 = x.cwiseAbs().sum();
  if (l1 > rq) x *= rq / l1;
  return {std::move(x), lam, nu, primal, dual};
}

Vec hyperoct_prox_dual(const LocalProblem& lp, const Vec& s) {
  return hyperoct_prox_dual_full(lp, s).x;
}

// ---------------------------------------------------------------------------
// Entropy prox over the bare trust ball (Q = full space)
// ---------------------------------------------------------------------------

namespace {

Vec entropy_fullspace_prox(const LocalProblem& lp, const Vec& s) {
  // x = z + R sinh(c_i) / sum_j cosh(c_j), c = (R/beta) s
  const Vec c = (lp.R / lp.beta) * s;
  const double m = c.cwiseAbs().maxCoeff();
  double denom = 0.0;
  for (Index i = 0; i < c.size(); ++i) {
    denom += std::exp(c[i] - m) + std::exp(-c[i] - m);
  }
  Vec x(c.size());
  for (Index i = 0; i < c.size(); ++i) {
    const double num = std::exp(c[i] - m) - std::exp(-c[i] - m);
    x[i] = lp.z[i] + lp.R * num / denom;
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// Exact support function
// ---------------------------------------------------------------------------

namespace {

SupportResult support_l2_two_balls(const FeasibleSet& q, const Vec& z, double R,
                                   const Vec& s) {
  const double r = q.radius;
  const double ns = s.norm();
  const Vec shat = s / ns;
  // candidate on the boundary of Q
  Vec c1 = r * shat;
  if ((c1 - z).norm() <= R * (1.0 + 1e-12)) {
    return {s.dot(c1 - z), c1};
  }
  // candidate on the boundary of the trust ball
  Vec c2 = z + R * shat;
  if (c2.norm() <= r * (1.0 + 1e-12)) {
    return {s.dot(c2 - z), c2};
  }
  const double nz = z.norm();
  if (nz <= 1e-15) {
    // concentric: feasible region is the smaller ball
    const double rr = std::min(r, R);
    Vec c = rr * shat;
    return {s.dot(c - z), c};
  }
  // on the intersection sphere: ||x|| = r, ||x - z|| = R
  const Vec e1 = z / nz;
  const double a = (r * r - R * R + nz * nz) / (2.0 * nz);
  double b2 = r * r - a * a;
  if (b2 < 0.0) b2 = 0.0;
  const double s1 = s.dot(e1);
  Vec s_perp = s - s1 * e1;
  const double nsp = s_perp.norm();
  Vec x;
  if (nsp <= 1e-15 * ns) {
    // s parallel to z: any point of the circle attains the max; build a
    // deterministic orthogonal direction
    Vec e2 = Vec::Zero(z.size());
    Index k = 0;
    z.cwiseAbs().minCoeff(&k);
    e2[k] = 1.0;
    e2 -= e2.dot(e1) * e1;
    if (e2.norm() <= 1e-12) {
      e2 = Vec::Zero(z.size());
      e2[(k + 1) % z.size()] = 1.0;
      e2 -= e2.dot(e1) * e1;
    }
    e2.normalize();
    x = a * e1 + std::sqrt(b2) * e2;
  } else {
    x = a * e1 + std::sqrt(b2) * (s_perp / nsp);
  }
  return {s.dot(x - z), x};
}

SupportResult support_simplex_l1(const Vec& z, double R, const Vec& s) {
  const Index n = s.size();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return s[a] < s[b]; });
  Vec x = z;
  double budget = 0.5 * R;  // each unit of transported mass costs 2 in l1
  Index lo = 0, hi = n - 1;
  double donor_left = z[order[lo]];
  double recv_left = 1.0 - z[order[hi]];
  while (budget > 0.0 && lo < hi) {
    const double gain = s[order[hi]] - s[order[lo]];
    if (gain <= 0.0) break;
    const double amt = std::min({budget, donor_left, recv_left});
    if (amt > 0.0) {
      x[order[lo]] -= amt;
      x[order[hi]] += amt;
      budget -= amt;
      donor_left -= amt;
      recv_left -= amt;
    }
    if (donor_left <= 0.0) {
      ++lo;
      if (lo < hi) donor_left = z[order[lo]];
    }
    if (recv_left <= 0.0) {
      --hi;
      if (lo < hi) recv_left = 1.0 - z[order[hi]];
    }
  }
  return {s.dot(x - z), x};
}

SupportResult support_l1ball_l1(const FeasibleSet& q, const Vec& z, double R,
                                const Vec& s) {
  const Index n = s.size();
  // sign-normalize so the effective linear coefficients are >= 0
  Vec sg(n), zz(n), sa(n);
  for (Index i = 0; i < n; ++i) {
    sg[i] = s[i] >= 0.0 ? 1.0 : -1.0;
    sa[i] = std::abs(s[i]);
    zz[i] = sg[i] * z[i];
  }
  Index istar = 0;
  sa.maxCoeff(&istar);
  for (Index i = 0; i < istar; ++i) {
    if (sa[i] == sa[istar]) {
      istar = i;
      break;
    }
  }
  // donors: move coordinates toward 0; release gain per unit:
  //   zz_j < 0 -> +sa_j, zz_j > 0 -> -sa_j. Receiver i* excluded as a donor
  // unless its own mass sits on the wrong side (zz < 0).
  struct Donor {
    Index j;
    double gain;
    double cap;
  };
  std::vector<Donor> donors;
  donors.reserve(n);
  for (Index j = 0; j < n; ++j) {
    if (zz[j] == 0.0) continue;
    if (j == istar && zz[j] > 0.0) continue;
    donors.push_back({j, zz[j] < 0.0 ? sa[j] : -sa[j], std::abs(zz[j])});
  }
  std::stable_sort(donors.begin(), donors.end(),
                   [](const Donor& a, const Donor& b) { return a.gain > b.gain; });

  const double m0 = std::max(q.radius - z.cwiseAbs().sum(), 0.0);
  auto recv = [&](double t) { return std::max(0.0, std::min(R - t, m0 + t)); };

  // F(t) = donated-prefix gain + sa[i*] * recv(t): piecewise-linear concave;
  // evaluate at every breakpoint.
  double cap_total = 0.0;
  for (const Donor& d : donors) cap_total += d.cap;
  const double t_max = std::min(R, cap_total);
  std::vector<double> breaks = {0.0, t_max};
  double acc = 0.0;
  for (const Donor& d : donors) {
    acc += d.cap;
    if (acc < t_max) breaks.push_back(acc);
  }
  const double kink = 0.5 * (R - m0);
  if (kink > 0.0 && kink < t_max) breaks.push_back(kink);
  std::sort(breaks.begin(), breaks.end());

  auto gain_at = [&](double t) {
    double g = 0.0, used = 0.0;
    for (const Donor& d : donors) {
      const double a = std::min(d.cap, t - used);
      if (a <= 0.0) break;
      g += d.gain * a;
      used += a;
    }
    return g + sa[istar] * recv(t);
  };
  double best_t = 0.0, best_val = gain_at(0.0);
  for (double t : breaks) {
    const double val = gain_at(t);
    if (val > best_val + 1e-15 * (1.0 + std::abs(best_val))) {
      best_val = val;
      best_t = t;
    }
  }
  // reconstruct
  Vec x = zz;
  double used = 0.0;
  for (const Donor& d : donors) {
    const double a = std::min(d.cap, best_t - used);
    if (a <= 0.0) break;
    x[d.j] += zz[d.j] < 0.0 ? a : -a;
    used += a;
  }
  x[istar] += recv(best_t);
  Vec out(n);
  for (Index i = 0; i < n; ++i) out[i] = sg[i] * x[i];
  return {s.dot(out - z), out};
}

SupportResult support_box_l1(const FeasibleSet& q, const Vec& z, double R,
                             const Vec& s) {
  const Index n = s.size();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(s[a]) > std::abs(s[b]);
  });
  Vec x = z;
  double budget = R;
  for (Index k = 0; k < n && budget > 0.0; ++k) {
    const Index i = order[k];
    if (s[i] == 0.0) break;
    const double room =
        s[i] > 0.0 ? q.hi[i] - z[i] : z[i] - q.lo[i];
    const double amt = std::min(budget, std::max(room, 0.0));
    x[i] += (s[i] > 0.0 ? amt : -amt);
    budget -= amt;
  }
  return {s.dot(x - z), x};
}

}  // namespace

bool support_available(const ProxSetup& setup) {
  switch (setup.norm.kind) {
    case NormKind::L2:
      return setup.set.kind == SetKind::FullSpace ||
             setup.set.kind == SetKind::EuclideanBall;
    case NormKind::L1:
      return setup.set.kind != SetKind::EuclideanBall;
    default:
      return false;
  }
}

SupportResult support(const ProxSetup& setup, const Vec& z, double R,
                      const Vec& s) {
  require_finite(s);
  if (!setup.set.contains(z, kFeasTol)) {
    throw std::invalid_argument("support: center not in Q");
  }
  if (s.cwiseAbs().maxCoeff() == 0.0) return {0.0, z};
  const FeasibleSet& q = setup.set;
  if (setup.norm.kind == NormKind::L2) {
    if (q.kind == SetKind::FullSpace) {
      const Vec x = z + R * (s / s.norm());
      return {R * s.norm(), x};
    }
    if (q.kind == SetKind::EuclideanBall) {
      return support_l2_two_balls(q, z, R, s);
    }
  } else if (setup.norm.kind == NormKind::L1) {
    switch (q.kind) {
      case SetKind::FullSpace: {
        Index istar = 0;
        s.cwiseAbs().maxCoeff(&istar);
        for (Index i = 0; i < istar; ++i) {
          if (std::abs(s[i]) == std::abs(s[istar])) {
            istar = i;
            break;
          }
        }
        Vec x = z;
        x[istar] += s[istar] >= 0.0 ? R : -R;
        return {R * std::abs(s[istar]), x};
      }
      case SetKind::Simplex:
        return support_simplex_l1(z, R, s);
      case SetKind::L1Ball:
        return support_l1ball_l1(q, z, R, s);
      case SetKind::Box:
        return support_box_l1(q, z, R, s);
      default:
        break;
    }
  }
  throw std::invalid_argument(std::string("support: unsupported set kind '") +
                              q.name() + "' for this geometry");
}

// ---------------------------------------------------------------------------
// Generic prox solver (projected gradient with trust-region projection)
// ---------------------------------------------------------------------------

namespace {

Vec generic_prox_solver(const LocalProblem& lp, const Vec& s) {
  const ProxFunction& d = lp.setup.prox;
  const double R = lp.R, beta = lp.beta;
  auto phi = [&](const Vec& x) {
    return -s.dot(x - lp.z) + beta * prox_value(d, Vec((x - lp.z) / R));
  };
  auto grad = [&](const Vec& x) {
    return Vec(-s + (beta / R) * prox_gradient(d, Vec((x - lp.z) / R)));
  };
  auto project = [&](const Vec& y) {
    return project_intersection(lp.setup.set, lp.setup.norm, lp.z, R, y);
  };
  const bool have_support = support_available(lp.setup);
  const double s_dual = dual_norm(lp.setup.norm, s);
  const double gap_tol = 1e-10 * (1.0 + s_dual) * std::max(R, 1.0);

  Vec x = lp.z;
  double fx = phi(x);
  double t = R * R / (beta * std::max(d.mu_d, 1e-12));
  for (int it = 0; it < 5000; ++it) {
    const Vec g = grad(x);
    if (have_support) {
      const SupportResult sup = support(lp.setup, lp.z, R, Vec(-g));
      const double fw_gap = sup.value - (-g).dot(x - lp.z);
      if (fw_gap <= gap_tol) break;
    }
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Vec xn = project(x - t * g);
      const Vec dx = xn - x;
      const double fn = phi(xn);
      if (fn <= fx + g.dot(dx) + dx.squaredNorm() / (2.0 * t) + 1e-15) {
        const double move = dx.norm();
        x = xn;
        fx = fn;
        accepted = true;
        if (!have_support && move <= 1e-12 * (1.0 + x.norm())) {
          return x;
        }
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    t *= 1.25;
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// prox_map / v_value
// ---------------------------------------------------------------------------

Vec prox_map(const LocalProblem& lp, const Vec& s) {
  require_finite(s);
  if (s.size() != lp.z.size()) {
    throw std::invalid_argument("prox_map: dimension mismatch");
  }
  if (lp.R <= kDegenerateR) return lp.z;

  switch (lp.setup.prox.kind) {
    case ProxKind::HalfSqEuclid: {
      const Vec y = lp.z + (lp.R * lp.R / lp.beta) * s;
      return project_intersection(lp.setup.set, lp.setup.norm, lp.z, lp.R, y);
    }
    case ProxKind::EntropySym:
      switch (lp.setup.set.kind) {
        case SetKind::Simplex:
          return simplex_prox_dual(lp, s);
        case SetKind::L1Ball:
          return hyperoct_prox_dual(lp, s);
        case SetKind::FullSpace:
          return entropy_fullspace_prox(lp, s);
        default:
          return generic_prox_solver(lp, s);
      }
    case ProxKind::PNormSq:
      return generic_prox_solver(lp, s);
  }
  throw std::logic_error("prox_map: unreachable");
}

double v_value(const LocalProblem& lp, const Vec& s) {
  if (lp.R <= kDegenerateR) return 0.0;
  const Vec x = prox_map(lp, s);
  Vec w = (x - lp.z) / lp.R;
  // guard against projection round-off before evaluating d
  if (lp.setup.prox.kind != ProxKind::HalfSqEuclid) {
    const double l1 = w.cwiseAbs().sum();
    if (l1 > 1.0) w /= l1;
  }
  return s.dot(x - lp.z) - lp.beta * prox_value(lp.setup.prox, w);
}

bool v_gradient_lipschitz_check(const LocalProblem& lp, const Vec& s1,
                                const Vec& s2) {
  const Vec p1 = prox_map(lp, s1);
  const Vec p2 = prox_map(lp, s2);
  const double lhs = norm(lp.setup.norm, Vec(p1 - p2));
  const double lip = lp.R * lp.R / (lp.beta * lp.setup.prox.mu_d);
  const double rhs = lip * dual_norm(lp.setup.norm, Vec(s1 - s2));
  return lhs <= rhs + 1e-7 * (1.0 + rhs);
}

}  // namespace ucmin
