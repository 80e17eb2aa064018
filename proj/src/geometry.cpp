#include "ucmin/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ucmin {

namespace {

void check_dim(const NormPair& pair, const Vec& x) {
  if (x.size() != pair.n) {
    throw std::invalid_argument("norm: vector dimension " +
                                std::to_string(x.size()) +
                                " does not match NormPair dimension " +
                                std::to_string(pair.n));
  }
}

double lp_norm(const Vec& x, double p) {
  const double m = x.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  double acc = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    acc += std::pow(std::abs(x[i]) / m, p);
  }
  return m * std::pow(acc, 1.0 / p);
}

// t ln t with psi(0) = 0.
double psi(double t) { return t > 0.0 ? t * std::log(t) : 0.0; }

constexpr double kEntropyFloor = 1e-300;

}  // namespace

NormPair NormPair::lp(int n, double p) {
  if (p <= 1.0) throw std::invalid_argument("NormPair::lp requires p > 1");
  return {NormKind::Lp, n, p};
}

double NormPair::dual_p() const {
  switch (kind) {
    case NormKind::L1:
      return std::numeric_limits<double>::infinity();
    case NormKind::L2:
      return 2.0;
    case NormKind::Lp:
      return p / (p - 1.0);
  }
  return 2.0;
}

double norm(const NormPair& pair, const Vec& x) {
  check_dim(pair, x);
  switch (pair.kind) {
    case NormKind::L1:
      return x.cwiseAbs().sum();
    case NormKind::L2:
      return x.norm();
    case NormKind::Lp:
      return lp_norm(x, pair.p);
  }
  return 0.0;
}

double dual_norm(const NormPair& pair, const Vec& s) {
  check_dim(pair, s);
  switch (pair.kind) {
    case NormKind::L1:
      return s.size() == 0 ? 0.0 : s.cwiseAbs().maxCoeff();
    case NormKind::L2:
      return s.norm();
    case NormKind::Lp:
      return lp_norm(s, pair.p / (pair.p - 1.0));
  }
  return 0.0;
}

ProxConstants prox_constants(ProxKind kind, int n, double p) {
  switch (kind) {
    case ProxKind::HalfSqEuclid:
      return {1.0, 0.5, 0.5};
    case ProxKind::EntropySym:
      if (n < 2) throw std::invalid_argument("EntropySym requires n >= 2");
      return {0.5, std::log(2.0 * n), std::nullopt};
    case ProxKind::PNormSq:
      if (n < 2) throw std::invalid_argument("PNormSq requires n >= 2");
      if (p <= 1.0 || p > 2.0) {
        throw std::invalid_argument("PNormSq requires p in (1, 2]");
      }
      return {(p - 1.0) * std::pow(double(n), 2.0 * (1.0 - p) / p), 0.5, 0.5};
  }
  throw std::invalid_argument("unknown prox kind");
}

ProxFunction ProxFunction::make(ProxKind kind, int n, double p) {
  const ProxConstants c = prox_constants(kind, n, p);
  ProxFunction d;
  d.kind = kind;
  d.n = n;
  d.p = p;
  d.mu_d = c.mu_d;
  d.a_d = c.a_d;
  d.c_d = c.c_d;
  return d;
}

NormPair ProxFunction::paired_norm() const {
  return kind == ProxKind::HalfSqEuclid ? NormPair::l2(n) : NormPair::l1(n);
}

EntropyDecomposition entropy_decompose(const Vec& x, double total) {
  const double l1 = x.cwiseAbs().sum();
  // residual(c) = sum_i sqrt(x_i^2 + 4c) - total, increasing in c;
  // at c = 0 it equals ||x||_1 - total <= 0.
  const Index n = x.size();
  auto residual = [&](double c) {
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) acc += std::sqrt(x[i] * x[i] + 4.0 * c);
    return acc - total;
  };
  double lo = 0.0;
  double hi = total * total;  // sum >= 2n sqrt(c) > total at c = (total/2)^2
  if (l1 >= total) {
    hi = 0.0;  // boundary point: slack-free decomposition
  } else {
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (residual(mid) >= 0.0 ? hi : lo) = mid;
    }
  }
  const double c = 0.5 * (lo + hi);
  EntropyDecomposition out;
  out.c = c;
  out.u = Vec(n);
  out.v = Vec(n);
  for (Index i = 0; i < n; ++i) {
    const double sq = std::sqrt(x[i] * x[i] + 4.0 * c);
    // smaller root via the product form to avoid cancellation
    if (x[i] >= 0.0) {
      out.v[i] = sq + x[i] > 0.0 ? 2.0 * c / (sq + x[i]) : 0.0;
      out.u[i] = out.v[i] + x[i];
    } else {
      out.u[i] = sq - x[i] > 0.0 ? 2.0 * c / (sq - x[i]) : 0.0;
      out.v[i] = out.u[i] - x[i];
    }
  }
  return out;
}

double prox_value(const ProxFunction& d, const Vec& x) {
  if (x.size() != d.n) {
    throw std::invalid_argument("prox_value: dimension mismatch");
  }
  switch (d.kind) {
    case ProxKind::HalfSqEuclid:
      return 0.5 * x.squaredNorm();
    case ProxKind::PNormSq: {
      const double nx = lp_norm(x, d.p);
      return 0.5 * nx * nx;
    }
    case ProxKind::EntropySym: {
      Vec xv = x;
      const double l1 = xv.cwiseAbs().sum();
      if (l1 > 1.0 + 1e-10) {
        throw std::domain_error("EntropySym prox_value: ||x||_1 = " +
                                std::to_string(l1) + " > 1");
      }
      if (l1 > 1.0) xv /= l1;
      const EntropyDecomposition dec = entropy_decompose(xv, 1.0);
      double acc = 0.0;
      for (Index i = 0; i < xv.size(); ++i) acc += psi(dec.u[i]) + psi(dec.v[i]);
      return acc + std::log(2.0 * d.n);
    }
  }
  return 0.0;
}

Vec prox_gradient(const ProxFunction& d, const Vec& x) {
  if (x.size() != d.n) {
    throw std::invalid_argument("prox_gradient: dimension mismatch");
  }
  switch (d.kind) {
    case ProxKind::HalfSqEuclid:
      return x;
    case ProxKind::PNormSq: {
      const double nx = lp_norm(x, d.p);
      Vec g = Vec::Zero(x.size());
      if (nx == 0.0) return g;
      const double scale = std::pow(nx, 2.0 - d.p);
      for (Index i = 0; i < x.size(); ++i) {
        g[i] = scale * std::pow(std::abs(x[i]), d.p - 1.0) *
               (x[i] >= 0.0 ? 1.0 : -1.0);
      }
      return g;
    }
    case ProxKind::EntropySym: {
      Vec xv = x;
      const double l1 = xv.cwiseAbs().sum();
      if (l1 > 1.0 + 1e-10) {
        throw std::domain_error("EntropySym prox_gradient: point outside ball");
      }
      if (l1 > 1.0) xv /= l1;
      const EntropyDecomposition dec = entropy_decompose(xv, 1.0);
      Vec g(xv.size());
      for (Index i = 0; i < xv.size(); ++i) {
        const double u = std::max(dec.u[i], kEntropyFloor);
        const double v = std::max(dec.v[i], kEntropyFloor);
        g[i] = 0.5 * (std::log(u) - std::log(v));
      }
      return g;
    }
  }
  return Vec::Zero(x.size());
}

// ---------------------------------------------------------------------------
// Symmetrization diagnostic
// ---------------------------------------------------------------------------

namespace {

// f0(x) = min { f(u) + f(u - x) : u in alpha Q, u - x in (1-alpha) Q }.
// Coarse grid over (alpha, u) followed by compass refinement. u is snapped
// onto alpha Q (exact decomposition v = u - x is kept); v only needs the
// inequality part of membership.
double sym_value_impl(const SymmetrizationInput& in, const Vec& x, int grid) {
  const int n = in.n;
  const double inf = std::numeric_limits<double>::infinity();
  const bool pinned = static_cast<bool>(in.alpha_pin);
  const double alpha_fixed = pinned ? in.alpha_pin(x) : 0.0;

  auto eval = [&](double alpha, const Vec& u_raw, Vec* u_out) -> double {
    if (alpha < -1e-12 || alpha > 1.0 + 1e-12) return inf;
    alpha = std::clamp(alpha, 0.0, 1.0);
    const Vec u = in.snap_to_scaled(u_raw, alpha);
    const Vec v = u - x;
    if (!in.in_scaled_set(v, 1.0 - alpha)) return inf;
    if (u_out) *u_out = u;
    return in.f(u) + in.f(v);
  };

  double best = inf;
  double best_alpha = pinned ? alpha_fixed : 0.5;
  Vec best_u = Vec::Zero(n);

  std::vector<int> idx(n, 0);
  const int alpha_steps = pinned ? 0 : grid;
  for (int ia = 0; ia <= alpha_steps; ++ia) {
    const double alpha = pinned ? alpha_fixed : double(ia) / grid;
    if (in.initial_u) {
      Vec seeded;
      const double val = eval(alpha, in.initial_u(x, alpha), &seeded);
      if (val < best) {
        best = val;
        best_alpha = alpha;
        best_u = seeded;
      }
    }
    std::fill(idx.begin(), idx.end(), 0);
    bool done = false;
    while (!done) {
      Vec u(n);
      for (int i = 0; i < n; ++i) {
        const double t = double(idx[i]) / grid;
        u[i] = alpha * (in.box_lo[i] + t * (in.box_hi[i] - in.box_lo[i]));
      }
      Vec snapped;
      const double val = eval(alpha, u, &snapped);
      if (val < best) {
        best = val;
        best_alpha = alpha;
        best_u = snapped;
      }
      int i = 0;
      for (; i < n; ++i) {
        if (++idx[i] <= grid) break;
        idx[i] = 0;
      }
      done = (i == n);
    }
  }
  if (!std::isfinite(best)) return best;

  // compass refinement on (alpha, u), axis and pairwise-diagonal moves
  double step = 1.0 / grid;
  const Vec span = in.box_hi - in.box_lo;
  std::vector<Vec> dirs;
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = span[i];
    dirs.push_back(e);
    for (int j = i + 1; j < n; ++j) {
      Vec d = e;
      d[j] = span[j];
      dirs.push_back(d);
      d[j] = -span[j];
      dirs.push_back(d);
    }
  }
  for (int round = 0; round < 110; ++round) {
    bool improved = false;
    for (int sgn = -1; sgn <= 1; sgn += 2) {
      if (!pinned) {
        const double alpha = std::clamp(best_alpha + sgn * step, 0.0, 1.0);
        Vec snapped;
        const double val = eval(alpha, best_u, &snapped);
        if (val < best - 1e-15) {
          best = val;
          best_alpha = alpha;
          best_u = snapped;
          improved = true;
        }
      }
      for (const Vec& d : dirs) {
        Vec u = best_u + sgn * step * d;
        Vec snapped2;
        const double v2 = eval(best_alpha, u, &snapped2);
        if (v2 < best - 1e-15) {
          best = v2;
          best_u = snapped2;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
    if (step < 1e-10) break;
  }
  return best;
}

}  // namespace

double symmetrization_value(const SymmetrizationInput& in, const Vec& x,
                            int grid) {
  return sym_value_impl(in, x, grid);
}

bool symmetrization_modulus_check(const SymmetrizationInput& in,
                                  const NormPair& norm_for_mu, int pairs,
                                  std::uint64_t seed, int grid) {
  CounterRng rng(seed);
  auto sample_q0 = [&]() {
    // conv{Q, -Q}: beta * a - (1 - beta) * b with a, b in Q
    const Vec a = in.sample_set(rng);
    const Vec b = in.sample_set(rng);
    const double beta = rng.uniform();
    return Vec(beta * a - (1.0 - beta) * b);
  };
  for (int t = 0; t < pairs; ++t) {
    const Vec x = sample_q0();
    const Vec y = sample_q0();
    const Vec mid = 0.5 * (x + y);
    const double fx = sym_value_impl(in, x, grid);
    const double fy = sym_value_impl(in, y, grid);
    const double fm = sym_value_impl(in, mid, grid);
    if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(fm)) {
      return false;
    }
    const double dist = norm(norm_for_mu, Vec(x - y));
    // grid slack: f0 at the midpoint is overestimated by the restricted search
    const double slack = 1e-4 * (1.0 + std::abs(fx) + std::abs(fy));
    if (fm > 0.5 * fx + 0.5 * fy - in.mu / 16.0 * dist * dist + slack) {
      return false;
    }
  }
  return true;
}

}  // namespace ucmin
