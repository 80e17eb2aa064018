#pragma once

// Test-only brute-force oracles: plain grids with compass refinement, exact
// vertex enumeration for small LPs, and feasible-set samplers. Kept
// independent of the library's solver paths on purpose.

#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "ucmin/proxmap.hpp"
#include "ucmin/rng.hpp"

namespace ucmin::testing {

using Objective = std::function<double(const Vec&)>;
using Membership = std::function<bool(const Vec&)>;

struct OptResult {
  double value;
  Vec x;
};

inline OptResult grid_maximize(const Objective& f, const Membership& feasible,
                               const Vec& lo, const Vec& hi, int grid,
                               int polish_rounds = 80) {
  const int n = static_cast<int>(lo.size());
  double best = -std::numeric_limits<double>::infinity();
  Vec best_x = 0.5 * (lo + hi);
  std::vector<int> idx(n, 0);
  bool done = false;
  while (!done) {
    Vec x(n);
    for (int i = 0; i < n; ++i) {
      x[i] = lo[i] + (hi[i] - lo[i]) * double(idx[i]) / grid;
    }
    if (feasible(x)) {
      const double v = f(x);
      if (v > best) {
        best = v;
        best_x = x;
      }
    }
    int i = 0;
    for (; i < n; ++i) {
      if (++idx[i] <= grid) break;
      idx[i] = 0;
    }
    done = (i == n);
  }
  // compass polish with axis and pairwise-diagonal moves (diagonals slide
  // along active linear constraints)
  Vec step = (hi - lo) / grid;
  std::vector<Vec> dirs;
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
    for (int j = i + 1; j < n; ++j) {
      for (double sj : {1.0, -1.0}) {
        Vec d = e;
        d[j] = sj;
        dirs.push_back(d);
        dirs.push_back(-d);
      }
    }
  }
  for (int round = 0; round < polish_rounds; ++round) {
    bool improved = false;
    for (const Vec& d : dirs) {
      Vec x = best_x + d.cwiseProduct(step);
      if (!feasible(x)) continue;
      const double v = f(x);
      if (v > best + 1e-18) {
        best = v;
        best_x = x;
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
    if (step.maxCoeff() < 1e-12) break;
  }
  return {best, best_x};
}

inline Vec sample_set(const FeasibleSet& q, CounterRng& rng) {
  const int n = q.n;
  Vec x(n);
  switch (q.kind) {
    case SetKind::FullSpace:
      for (int i = 0; i < n; ++i) x[i] = 2.0 * rng.normal();
      return x;
    case SetKind::EuclideanBall: {
      for (int i = 0; i < n; ++i) x[i] = rng.normal();
      const double nx = x.norm();
      const double r = q.radius * std::pow(rng.uniform_pos(), 1.0 / n);
      return nx > 0 ? Vec(x * (r / nx)) : Vec::Zero(n);
    }
    case SetKind::Simplex: {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        x[i] = -std::log(rng.uniform_pos());
        s += x[i];
      }
      return x / s;
    }
    case SetKind::L1Ball: {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        x[i] = -std::log(rng.uniform_pos());
        s += x[i];
      }
      const double r = q.radius * std::pow(rng.uniform_pos(), 1.0 / n);
      for (int i = 0; i < n; ++i) {
        x[i] *= (rng.uniform() < 0.5 ? -1.0 : 1.0) * r / s;
      }
      return x;
    }
    case SetKind::Box:
      for (int i = 0; i < n; ++i) x[i] = rng.uniform(q.lo[i], q.hi[i]);
      return x;
  }
  return Vec::Zero(n);
}

// Point of Q ∩ B_R(z): shrink a set sample toward the (feasible) center.
inline Vec sample_local(const FeasibleSet& q, const NormPair& nrm, const Vec& z,
                        double R, CounterRng& rng) {
  const Vec y = sample_set(q, rng);
  const Vec d = y - z;
  const double dist = norm(nrm, d);
  const double t = dist > 0 ? std::min(1.0, rng.uniform_pos() * R / dist) : 0.0;
  return z + t * d;
}

// --- entropy prox-function oracle (n <= 3) ---------------------------------

// d(w) by direct search over slack allocations: u = w+ + t, v = w- + t,
// sum(t) = (1 - ||w||_1)/2, t >= 0. Grid plus compass refinement.
inline double entropy_d_oracle(const Vec& w, int coarse = 60) {
  const int n = static_cast<int>(w.size());
  const double slack = 0.5 * (1.0 - w.cwiseAbs().sum());
  auto value = [&](const Vec& t) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = std::max(w[i], 0.0) + t[i];
      const double v = std::max(-w[i], 0.0) + t[i];
      if (u > 0) acc += u * std::log(u);
      if (v > 0) acc += v * std::log(v);
    }
    return acc + std::log(2.0 * n);
  };
  if (slack <= 1e-14) return value(Vec::Zero(n));
  // minimize over the (n-1)-dim slack simplex {t >= 0, sum t = slack}
  auto full_t = [&](const Vec& head) {
    Vec t(n);
    double acc = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      t[i] = head[i];
      acc += head[i];
    }
    t[n - 1] = slack - acc;
    return t;
  };
  auto feasible = [&](const Vec& head) {
    double acc = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      if (head[i] < 0.0) return false;
      acc += head[i];
    }
    return acc <= slack + 1e-18;
  };
  const OptResult r = grid_maximize(
      [&](const Vec& head) { return -value(full_t(head)); }, feasible,
      Vec::Zero(n - 1), Vec::Constant(n - 1, slack), coarse, 120);
  return -r.value;
}

// Brute-force prox-mapping oracle: maximize <s, x - z> - beta d((x-z)/R)
// over Q ∩ B_R(z) by grid + compass. Slow, for n <= 3.
inline OptResult prox_map_oracle(const LocalProblem& lp, const Vec& s,
                                 int grid = 40) {
  const FeasibleSet& q = lp.setup.set;
  const int n = q.n;
  const NormPair nrm = lp.setup.norm;
  auto d_val = [&](const Vec& w) {
    switch (lp.setup.prox.kind) {
      case ProxKind::HalfSqEuclid:
        return 0.5 * w.squaredNorm();
      case ProxKind::PNormSq: {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
          acc += std::pow(std::abs(w[i]), lp.setup.prox.p);
        const double nw = std::pow(acc, 1.0 / lp.setup.prox.p);
        return 0.5 * nw * nw;
      }
      case ProxKind::EntropySym:
        return entropy_d_oracle(w, 40);
    }
    return 0.0;
  };
  auto objective = [&](const Vec& x) {
    return s.dot(x - lp.z) - lp.beta * d_val(Vec((x - lp.z) / lp.R));
  };
  auto feasible = [&](const Vec& x) {
    if (!q.contains(x, 1e-12)) return false;
    return norm(nrm, Vec(x - lp.z)) <= lp.R * (1.0 + 1e-12);
  };

  if (q.kind == SetKind::Simplex) {
    // parametrize by the first n-1 coordinates
    auto lift = [&](const Vec& head) {
      Vec x(n);
      double acc = 0.0;
      for (int i = 0; i < n - 1; ++i) {
        x[i] = head[i];
        acc += head[i];
      }
      x[n - 1] = 1.0 - acc;
      return x;
    };
    const OptResult r = grid_maximize(
        [&](const Vec& head) { return objective(lift(head)); },
        [&](const Vec& head) { return feasible(lift(head)); },
        Vec::Zero(n - 1), Vec::Ones(n - 1), grid, 140);
    return {r.value, lift(r.x)};
  }

  Vec lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    double a = lp.z[i] - lp.R, b = lp.z[i] + lp.R;
    if (q.kind == SetKind::EuclideanBall) {
      a = std::max(a, -q.radius);
      b = std::min(b, q.radius);
    } else if (q.kind == SetKind::L1Ball) {
      a = std::max(a, -q.radius);
      b = std::min(b, q.radius);
    } else if (q.kind == SetKind::Box) {
      a = std::max(a, q.lo[i]);
      b = std::min(b, q.hi[i]);
    }
    lo[i] = a;
    hi[i] = b;
  }
  return grid_maximize(objective, feasible, lo, hi, grid, 140);
}

// --- exact LP by vertex enumeration (n <= 3) -------------------------------

struct Polytope {
  std::vector<Vec> a;  // a_i . x <= b_i
  std::vector<double> b;
  std::vector<Vec> e;  // e_i . x = f_i
  std::vector<double> f;
};

inline void add_ineq(Polytope& p, const Vec& a, double b) {
  p.a.push_back(a);
  p.b.push_back(b);
}

inline Polytope polytope_of(const FeasibleSet& q) {
  Polytope p;
  const int n = q.n;
  switch (q.kind) {
    case SetKind::Simplex: {
      for (int i = 0; i < n; ++i) {
        Vec a = Vec::Zero(n);
        a[i] = -1.0;
        add_ineq(p, a, 0.0);
      }
      p.e.push_back(Vec::Ones(n));
      p.f.push_back(1.0);
      break;
    }
    case SetKind::L1Ball: {
      for (int m = 0; m < (1 << n); ++m) {
        Vec a(n);
        for (int i = 0; i < n; ++i) a[i] = (m >> i) & 1 ? 1.0 : -1.0;
        add_ineq(p, a, q.radius);
      }
      break;
    }
    case SetKind::Box: {
      for (int i = 0; i < n; ++i) {
        Vec a = Vec::Zero(n);
        a[i] = 1.0;
        add_ineq(p, a, q.hi[i]);
        a[i] = -1.0;
        add_ineq(p, a, -q.lo[i]);
      }
      break;
    }
    case SetKind::FullSpace:
      break;
    default:
      throw std::invalid_argument("polytope_of: not a polytope");
  }
  return p;
}

inline void add_l1_ball_facets(Polytope& p, const Vec& z, double R) {
  const int n = static_cast<int>(z.size());
  for (int m = 0; m < (1 << n); ++m) {
    Vec a(n);
    for (int i = 0; i < n; ++i) a[i] = (m >> i) & 1 ? 1.0 : -1.0;
    add_ineq(p, a, R + a.dot(z));
  }
}

// max <s, x - z> over the polytope, by enumerating vertices.
inline OptResult lp_enumerate_max(const Polytope& p, const Vec& s,
                                  const Vec& z) {
  const int n = static_cast<int>(s.size());
  const int ne = static_cast<int>(p.e.size());
  const int k = n - ne;  // inequalities to activate
  const int m = static_cast<int>(p.a.size());
  double best = -std::numeric_limits<double>::infinity();
  Vec best_x = Vec::Zero(n);

  std::vector<int> pick(k);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == k) {
      Eigen::MatrixXd A(n, n);
      Vec rhs(n);
      for (int i = 0; i < ne; ++i) {
        A.row(i) = p.e[i].transpose();
        rhs[i] = p.f[i];
      }
      for (int i = 0; i < k; ++i) {
        A.row(ne + i) = p.a[pick[i]].transpose();
        rhs[ne + i] = p.b[pick[i]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
      if (lu.rank() < n) return;
      const Vec x = lu.solve(rhs);
      for (int i = 0; i < m; ++i) {
        if (p.a[i].dot(x) > p.b[i] + 1e-9) return;
      }
      for (int i = 0; i < ne; ++i) {
        if (std::abs(p.e[i].dot(x) - p.f[i]) > 1e-9) return;
      }
      const double v = s.dot(x - z);
      if (v > best) {
        best = v;
        best_x = x;
      }
      return;
    }
    for (int i = start; i < m; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return {best, best_x};
}

}  // namespace ucmin::testing
