#include "ucmin/geometry.hpp"

#include <cmath>

#include "doctest.h"
#include "oracle_helpers.hpp"
#include "ucmin/proxmap.hpp"

using namespace ucmin;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// independent entropy-prox oracle: scan slack allocations u = x+ + t,
// v = x- + t, sum(t) = (1 - ||x||_1)/2 at the stated 1e-4 resolution
double entropy_value_bruteforce(const Vec& x) {
  const Index n = x.size();
  const double slack = 0.5 * (1.0 - x.cwiseAbs().sum());
  auto psi_sum = [&](const Vec& t) {
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double u = std::max(x[i], 0.0) + t[i];
      const double v = std::max(-x[i], 0.0) + t[i];
      if (u > 0) acc += u * std::log(u);
      if (v > 0) acc += v * std::log(v);
    }
    return acc;
  };
  double best = std::numeric_limits<double>::infinity();
  if (slack <= 1e-15) {
    best = psi_sum(Vec::Zero(n));
  } else if (n == 2) {
    const int steps = 10000;
    for (int i = 0; i <= steps; ++i) {
      Vec t(2);
      t[0] = slack * i / steps;
      t[1] = slack - t[0];
      best = std::min(best, psi_sum(t));
    }
  } else {
    const int steps = 141;  // ~ (1e-4)^(1/2) scaled for the 2-d slack simplex
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; i + j <= steps; ++j) {
        Vec t(3);
        t[0] = slack * i / steps;
        t[1] = slack * j / steps;
        t[2] = slack - t[0] - t[1];
        best = std::min(best, psi_sum(t));
      }
    }
  }
  return best + std::log(2.0 * n);
}

}  // namespace

TEST_CASE("norm closed forms") {
  CHECK(norm(NormPair::l1(3), vec({1, -2, 3})) == doctest::Approx(6.0));
  CHECK(dual_norm(NormPair::l1(3), vec({1, -2, 3})) == doctest::Approx(3.0));
  CHECK(norm(NormPair::l2(2), vec({3, 4})) == doctest::Approx(5.0));
  CHECK(norm(NormPair::l2(2), Vec::Zero(2)) == 0.0);
  CHECK_THROWS_AS(norm(NormPair::l2(2), vec({1, 2, 3})), std::invalid_argument);
}

TEST_CASE("dual norm matches conjugate closed form and Hoelder holds") {
  CounterRng rng(11);
  const int n = 4;
  const NormPair pairs[] = {NormPair::l1(n), NormPair::l2(n),
                            NormPair::lp(n, 1.5)};
  for (const auto& pr : pairs) {
    for (int t = 0; t < 10000; ++t) {
      Vec s(n), x(n);
      for (int i = 0; i < n; ++i) {
        s[i] = 3.0 * rng.normal();
        x[i] = rng.normal();
      }
      // closed-form conjugate
      double expect = 0.0;
      if (pr.kind == NormKind::L1) {
        expect = s.cwiseAbs().maxCoeff();
      } else if (pr.kind == NormKind::L2) {
        expect = s.norm();
      } else {
        const double q = pr.p / (pr.p - 1.0);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += std::pow(std::abs(s[i]), q);
        expect = std::pow(acc, 1.0 / q);
      }
      CHECK(dual_norm(pr, s) == doctest::Approx(expect).epsilon(1e-12));
      // Hoelder
      CHECK(s.dot(x) <= dual_norm(pr, s) * norm(pr, x) + 1e-9);
    }
  }
}

TEST_CASE("dual norm is the support of the unit ball (sampled argmaxes)") {
  CounterRng rng(12);
  const int n = 3;
  for (int t = 0; t < 200; ++t) {
    Vec s(n);
    for (int i = 0; i < n; ++i) s[i] = 2.0 * rng.normal();
    for (const auto& pr :
         {NormPair::l1(n), NormPair::l2(n), NormPair::lp(n, 1.3)}) {
      double best = 0.0;
      for (int k = 0; k < 2000; ++k) {
        Vec x(n);
        for (int i = 0; i < n; ++i) x[i] = rng.normal();
        const double nx = norm(pr, x);
        if (nx > 0) best = std::max(best, s.dot(x) / nx);
      }
      CHECK(best <= dual_norm(pr, s) * (1 + 1e-9));
    }
  }
}

TEST_CASE("prox constants") {
  const auto e = prox_constants(ProxKind::HalfSqEuclid, 5);
  CHECK(e.mu_d == 1.0);
  CHECK(e.a_d == 0.5);
  CHECK(e.c_d.value() == 0.5);

  const auto h = prox_constants(ProxKind::EntropySym, 4);
  CHECK(h.mu_d == 0.5);
  CHECK(h.a_d == doctest::Approx(std::log(8.0)));
  CHECK(!h.c_d.has_value());

  const auto pn = prox_constants(ProxKind::PNormSq, 2, 2.0);
  CHECK(pn.mu_d == doctest::Approx(0.5));
  CHECK(pn.a_d == 0.5);
  CHECK(pn.c_d.value() == 0.5);

  // p = 1 + 1/ln n
  const int n = 50;
  const double p = 1.0 + 1.0 / std::log(double(n));
  const auto pl = prox_constants(ProxKind::PNormSq, n, p);
  CHECK(pl.mu_d ==
        doctest::Approx((p - 1.0) * std::pow(double(n), 2.0 * (1.0 - p) / p)));

  CHECK_THROWS_AS(prox_constants(ProxKind::PNormSq, 4, 3.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(prox_constants(ProxKind::EntropySym, 1),
                  std::invalid_argument);

  // mu <= 2A; and with C present mu <= 2C, A <= C
  for (const auto& c : {e, h, pn, pl}) {
    CHECK(c.mu_d <= 2.0 * c.a_d + 1e-15);
    if (c.c_d) {
      CHECK(c.mu_d <= 2.0 * *c.c_d + 1e-15);
      CHECK(c.a_d <= *c.c_d + 1e-15);
    }
  }
}

TEST_CASE("prox_value closed and derived cases") {
  const auto d2 = ProxFunction::make(ProxKind::EntropySym, 2);
  const auto d4 = ProxFunction::make(ProxKind::EntropySym, 4);

  CHECK(prox_value(d2, Vec::Zero(2)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(prox_value(d4, Vec::Zero(4)) == doctest::Approx(0.0).epsilon(1e-12));

  CHECK(prox_value(d4, vec({1, 0, 0, 0})) == doctest::Approx(std::log(8.0)));
  CHECK(prox_value(d2, vec({0, -1})) == doctest::Approx(std::log(4.0)));

  // frozen from the decomposition oracle (1e-4 grid): value is ln 2
  const double frozen = 0.6931471805599453;
  CHECK(prox_value(d2, vec({0.5, -0.5})) == doctest::Approx(frozen).epsilon(1e-9));
  CHECK(entropy_value_bruteforce(vec({0.5, -0.5})) ==
        doctest::Approx(frozen).epsilon(1e-6));

  const auto de = ProxFunction::make(ProxKind::HalfSqEuclid, 2);
  CHECK(prox_value(de, vec({3, 4})) == doctest::Approx(12.5));

  CHECK_THROWS_AS(prox_value(d2, vec({0.9, -0.2})), std::domain_error);
}

TEST_CASE("entropy value matches brute force on the ball, n in {2,3}") {
  for (int n : {2, 3}) {
    const auto d = ProxFunction::make(ProxKind::EntropySym, n);
    CounterRng rng(100 + n);
    const FeasibleSet ball = FeasibleSet::l1_ball(n, 1.0);
    for (int t = 0; t < 25; ++t) {
      const Vec x = testing::sample_set(ball, rng);
      CHECK(prox_value(d, x) ==
            doctest::Approx(entropy_value_bruteforce(x)).epsilon(1e-3));
    }
  }
}

TEST_CASE("prox functions: bounds and midpoint strong convexity on segments") {
  CounterRng rng(7);
  const int n = 3;
  const auto proxes = {ProxFunction::make(ProxKind::HalfSqEuclid, n),
                       ProxFunction::make(ProxKind::PNormSq, n, 1.7),
                       ProxFunction::make(ProxKind::EntropySym, n)};
  for (const auto& d : proxes) {
    const NormPair nrm = d.paired_norm();
    const FeasibleSet ball = nrm.kind == NormKind::L2
                                 ? FeasibleSet::euclidean_ball(n, 1.0)
                                 : FeasibleSet::l1_ball(n, 1.0);
    for (int t = 0; t < 10000; ++t) {
      const Vec x = testing::sample_set(ball, rng);
      const Vec y = testing::sample_set(ball, rng);
      const double dx = prox_value(d, x);
      const double dy = prox_value(d, y);
      const double dm = prox_value(d, Vec(0.5 * (x + y)));
      const double dist = norm(nrm, Vec(x - y));
      CHECK(dm <= 0.5 * dx + 0.5 * dy - d.mu_d / 8.0 * dist * dist + 1e-9);
      // range facts on the unit ball
      CHECK(dx >= -1e-12);
      CHECK(dx <= d.a_d + 1e-9);
      CHECK(dx >= 0.5 * d.mu_d * norm(nrm, x) * norm(nrm, x) - 1e-9);
      if (d.c_d) CHECK(dx <= *d.c_d * norm(nrm, x) * norm(nrm, x) + 1e-9);
    }
  }
}

TEST_CASE("symmetrization check: entropy on the simplex") {
  const int n = 2;
  SymmetrizationInput in;
  in.n = n;
  in.mu = 1.0;  // entropy is 1-strongly convex w.r.t. l1 on the simplex
  in.f = [](const Vec& x) {
    double acc = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      if (x[i] > 0) acc += x[i] * std::log(x[i]);
    }
    return acc;
  };
  in.snap_to_scaled = [](const Vec& x, double alpha) {
    if (alpha <= 0.0) return Vec(Vec::Zero(x.size()));
    return Vec(alpha * project_simplex(Vec(x / alpha)));
  };
  in.in_scaled_set = [](const Vec& v, double) {
    return v.minCoeff() >= -1e-12;  // affine part pinned through alpha
  };
  in.alpha_pin = [](const Vec& x) { return 0.5 * (1.0 + x.sum()); };
  in.initial_u = [n](const Vec& x, double alpha) {
    // uniform slack split: u = x+ + (alpha - sum x+)/n
    Vec u = x.cwiseMax(0.0);
    u.array() += (alpha - u.sum()) / n;
    return u;
  };
  in.box_lo = Vec::Zero(n);
  in.box_hi = Vec::Ones(n);
  in.sample_set = [n](CounterRng& rng) {
    return testing::sample_set(FeasibleSet::simplex(n), rng);
  };
  CHECK(symmetrization_modulus_check(in, NormPair::l1(n), 1000, 42));

  // deliberately inflated modulus must fail on some pair
  SymmetrizationInput bad = in;
  bad.mu = 4.0;
  CHECK_FALSE(symmetrization_modulus_check(bad, NormPair::l1(n), 1000, 42));
}

TEST_CASE("symmetrization check: half squared norm on the l2 ball") {
  const int n = 2;
  SymmetrizationInput in;
  in.n = n;
  in.mu = 1.0;
  in.f = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  in.snap_to_scaled = [](const Vec& x, double alpha) {
    const double nx = x.norm();
    return nx <= alpha ? x : Vec(x * (alpha / std::max(nx, 1e-300)));
  };
  in.in_scaled_set = [](const Vec& v, double alpha) {
    return v.norm() <= alpha + 1e-12;
  };
  in.initial_u = [](const Vec& x, double alpha) { return Vec(alpha * x); };
  in.box_lo = Vec::Constant(n, -1.0);
  in.box_hi = Vec::Ones(n);
  in.sample_set = [n](CounterRng& rng) {
    return testing::sample_set(FeasibleSet::euclidean_ball(n, 1.0), rng);
  };
  CHECK(symmetrization_modulus_check(in, NormPair::l2(n), 200, 43));
}
