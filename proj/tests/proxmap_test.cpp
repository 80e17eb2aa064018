#include "ucmin/proxmap.hpp"

#include <cmath>

#include "doctest.h"
#include "oracle_helpers.hpp"

using namespace ucmin;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

LocalProblem euclid_lp(const FeasibleSet& q, Vec z, double R, double beta) {
  return LocalProblem(ProxSetup::make(ProxKind::HalfSqEuclid, q), std::move(z),
                      R, beta);
}

LocalProblem entropy_lp(const FeasibleSet& q, Vec z, double R, double beta) {
  return LocalProblem(ProxSetup::make(ProxKind::EntropySym, q), std::move(z),
                      R, beta);
}

double inner_objective(const LocalProblem& lp, const Vec& s, const Vec& x) {
  return s.dot(x - lp.z) - lp.beta * prox_value(lp.setup.prox,
                                                Vec((x - lp.z) / lp.R));
}

}  // namespace

TEST_CASE("solve_2d_entropy cases") {
  SUBCASE("slack constraint: unconstrained minimizer (paper case)") {
    const Entropy2D e = solve_2d_entropy(-1.0, -1.0, 10.0);
    CHECK(!e.equality_branch);
    CHECK(e.u == doctest::Approx(1.0));
    CHECK(e.v == doctest::Approx(1.0));
  }
  SUBCASE("symmetric boundary case: both branches coincide") {
    const Entropy2D e = solve_2d_entropy(0.0, 0.0, 0.0);
    CHECK(e.u == doctest::Approx(std::exp(-1.0)));
    CHECK(e.v == doctest::Approx(std::exp(-1.0)));
  }
  SUBCASE("sign test decides; grid cross-check") {
    const double s = 0.0, t = -4.0, z = 0.0;
    const Entropy2D e = solve_2d_entropy(s, t, z);
    CHECK(e.equality_branch);  // interior pair (e^-1, e^3) violates u >= v
    CHECK(e.u == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    CHECK(e.v == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    const auto obj = [&](const Vec& uv) {
      return -entropy2d_objective(s, t, uv[0], uv[1]);
    };
    const auto feas = [&](const Vec& uv) {
      return uv[0] >= 0 && uv[1] >= 0 && uv[0] >= uv[1] - z;
    };
    const testing::OptResult r = testing::grid_maximize(
        obj, feas, vec({1e-9, 1e-9}), vec({30.0, 30.0}), 600, 160);
    CHECK(entropy2d_objective(s, t, e.u, e.v) ==
          doctest::Approx(-r.value).epsilon(1e-5));
    CHECK(e.u == doctest::Approx(r.x[0]).epsilon(1e-3));
    CHECK(e.v == doctest::Approx(r.x[1]).epsilon(1e-3));
  }
  SUBCASE("random instances against grid") {
    CounterRng rng(5);
    for (int t = 0; t < 20; ++t) {
      const double a = rng.uniform(-2.0, 2.0);
      const double b = rng.uniform(-2.0, 2.0);
      const double z = rng.uniform(-1.0, 1.0);
      const Entropy2D e = solve_2d_entropy(a, b, z);
      CHECK(e.u >= 0.0);
      CHECK(e.v >= 0.0);
      CHECK(e.u >= e.v - z - 1e-9);
      const auto obj = [&](const Vec& uv) {
        return -entropy2d_objective(a, b, uv[0], uv[1]);
      };
      const auto feas = [&](const Vec& uv) {
        return uv[0] >= 0 && uv[1] >= 0 && uv[0] >= uv[1] - z;
      };
      const testing::OptResult r = testing::grid_maximize(
          obj, feas, vec({0.0, 0.0}), vec({25.0, 25.0}), 300, 160);
      CHECK(entropy2d_objective(a, b, e.u, e.v) <= -r.value + 1e-6);
    }
  }
}

TEST_CASE("prox_map: Euclidean closed cases") {
  const auto q = FeasibleSet::full_space(2);
  const LocalProblem lp = euclid_lp(q, Vec::Zero(2), 1.0, 1.0);
  CHECK((prox_map(lp, vec({0.3, 0.4})) - vec({0.3, 0.4})).norm() < 1e-12);
  CHECK((prox_map(lp, vec({3.0, 4.0})) - vec({0.6, 0.8})).norm() < 1e-12);

  // v values
  CHECK(v_value(lp, Vec::Zero(2)) == doctest::Approx(0.0));
  CHECK(v_value(lp, vec({0.3, 0.4})) == doctest::Approx(0.125));
}

TEST_CASE("prox_map: degenerate radius returns the center") {
  const auto q = FeasibleSet::simplex(3);
  const LocalProblem lp = entropy_lp(q, q.center_point(), 1e-16, 1.0);
  CHECK((prox_map(lp, vec({1.0, -2.0, 0.5})) - lp.z).norm() == 0.0);
}

TEST_CASE("LocalProblem validation") {
  const auto q = FeasibleSet::simplex(3);
  CHECK_THROWS_AS(entropy_lp(q, vec({0.5, 0.2, 0.2}), 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(entropy_lp(q, q.center_point(), -1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(entropy_lp(q, q.center_point(), 1.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("entropy prox over the simplex vs grid oracle (spec example)") {
  const auto q = FeasibleSet::simplex(3);
  const LocalProblem lp = entropy_lp(q, q.center_point(), 0.5, 1.0);
  const Vec s = vec({1.0, 0.0, -1.0});
  const Vec x = prox_map(lp, s);
  const testing::OptResult oracle = testing::prox_map_oracle(lp, s, 60);
  CHECK(inner_objective(lp, s, x) == doctest::Approx(oracle.value).epsilon(1e-4));
  CHECK((x - oracle.x).cwiseAbs().maxCoeff() < 1e-2);
  CHECK(q.contains(x, 1e-9));
  CHECK(norm(lp.setup.norm, Vec(x - lp.z)) <= lp.R + 1e-9);
}

TEST_CASE("simplex prox: s = 0 fixes the center") {
  for (int n : {2, 3, 7}) {
    const auto q = FeasibleSet::simplex(n);
    CounterRng rng(80 + n);
    Vec z = testing::sample_set(q, rng);
    const LocalProblem lp = entropy_lp(q, z, 0.7, 2.0);
    const Vec x = prox_map(lp, Vec::Zero(n));
    CHECK((x - z).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("simplex prox n=2: exhaustive segment scan") {
  const auto q = FeasibleSet::simplex(2);
  const LocalProblem lp = entropy_lp(q, vec({0.5, 0.5}), 0.4, 1.0);
  const Vec s = vec({1.0, -1.0});
  const Vec got = prox_map(lp, s);

  // the n=2 simplex is the segment x = (t, 1-t); the optimal entropy
  // decomposition of w = (a, -a) with sum(u+v) = 1 has u_i v_i = c and
  // sqrt(a^2 + 4c) = 1/2 per coordinate
  auto d2 = [&](double a) {
    const double c = (0.25 - a * a) / 4.0;
    double acc = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double ai = i == 0 ? a : -a;
      const double sq = 0.5;
      const double u = 0.5 * (sq + ai), v = 0.5 * (sq - ai);
      (void)c;
      if (u > 0) acc += u * std::log(u);
      if (v > 0) acc += v * std::log(v);
    }
    return acc + std::log(4.0);
  };
  double best = -1e300, best_t = 0.5;
  const int steps = 1000000;
  const double t_lo = std::max(0.0, 0.5 - lp.R / 2.0);
  const double t_hi = std::min(1.0, 0.5 + lp.R / 2.0);
  for (int i = 0; i <= steps; ++i) {
    const double t = t_lo + (t_hi - t_lo) * double(i) / steps;
    const double a = (t - 0.5) / lp.R;
    const double val = s[0] * (t - 0.5) + s[1] * (0.5 - t) - lp.beta * d2(a);
    if (val > best) {
      best = val;
      best_t = t;
    }
  }
  CHECK(inner_objective(lp, s, got) == doctest::Approx(best).epsilon(1e-6));
  CHECK(got[0] == doctest::Approx(best_t).epsilon(1e-4));
}

TEST_CASE("hyperoctahedron prox vs grid oracle") {
  const auto q = FeasibleSet::l1_ball(3, 0.9);
  const LocalProblem lp = entropy_lp(q, Vec::Zero(3), 0.5, 1.0);
  CounterRng rng(17);
  for (int t = 0; t < 3; ++t) {
    Vec s(3);
    for (int i = 0; i < 3; ++i) s[i] = rng.uniform(-2.0, 2.0);
    const Vec x = prox_map(lp, s);
    CHECK(q.contains(x, 1e-9));
    CHECK(norm(lp.setup.norm, Vec(x - lp.z)) <= lp.R + 1e-9);
    const testing::OptResult oracle = testing::prox_map_oracle(lp, s, 40);
    CHECK(inner_objective(lp, s, x) >= oracle.value - 1e-4);
  }
}

TEST_CASE("entropy dual solvers: duality-gap certificate") {
  CounterRng rng(23);
  SUBCASE("simplex") {
    for (int n : {2, 3, 8, 40}) {
      const auto q = FeasibleSet::simplex(n);
      for (int t = 0; t < 20; ++t) {
        Vec z = testing::sample_set(q, rng);
        const double R = rng.uniform(0.05, 1.5);
        const double beta = rng.uniform(0.3, 5.0);
        const LocalProblem lp = entropy_lp(q, z, R, beta);
        Vec s(n);
        for (int i = 0; i < n; ++i) s[i] = 2.0 * rng.normal();
        const EntropyDualSolution sol = simplex_prox_dual_full(lp, s);
        const double gap = (lp.beta / lp.R) * (sol.primal_scaled - sol.dual_scaled);
        CHECK(gap >= -1e-8);
        CHECK(gap <= 1e-9 * (1.0 + dual_norm(lp.setup.norm, s)) +
                         1e-9 * (std::abs(sol.lam) + std::abs(sol.nu)));
        CHECK(q.contains(sol.x, 1e-9));
      }
    }
  }
  SUBCASE("hyperoctahedron") {
    for (int n : {2, 3, 6}) {
      const auto q = FeasibleSet::l1_ball(n, 1.0);
      for (int t = 0; t < 10; ++t) {
        Vec z = testing::sample_set(q, rng);
        const double R = rng.uniform(0.05, 1.5);
        const double beta = rng.uniform(0.3, 5.0);
        const LocalProblem lp = entropy_lp(q, z, R, beta);
        Vec s(n);
        for (int i = 0; i < n; ++i) s[i] = 2.0 * rng.normal();
        const EntropyDualSolution sol = hyperoct_prox_dual_full(lp, s);
        const double gap = (lp.beta / lp.R) * (sol.primal_scaled - sol.dual_scaled);
        CHECK(gap >= -1e-8);
        CHECK(gap <= 1e-9 * (1.0 + dual_norm(lp.setup.norm, s)) +
                         1e-9 * (std::abs(sol.lam) + std::abs(sol.nu)));
        CHECK(q.contains(sol.x, 1e-9));
      }
    }
  }
}

TEST_CASE("prox_map feasibility across geometries (random draws)") {
  CounterRng rng(31);
  const int n = 3;
  std::vector<ProxSetup> setups;
  for (auto kind : {ProxKind::HalfSqEuclid, ProxKind::PNormSq,
                    ProxKind::EntropySym}) {
    const double p = 1.6;
    setups.push_back(ProxSetup::make(kind, FeasibleSet::full_space(n), p));
    setups.push_back(ProxSetup::make(kind, FeasibleSet::euclidean_ball(n, 1.2), p));
    setups.push_back(ProxSetup::make(kind, FeasibleSet::simplex(n), p));
    setups.push_back(ProxSetup::make(kind, FeasibleSet::l1_ball(n, 0.8), p));
    setups.push_back(ProxSetup::make(
        kind, FeasibleSet::box(Vec::Constant(n, -0.5), Vec::Constant(n, 0.9)),
        p));
  }
  for (const auto& su : setups) {
    for (int t = 0; t < 30; ++t) {
      Vec z = testing::sample_set(su.set, rng);
      if (su.set.kind == SetKind::FullSpace) z = 0.3 * z;
      const double R = rng.uniform(0.1, 1.0);
      const double beta = rng.uniform(0.5, 3.0);
      const LocalProblem lp{su, z, R, beta};
      Vec s(n);
      for (int i = 0; i < n; ++i) s[i] = 2.0 * rng.normal();
      const Vec x = prox_map(lp, s);
      CHECK(su.set.contains(x, 1e-9));
      CHECK(norm(su.norm, Vec(x - z)) <= R * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("prox_map objective matches grid oracle across combos, n=2") {
  CounterRng rng(37);
  const int n = 2;
  std::vector<FeasibleSet> sets = {
      FeasibleSet::full_space(n), FeasibleSet::euclidean_ball(n, 1.0),
      FeasibleSet::simplex(n), FeasibleSet::l1_ball(n, 0.9),
      FeasibleSet::box(Vec::Constant(n, -0.6), Vec::Constant(n, 0.8))};
  for (auto kind :
       {ProxKind::HalfSqEuclid, ProxKind::PNormSq, ProxKind::EntropySym}) {
    for (const auto& q : sets) {
      const auto su = ProxSetup::make(kind, q, 1.5);
      for (int t = 0; t < 4; ++t) {
        Vec z = testing::sample_set(q, rng);
        if (q.kind == SetKind::FullSpace) z = 0.3 * z;
        const double R = rng.uniform(0.2, 0.8);
        const double beta = rng.uniform(0.5, 2.0);
        const LocalProblem lp{su, z, R, beta};
        Vec s(n);
        for (int i = 0; i < n; ++i) s[i] = 1.5 * rng.normal();
        const Vec x = prox_map(lp, s);
        const testing::OptResult oracle = testing::prox_map_oracle(lp, s, 60);
        CHECK(inner_objective(lp, s, x) >= oracle.value - 1e-4);
      }
    }
  }
}

TEST_CASE("v_value: convexity in s and monotonicity in beta") {
  CounterRng rng(41);
  const auto q = FeasibleSet::simplex(3);
  const LocalProblem lp = entropy_lp(q, q.center_point(), 0.6, 1.0);
  for (int t = 0; t < 40; ++t) {
    Vec s1(3), s2(3);
    for (int i = 0; i < 3; ++i) {
      s1[i] = 2.0 * rng.normal();
      s2[i] = 2.0 * rng.normal();
    }
    const double vm = v_value(lp, Vec(0.5 * (s1 + s2)));
    CHECK(vm <= 0.5 * v_value(lp, s1) + 0.5 * v_value(lp, s2) + 1e-8);
    // beta monotonicity: beta1 <= beta2 implies V_beta1 >= V_beta2
    CHECK(v_value(lp.with_beta(0.7), s1) >= v_value(lp.with_beta(1.9), s1) - 1e-9);
    // s = 0 gives 0; V >= 0 never required, but x = z shows V >= -beta*d(0) = 0
    CHECK(v_value(lp, s1) >= -1e-10);
  }
}

TEST_CASE("gradient-step identity pi(s) = z + V'(s) by central differences") {
  CounterRng rng(43);
  const auto setups = {
      entropy_lp(FeasibleSet::simplex(3), Vec::Constant(3, 1.0 / 3), 0.5, 1.3),
      euclid_lp(FeasibleSet::euclidean_ball(3, 1.0), Vec::Zero(3), 0.8, 0.9)};
  for (const auto& lp : setups) {
    for (int t = 0; t < 5; ++t) {
      Vec s(3);
      for (int i = 0; i < 3; ++i) s[i] = rng.normal();
      const Vec x = prox_map(lp, s);
      for (int i = 0; i < 3; ++i) {
        Vec e = Vec::Zero(3);
        e[i] = 1e-6;
        const double grad_fd =
            (v_value(lp, Vec(s + e)) - v_value(lp, Vec(s - e))) / 2e-6;
        CHECK(grad_fd == doctest::Approx(x[i] - lp.z[i]).epsilon(1e-4));
      }
    }
  }
}

TEST_CASE("prox-mapping is Lipschitz in s (V-gradient property)") {
  CounterRng rng(47);
  SUBCASE("euclidean: exact clip identity") {
    const LocalProblem lp =
        euclid_lp(FeasibleSet::full_space(2), Vec::Zero(2), 1.0, 1.0);
    for (int t = 0; t < 200; ++t) {
      Vec s1(2), s2(2);
      for (int i = 0; i < 2; ++i) {
        s1[i] = 3.0 * rng.normal();
        s2[i] = 3.0 * rng.normal();
      }
      CHECK(v_gradient_lipschitz_check(lp, s1, s2));
    }
  }
  SUBCASE("entropy on the simplex, and beta doubling") {
    const LocalProblem lp =
        entropy_lp(FeasibleSet::simplex(3), Vec::Constant(3, 1.0 / 3), 0.5, 1.0);
    for (int t = 0; t < 1000; ++t) {
      Vec s1(3), s2(3);
      for (int i = 0; i < 3; ++i) {
        s1[i] = 2.0 * rng.normal();
        s2[i] = 2.0 * rng.normal();
      }
      CHECK(v_gradient_lipschitz_check(lp, s1, s2));
      CHECK(v_gradient_lipschitz_check(lp.with_beta(2.0), s1, s2));
    }
  }
}

TEST_CASE("support function: closed cases") {
  SUBCASE("euclidean ball, R larger than the set") {
    const auto su =
        ProxSetup::make(ProxKind::HalfSqEuclid, FeasibleSet::euclidean_ball(2, 1.0));
    const SupportResult r = support(su, Vec::Zero(2), 2.0, vec({3.0, 4.0}));
    CHECK(r.value == doctest::Approx(5.0));
    CHECK((r.argmax - vec({0.6, 0.8})).norm() < 1e-12);
  }
  SUBCASE("zero direction") {
    const auto su =
        ProxSetup::make(ProxKind::EntropySym, FeasibleSet::simplex(3));
    const Vec z = vec({0.2, 0.3, 0.5});
    const SupportResult r = support(su, z, 0.5, Vec::Zero(3));
    CHECK(r.value == 0.0);
    CHECK((r.argmax - z).norm() == 0.0);
  }
  SUBCASE("simplex vertex-enumeration example") {
    const auto su =
        ProxSetup::make(ProxKind::EntropySym, FeasibleSet::simplex(3));
    const Vec z = vec({1.0, 0.0, 0.0});
    const SupportResult r = support(su, z, 1.0, vec({0.0, 1.0, 0.0}));
    CHECK(r.value == doctest::Approx(0.5));
    CHECK((r.argmax - vec({0.5, 0.5, 0.0})).norm() < 1e-12);
  }
}

TEST_CASE("support matches LP vertex enumeration (l1 geometry)") {
  CounterRng rng(53);
  for (int n : {2, 3}) {
    std::vector<FeasibleSet> sets = {
        FeasibleSet::simplex(n), FeasibleSet::l1_ball(n, 1.3),
        FeasibleSet::box(Vec::Constant(n, -0.4), Vec::Constant(n, 1.1))};
    for (const auto& q : sets) {
      const auto su = ProxSetup::make(ProxKind::EntropySym, q);
      for (int t = 0; t < 200; ++t) {
        const Vec z = testing::sample_set(q, rng);
        const double R = rng.uniform(0.1, 2.5);
        Vec s(n);
        for (int i = 0; i < n; ++i) s[i] = 2.0 * rng.normal();
        const SupportResult got = support(su, z, R, s);
        testing::Polytope p = testing::polytope_of(q);
        testing::add_l1_ball_facets(p, z, R);
        const testing::OptResult want = testing::lp_enumerate_max(p, s, z);
        CHECK(got.value == doctest::Approx(want.value).epsilon(1e-9));
        CHECK(q.contains(got.argmax, 1e-9));
        CHECK((got.argmax - z).cwiseAbs().sum() <= R * (1 + 1e-9));
        CHECK(s.dot(got.argmax - z) == doctest::Approx(got.value));
      }
    }
  }
}

TEST_CASE("support for two euclidean balls matches grid oracle") {
  CounterRng rng(59);
  const int n = 2;
  const auto q = FeasibleSet::euclidean_ball(n, 1.0);
  const auto su = ProxSetup::make(ProxKind::HalfSqEuclid, q);
  for (int t = 0; t < 60; ++t) {
    const Vec z = testing::sample_set(q, rng);
    const double R = rng.uniform(0.2, 2.2);
    Vec s(n);
    for (int i = 0; i < n; ++i) s[i] = 2.0 * rng.normal();
    const SupportResult got = support(su, z, R, s);
    const testing::OptResult want = testing::grid_maximize(
        [&](const Vec& x) { return s.dot(x - z); },
        [&](const Vec& x) {
          return x.norm() <= 1.0 + 1e-12 && (x - z).norm() <= R + 1e-12;
        },
        Vec::Constant(n, -1.0), Vec::Ones(n), 200, 120);
    CHECK(got.value >= want.value - 1e-6);
    CHECK(got.argmax.norm() <= 1.0 + 1e-9);
    CHECK((got.argmax - z).norm() <= R + 1e-9);
  }
}

TEST_CASE("support: unsupported combination throws") {
  const auto su =
      ProxSetup::make(ProxKind::EntropySym, FeasibleSet::euclidean_ball(3, 1.0));
  CHECK_THROWS_AS(support(su, Vec::Zero(3), 0.5, vec({1.0, 0.0, 0.0})),
                  std::invalid_argument);
}

TEST_CASE("projection building blocks") {
  CounterRng rng(61);
  for (int t = 0; t < 200; ++t) {
    Vec y(3);
    for (int i = 0; i < 3; ++i) y[i] = 2.0 * rng.normal();
    const Vec ps = project_simplex(y);
    CHECK(ps.minCoeff() >= -1e-12);
    CHECK(ps.sum() == doctest::Approx(1.0));
    const Vec pl = project_l1_ball(y, 0.8);
    CHECK(pl.cwiseAbs().sum() <= 0.8 + 1e-9);
    // projection optimality: no feasible grid point is closer
    const testing::OptResult closest = testing::grid_maximize(
        [&](const Vec& x) { return -(x - y).squaredNorm(); },
        [&](const Vec& x) { return x.cwiseAbs().sum() <= 0.8; },
        Vec::Constant(3, -0.8), Vec::Constant(3, 0.8), 40, 120);
    CHECK((pl - y).squaredNorm() <= -closest.value + 1e-6);
  }
}
