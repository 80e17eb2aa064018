#pragma once

#include "ucmin/geometry.hpp"

namespace ucmin {

// ---------------------------------------------------------------------------
// Feasible sets
// ---------------------------------------------------------------------------

enum class SetKind { FullSpace, EuclideanBall, Simplex, L1Ball, Box };

struct FeasibleSet {
  SetKind kind = SetKind::FullSpace;
  int n = 0;
  double radius = 1.0;  // EuclideanBall / L1Ball
  Vec lo, hi;           // Box

  static FeasibleSet full_space(int n);
  static FeasibleSet euclidean_ball(int n, double radius);
  static FeasibleSet simplex(int n);
  static FeasibleSet l1_ball(int n, double radius);
  static FeasibleSet box(Vec lo, Vec hi);

  bool contains(const Vec& x, double tol = 1e-10) const;
  // Exact Euclidean projection onto the set.
  Vec project_euclidean(const Vec& y) const;
  // Canonical feasible point (prox-centers for tests, default x0).
  Vec center_point() const;
  // max_{x in Q} ||x - x0||_2; throws for FullSpace.
  double max_euclidean_dist(const Vec& x0) const;
  const char* name() const;
};

struct ProxSetup {
  NormPair norm;
  ProxFunction prox;
  FeasibleSet set;

  static ProxSetup make(ProxKind prox_kind, const FeasibleSet& set,
                        double p = 2.0);
};

// Trust-region subproblem data: prox-center z in Q, radius R of the ball
// B_R(z) in the setup norm, and the gain beta multiplying d((x-z)/R).
struct LocalProblem {
  ProxSetup setup;
  Vec z;
  double R = 1.0;
  double beta = 1.0;

  LocalProblem(ProxSetup setup_, Vec z_, double R_, double beta_);
  LocalProblem with_beta(double b) const;
};

// ---------------------------------------------------------------------------
// Prox-mapping and value function
// ---------------------------------------------------------------------------

// argmax { <s, x - z> - beta * d((x-z)/R) : x in Q, ||x - z|| <= R }.
Vec prox_map(const LocalProblem& lp, const Vec& s);

// Value of the above maximum.
double v_value(const LocalProblem& lp, const Vec& s);

// ||pi(s1) - pi(s2)|| <= R^2/(beta mu(d)) ||s1 - s2||_*  (diagnostic).
bool v_gradient_lipschitz_check(const LocalProblem& lp, const Vec& s1,
                                const Vec& s2);

// ---------------------------------------------------------------------------
// Separable entropy machinery (simplex / hyperoctahedron geometries)
// ---------------------------------------------------------------------------

// min { s*u + t*v + u ln u + v ln v : u >= v - z, u,v >= 0 }.
// Case test: the equality-constrained pair is accepted iff
// psi'_u + psi'_v = 0 and psi'_u - psi'_v > 0 there; otherwise the
// unconstrained pair (e^{-1-s}, e^{-1-t}) is returned.
struct Entropy2D {
  double u;
  double v;
  bool equality_branch;
};
Entropy2D solve_2d_entropy(double s, double t, double z);

// Objective value of the 2d subproblem at (u, v).
double entropy2d_objective(double s, double t, double u, double v);

// Two-multiplier dual solvers for the entropy prox (nested scalar
// root-finding; inner level enforces the affine constraint, outer level
// enforces sum(u+v) = R).
Vec simplex_prox_dual(const LocalProblem& lp, const Vec& s);
Vec hyperoct_prox_dual(const LocalProblem& lp, const Vec& s);

// Full dual solution (multipliers of the scaled problem) for gap
// certification in tests and diagnostics.
struct EntropyDualSolution {
  Vec x;
  double lam;
  double nu;
  double primal_scaled;  // objective of the scaled separable problem
  double dual_scaled;    // Lagrangian dual value at (lam, nu)
};
EntropyDualSolution simplex_prox_dual_full(const LocalProblem& lp,
                                           const Vec& s);
EntropyDualSolution hyperoct_prox_dual_full(const LocalProblem& lp,
                                            const Vec& s);

// ---------------------------------------------------------------------------
// Exact support function over Q ∩ B_R(z)
// ---------------------------------------------------------------------------

struct SupportResult {
  double value;
  Vec argmax;
};
// max { <s, x - z> : x in Q, ||x - z|| <= R } with the maximizer; exact
// (closed form for Euclidean geometry, greedy coordinate transport for
// l1-type sets). Throws for unsupported (set, norm) pairs.
SupportResult support(const ProxSetup& setup, const Vec& z, double R,
                      const Vec& s);
bool support_available(const ProxSetup& setup);

// ---------------------------------------------------------------------------
// Euclidean projections (building blocks, exposed for tests)
// ---------------------------------------------------------------------------

Vec project_simplex(const Vec& y);
Vec project_l1_ball(const Vec& y, double radius);
// Euclidean projection onto Q ∩ {x : ||x - z||_ball <= R} (Dykstra).
Vec project_intersection(const FeasibleSet& set, const NormPair& ball_norm,
                         const Vec& z, double R, const Vec& y);

}  // namespace ucmin
