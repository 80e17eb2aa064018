#pragma once

#include <functional>
#include <optional>

#include "ucmin/rng.hpp"
#include "ucmin/types.hpp"

namespace ucmin {

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

enum class NormKind { L1, L2, Lp };

struct NormPair {
  NormKind kind = NormKind::L2;
  int n = 0;
  double p = 2.0;  // only for Lp

  static NormPair l1(int n) { return {NormKind::L1, n, 1.0}; }
  static NormPair l2(int n) { return {NormKind::L2, n, 2.0}; }
  static NormPair lp(int n, double p);

  // Exponent of the dual norm (conjugate exponent for Lp).
  double dual_p() const;
};

double norm(const NormPair& pair, const Vec& x);
double dual_norm(const NormPair& pair, const Vec& s);

// ---------------------------------------------------------------------------
// Prox-functions of the unit ball
// ---------------------------------------------------------------------------

enum class ProxKind { HalfSqEuclid, PNormSq, EntropySym };

struct ProxConstants {
  double mu_d;
  double a_d;
  std::optional<double> c_d;
};

// Certified constants for each family:
//   HalfSqEuclid        -> (1, 1/2, 1/2)
//   EntropySym          -> (1/2, ln(2n), none)
//   PNormSq(p in (1,2]) -> ((p-1) n^{2(1-p)/p}, 1/2, 1/2)
ProxConstants prox_constants(ProxKind kind, int n, double p = 2.0);

struct ProxFunction {
  ProxKind kind = ProxKind::HalfSqEuclid;
  int n = 0;
  double p = 2.0;  // only for PNormSq
  double mu_d = 1.0;
  double a_d = 0.5;
  std::optional<double> c_d = 0.5;

  static ProxFunction make(ProxKind kind, int n, double p = 2.0);

  // The norm this prox-function is strongly convex against (and whose unit
  // ball is its domain): L2 for HalfSqEuclid, L1 for the other two.
  NormPair paired_norm() const;
};

// d(x) on the unit ball of the paired norm. For EntropySym the inner
// minimum over decompositions x = u - v, sum(u+v) = 1 is solved by a single
// scalar multiplier (bisection); inputs with ||x||_1 in (1, 1+1e-10] are
// renormalized, anything beyond throws.
double prox_value(const ProxFunction& d, const Vec& x);

// Gradient of d where it exists (EntropySym: interior of the ball, from the
// optimal decomposition; magnitudes saturate near the boundary through the
// 1e-300 floor on u, v).
Vec prox_gradient(const ProxFunction& d, const Vec& x);

// Optimal symmetric decomposition for the entropy prox: u - v = x,
// sum(u + v) = total, with u_i v_i = c for the optimal multiplier.
struct EntropyDecomposition {
  Vec u;
  Vec v;
  double c;
};
EntropyDecomposition entropy_decompose(const Vec& x, double total = 1.0);

// ---------------------------------------------------------------------------
// Symmetrization diagnostic (Lemma on conv{Q, -Q})
// ---------------------------------------------------------------------------

// Inputs describing f on Q for the symmetrization check. The search walks
// u over alpha*Q (via snap); v = u - x is formed exactly and only checked
// against the inequality part of (1-alpha)*Q. Sets with an affine equality
// (the simplex) pin alpha as a function of x, which keeps the affine part of
// the v-membership automatic.
struct SymmetrizationInput {
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&, double)> snap_to_scaled;
  std::function<bool(const Vec&, double)> in_scaled_set;  // inequality part
  std::function<double(const Vec&)> alpha_pin;            // optional
  // optional known-feasible u for (x, alpha); seeds the search when the
  // feasible slice is thinner than the grid
  std::function<Vec(const Vec&, double)> initial_u;
  Vec box_lo;
  Vec box_hi;
  std::function<Vec(CounterRng&)> sample_set;
  int n = 0;
  double mu = 0.0;
};

// Checks the midpoint inequality
//   f0((x+y)/2) <= f0(x)/2 + f0(y)/2 - (mu/16) ||x-y||^2
// on `pairs` random pairs from conv{Q, -Q}, with f0 evaluated by brute-force
// inner minimization over decompositions. `norm_for_mu` is the norm the
// modulus refers to. Diagnostic only.
bool symmetrization_modulus_check(const SymmetrizationInput& in,
                                  const NormPair& norm_for_mu, int pairs,
                                  std::uint64_t seed, int grid = 25);

// Brute-force symmetrization value f0(x) (exposed for tests).
double symmetrization_value(const SymmetrizationInput& in, const Vec& x,
                            int grid = 25);

}  // namespace ucmin
