#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "ucmin/proxmap.hpp"
#include "ucmin/rng.hpp"

namespace ucmin {

// Problem-class description: f uniformly convex with power rho and modulus
// mu_f (both w.r.t. the geometry norm), subgradients bounded by L in the dual
// norm, oracle noise intensity sigma.
struct ConvexityParams {
  double rho = 2.0;
  double mu_f = 0.0;
  double L = 1.0;
  double sigma = 0.0;
};

struct OracleResult {
  Vec g;
  std::optional<double> value;
  std::optional<Vec> dual_witness;
  // exact subgradient as a diagnostic side channel (stochastic wrappers fill
  // it; solvers must not read it)
  std::optional<Vec> g_exact;
};

class FirstOrderOracle {
 public:
  virtual ~FirstOrderOracle() = default;

  OracleResult query(const Vec& x) { return do_query(x, calls_++); }
  long long calls() const { return calls_; }

 protected:
  virtual OracleResult do_query(const Vec& x, long long k) = 0;

 private:
  long long calls_ = 0;
};

// ---------------------------------------------------------------------------
// Power objective f(x) = 2^{rho-3} ||x - x*||_2^rho
// ---------------------------------------------------------------------------

class PowerObjective final : public FirstOrderOracle {
 public:
  // Certifies (rho, mu_f, L) w.r.t. geometry.norm; L is taken over the
  // feasible set (diameter_hint required when the set is unbounded).
  PowerObjective(double rho, Vec x_star, const ProxSetup& geometry,
                 std::optional<double> diameter_hint = std::nullopt);

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  const ConvexityParams& params() const { return params_; }
  const Vec& x_star() const { return x_star_; }
  double f_star() const { return 0.0; }

 protected:
  OracleResult do_query(const Vec& x, long long k) override;

 private:
  double rho_;
  Vec x_star_;
  ConvexityParams params_;
};

std::unique_ptr<PowerObjective> make_power_objective(
    double rho, Vec x_star, const ProxSetup& geometry,
    std::optional<double> diameter_hint = std::nullopt);

// ---------------------------------------------------------------------------
// Saddle objective f(x) = max_w <w,x> - 0.5 ||w||_q^2 = 0.5 ||x||_p^2
// ---------------------------------------------------------------------------

class SaddlePNorm final : public FirstOrderOracle {
 public:
  SaddlePNorm(double q, const ProxSetup& geometry);

  double q() const { return q_; }
  double p() const { return p_; }
  double value(const Vec& x) const;          // f(x) = 0.5 ||x||_p^2
  Vec witness(const Vec& x) const;           // w(x), also f'(x)
  double psi(const Vec& x, const Vec& w) const;
  double eta(const Vec& w) const;            // min_x over Q of Psi(x, w)
  double f_star() const;                     // 0 iff 0 in Q (supported sets)
  const ConvexityParams& params() const { return params_; }
  const FeasibleSet& set() const { return geometry_.set; }

 protected:
  OracleResult do_query(const Vec& x, long long k) override;

 private:
  double q_;
  double p_;
  ProxSetup geometry_;
  ConvexityParams params_;
};

std::unique_ptr<SaddlePNorm> make_saddle_pnorm(double q,
                                               const ProxSetup& geometry);

// ---------------------------------------------------------------------------
// Appendix hard instances: f(x) = L/2 max_i (xi_i x_i + d_i) + 2^{rho-3}||x||_2^rho
// ---------------------------------------------------------------------------

class PiecewisePlusPower final : public FirstOrderOracle {
 public:
  // `delta` (when given) validates 0 < offsets < delta.
  PiecewisePlusPower(double L, double rho, int M, std::vector<int> signs,
                     std::vector<double> offsets, double domain_radius, int n,
                     std::optional<double> delta = std::nullopt);

  double value(const Vec& x) const;
  Vec subgradient(const Vec& x) const;  // lowest-index active piece
  int active_piece(const Vec& x) const;
  const ConvexityParams& params() const { return params_; }

 protected:
  OracleResult do_query(const Vec& x, long long k) override;

 private:
  double half_l_;
  double rho_;
  int m_;
  std::vector<int> signs_;
  std::vector<double> offsets_;
  ConvexityParams params_;
};

std::unique_ptr<PiecewisePlusPower> make_piecewise_plus_power(
    double L, double rho, int M, std::vector<int> signs,
    std::vector<double> offsets, double domain_radius, int n,
    std::optional<double> delta = std::nullopt);

// Worst-case bookkeeping from the lower-bound construction.
long long strict_floor_ll(double a);
long long appendix_query_budget(double eps, double L, double R, double rho,
                                int n);
double appendix_delta(double eps, double L, double R, double rho,
                      long long M);
double appendix_lambda(double L, double R, double rho, long long M);

// ---------------------------------------------------------------------------
// Resisting oracle (adversarial instance fixing)
// ---------------------------------------------------------------------------

class ResistingOracle final : public FirstOrderOracle {
 public:
  ResistingOracle(double L, double rho, int M, double delta,
                  double domain_radius, int n);

  bool frozen() const { return fixed_ >= m_; }
  int pieces_fixed() const { return fixed_; }
  const std::vector<int>& piece_indices() const { return piece_index_; }
  const std::vector<int>& piece_signs() const { return piece_sign_; }
  const std::vector<double>& piece_offsets() const { return piece_offset_; }
  // post-hoc evaluation of the frozen instance (valid after M queries; does
  // not touch the call counter)
  double frozen_value(const Vec& x) const;
  Vec frozen_subgradient(const Vec& x) const;
  // \bar x = -lambda sum_k xi_k e_{i_k} from the lower-bound construction
  Vec adversarial_point() const;

 protected:
  OracleResult do_query(const Vec& x, long long k) override;

 private:
  void fix_next(const Vec& x);
  double evaluate(const Vec& x, Vec* grad) const;

  double l_;
  double rho_;
  int m_;
  double delta_;
  double radius_;
  int n_;
  int fixed_ = 0;
  std::vector<int> piece_index_;   // i_1, i_2, ...
  std::vector<int> piece_sign_;
  std::vector<double> piece_offset_;
  std::vector<bool> used_;
};

// ---------------------------------------------------------------------------
// Stochastic oracle wrapper
// ---------------------------------------------------------------------------

enum class NoiseKind { None, BoundedDualBall, SubGaussian };

struct NoiseModel {
  NoiseKind kind = NoiseKind::None;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

// Per-coordinate deviation used by SubGaussian noise so that
// E exp{||xi||_*^2 / sigma^2} <= e holds in the given dual norm.
double subgaussian_coordinate_scale(const NormPair& norm, double sigma);

class StochasticOracle final : public FirstOrderOracle {
 public:
  StochasticOracle(FirstOrderOracle& base, NoiseModel noise,
                   const NormPair& geometry_norm);

  // one noise draw (exposed for the Monte-Carlo moment tests)
  Vec draw_noise(std::uint64_t k) const;

 protected:
  OracleResult do_query(const Vec& x, long long k) override;

 private:
  FirstOrderOracle& base_;
  NoiseModel noise_;
  NormPair norm_;
};

std::unique_ptr<StochasticOracle> stochastic_wrap(FirstOrderOracle& base,
                                                  NoiseModel noise,
                                                  const NormPair& geometry_norm);

}  // namespace ucmin
