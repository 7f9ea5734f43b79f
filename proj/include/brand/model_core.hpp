#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "brand/types.hpp"

namespace brand {

/// Normal-inverse-Wishart: Sigma ~ IW(dof, scale_matrix), mu | Sigma ~ N(mean, Sigma / precision_scale).
struct NIWParams {
  Vector mean;
  double precision_scale = 1.0;
  double dof = 1.0;
  Matrix scale_matrix;

  int dim() const { return static_cast<int>(mean.size()); }
  void validate() const;
};

struct GaussianAtom {
  Vector mean;
  Matrix cov;
};

struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;
};

/// Settings shared by the multivariate and functional samplers.
struct ChainControls {
  /// Dirichlet weights (a_0, a_1, ..., a_J); a_0 is the novelty weight.
  Vector a;
  /// DP concentration; the starting value when gamma_prior is set.
  double gamma = 1.0;
  /// When set, gamma is resampled every iteration under this prior.
  std::optional<GammaPrior> gamma_prior;
  double kappa = 0.5;
  int n_iter = 2000;
  int n_burnin = 1000;
  std::uint64_t seed = 0;
  /// Keep atoms every atom_thin retained iterations (0 disables snapshots).
  int atom_thin = 10;

  int n_known() const { return static_cast<int>(a.size()) - 1; }
  void validate() const;
};

struct Hyperparameters {
  ChainControls chain;
  double lambda_tr = 10.0;
  double nu_tr = 10.0;
  /// Base measure H of the novelty DP.
  NIWParams base_measure;
  /// Known atoms are held at the Stage I estimates once both lambda_tr and
  /// nu_tr reach this value.
  double freeze_threshold = 1e5;

  bool known_frozen() const { return lambda_tr >= freeze_threshold && nu_tr >= freeze_threshold; }
  void validate(int p) const;
};

/// Dirichlet weights (a_0, n_1/N, ..., n_J/N).
Vector default_weights(std::span<const int> class_sizes, double a0 = 0.1);

/// Flat base measure: m = 0, lambda = 0.01, nu = 10, S = scale * I.
NIWParams default_base_measure(int p, double scale = 1.0);

/// Slice weight xi_l (l >= 1): (1 - kappa)/(J + 1) for l <= J + 1, then
/// geometric decay with ratio (J + 1)kappa / (J kappa + 1).
double xi_value(double kappa, int n_known, long l);

/// Ratio of the geometric tail of the xi sequence.
double xi_ratio(double kappa, int n_known);

/// Sum of xi_1..xi_{J+1} plus the closed-form geometric tail.
double xi_total_mass(double kappa, int n_known);

/// Largest l with xi_l > min(u), clamped below at J + 1.
int truncation_level(std::span<const double> u, double kappa, int n_known);

/// The unclamped real-valued bound J + 1 + (log min u - log xi_{J+1}) / log r.
double truncation_bound(double min_u, double kappa, int n_known);

/// w_k = v_k prod_{l<k} (1 - v_l).
Vector stick_breaking(const Vector& v);

std::pair<int, int> zeta_to_alpha_beta(int zeta, int n_known);
int alpha_beta_to_zeta(int alpha, int beta, int n_known);

/// log N(x; mean, cov).
double log_gaussian_density(const Vector& x, const GaussianAtom& atom);

/// Cholesky-factored Gaussian for repeated density evaluations.
class GaussianEvaluator {
 public:
  explicit GaussianEvaluator(const GaussianAtom& atom);
  double log_density(const Vector& x) const;
  /// Log densities of every column of `points` (p x M).
  void log_density_columns(const Matrix& points, Eigen::Ref<Vector> out) const;

 private:
  Vector mean_;
  Matrix lower_;
  double constant_ = 0.0;
};

/// Moments of the univariate prior construction: entry 0 is the base measure H,
/// entries 1..J the known priors P_j.
struct PriorMoments {
  Vector a;
  Vector mean;
  Vector second_moment;

  double a_total() const { return a.sum(); }
  double variance(int j) const { return second_moment[j] - mean[j] * mean[j]; }
};

double prior_mean(const PriorMoments& m);
double prior_variance(const PriorMoments& m);
/// Cov(Theta_m, Theta_m') of two draws from the same random measure; gamma = 0
/// gives the plain (J + 1)-component mixture.
double prior_covariance(const PriorMoments& m, double gamma);
/// Cov_0 - Cov_gamma = a0(a0+1)/(a(a+1)) * gamma/(1+gamma) * sigma_0^2.
double covariance_decrement(const PriorMoments& m, double gamma);

/// P(Theta_m = Theta_m') for weights (a_0, ..., a_J).
double tie_probability(const Vector& a, double gamma);

/// Tie probability with Dirichlet(a0/(J+1), a~/(J+1), ..., a~/(J+1)) weights.
double tie_probability_symmetric(int n_known, double a0, double a_tilde, double gamma);

}  // namespace brand
