#pragma once

#include <optional>
#include <vector>

#include "brand/model_core.hpp"
#include "brand/random.hpp"
#include "brand/robust_prior.hpp"
#include "brand/sampler.hpp"
#include "brand/types.hpp"

namespace brand::functional {

/// Curves observed on a common grid, one row per curve.
struct CurveSet {
  Vector grid;
  Matrix values;
  /// Class labels 1..J for training curves; empty for test curves.
  std::vector<int> labels;

  int n_curves() const { return static_cast<int>(values.rows()); }
  int n_points() const { return static_cast<int>(grid.size()); }
  void validate() const;
};

/// Clamped B-spline basis with uniform interior knots. The range defaults to
/// the grid range when not given.
struct BasisSpec {
  int n_basis = 100;
  int order = 5;
  std::optional<double> lower;
  std::optional<double> upper;
};

/// Knot vector (n_basis + order entries) over [lower, upper].
Vector uniform_knots(const BasisSpec& spec, double lower, double upper);

/// T x B matrix of basis values (Cox-de Boor); the last basis is 1 at the right end.
Matrix bspline_basis(const BasisSpec& spec, const Vector& grid);

/// Least-squares basis coefficients, one row per curve.
Matrix smooth_curves(const CurveSet& curves, const BasisSpec& spec);

/// Inverse-gamma with shape and scale (mean scale / (shape - 1)).
struct InverseGamma {
  double shape = 1.0;
  double scale = 1.0;

  double mean() const { return scale / (shape - 1.0); }
  double variance() const { return scale * scale / ((shape - 1.0) * (shape - 1.0) * (shape - 2.0)); }
  double log_density(double x) const;
};

/// IG(2 + m^2/v, m(1 + m^2/v)): mean m and variance v.
InverseGamma known_noise_prior(double mean, double variance);

struct FunctionalKnownPrior {
  /// Grid the curves below are evaluated on.
  Vector grid;
  Vector mean_curve;
  Vector noise_curve;
  /// Prior variance of the mean curve around mean_curve; 0 holds it fixed.
  double phi = 0.0;
  /// Prior variance of the noise curve around noise_curve; 0 holds it fixed.
  double v = 0.0;
  RobustClassSummary robust;
};

/// Robust class-wise mean and noise curves from labelled training curves.
/// The noise curve divides the untrimmed squared residuals by n_j - 1.
std::vector<FunctionalKnownPrior> extract_functional_priors(const CurveSet& train, const BasisSpec& spec,
                                                            const McdConfig& cfg, double phi = 0.0, double v = 0.0);

struct FunctionalHyper {
  ChainControls chain;
  double a_tau = 3.0;
  double b_tau = 1.0;
  double s2 = 1.0;
  double a_H = 5.0;
  double b_H = 1.0;
  BasisSpec basis;

  void validate() const;
};

struct KnownCurveAtom {
  Vector mean;
  Vector noise;
};

struct NovelCurveAtom {
  Vector rho;
  double psi = 0.0;
  double tau2 = 1.0;
  Vector noise;
  /// basis * rho, cached.
  Vector mean;
};

/// Gaussian in canonical form: precision Q and linear term b (mean Q^{-1} b).
struct CanonicalNormal {
  Matrix precision;
  Vector linear;

  Vector mean() const;
  Matrix covariance() const;
};

struct Normal {
  double mean = 0.0;
  double variance = 1.0;

  double log_density(double x) const;
};

/// Full conditional of the novel coefficients given curves (rows) assigned to
/// the atom: precision n B'DB + I/tau2, linear B'D sum(y) + psi/tau2 * 1,
/// with D = diag(1/noise).
CanonicalNormal coefficient_conditional(const Matrix& basis, const Matrix& curves, const Vector& noise, double psi,
                                        double tau2);

/// psi | rho, tau2 with psi ~ N(0, s2) and rho_b ~ N(psi, tau2).
Normal psi_conditional(const Vector& rho, double tau2, double s2);

/// tau2 | rho, psi: IG(a_tau + B/2, b_tau + sum (rho - psi)^2 / 2).
InverseGamma tau2_conditional(const Vector& rho, double psi, double a_tau, double b_tau);

/// Pointwise noise | mean: IG(shape + n/2, scale + sum_m (y_m(t) - f(t))^2 / 2).
std::vector<InverseGamma> noise_conditional(const Matrix& curves, const Vector& mean, const InverseGamma& prior);
std::vector<InverseGamma> noise_conditional(const Matrix& curves, const Vector& mean,
                                            const std::vector<InverseGamma>& prior);

/// Pointwise known mean | noise with f(t) ~ N(prior_mean, phi).
std::vector<Normal> known_mean_conditional(const Matrix& curves, const Vector& prior_mean, double phi,
                                           const Vector& noise);

ChainOutput run_functional_chain(const CurveSet& test, const std::vector<FunctionalKnownPrior>& priors,
                                 const FunctionalHyper& hyper);

/// Mean curve of each group of rows; groups are labels 1..G (other labels ignored).
Matrix group_mean_curves(const Matrix& values, const std::vector<int>& labels, int n_groups);

}  // namespace brand::functional
