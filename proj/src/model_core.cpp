#include "brand/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "brand/error.hpp"

namespace brand {

void NIWParams::validate() const {
  const auto p = mean.size();
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "NIW mean must be non-empty");
  if (scale_matrix.rows() != p || scale_matrix.cols() != p) {
    throw Error(ErrorCode::DimensionMismatch, "NIW scale matrix must be p x p");
  }
  if (!(precision_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "NIW precision scale must be positive");
  if (!(dof > static_cast<double>(p) - 1.0)) throw Error(ErrorCode::InvalidArgument, "NIW dof must exceed p - 1");
  if (Eigen::LLT<Matrix>(scale_matrix).info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "NIW scale matrix is not positive definite");
  }
}

void ChainControls::validate() const {
  if (a.size() < 2) throw Error(ErrorCode::InvalidArgument, "need a novelty weight and at least one known class");
  if (!(a.array() > 0.0).all()) throw Error(ErrorCode::InvalidArgument, "Dirichlet weights must be positive");
  if (!(kappa > 0.0 && kappa < 1.0)) throw Error(ErrorCode::InvalidArgument, "kappa must lie in (0, 1)");
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  if (gamma_prior && (!(gamma_prior->shape > 0.0) || !(gamma_prior->rate > 0.0))) {
    throw Error(ErrorCode::InvalidArgument, "gamma prior needs positive shape and rate");
  }
  if (n_burnin < 0 || n_iter <= n_burnin) {
    throw Error(ErrorCode::InvalidArgument, "n_iter must exceed n_burnin");
  }
  if (atom_thin < 0) throw Error(ErrorCode::InvalidArgument, "atom_thin must be non-negative");
}

void Hyperparameters::validate(int p) const {
  chain.validate();
  if (!(lambda_tr > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda_tr must be positive");
  // The known-class scale is (nu_tr - p - 1) * Sigma_hat, so its mean exists.
  if (!(nu_tr > p + 1.0)) throw Error(ErrorCode::InvalidArgument, "nu_tr must exceed p + 1");
  base_measure.validate();
  if (base_measure.dim() != p) throw Error(ErrorCode::DimensionMismatch, "base measure dimension differs from data");
}

Vector default_weights(std::span<const int> class_sizes, double a0) {
  double total = 0.0;
  for (int n : class_sizes) total += n;
  Vector a(static_cast<Eigen::Index>(class_sizes.size()) + 1);
  a[0] = a0;
  for (std::size_t j = 0; j < class_sizes.size(); ++j) {
    a[static_cast<Eigen::Index>(j) + 1] = class_sizes[j] / total;
  }
  return a;
}

NIWParams default_base_measure(int p, double scale) {
  return NIWParams{Vector::Zero(p), 0.01, 10.0, scale * Matrix::Identity(p, p)};
}

double xi_ratio(double kappa, int n_known) {
  const double j = n_known;
  return (j + 1.0) * kappa / (j * kappa + 1.0);
}

double xi_value(double kappa, int n_known, long l) {
  const double head = (1.0 - kappa) / (n_known + 1.0);
  if (l <= n_known + 1) return head;
  return head * std::pow(xi_ratio(kappa, n_known), static_cast<double>(l - n_known - 1));
}

double xi_total_mass(double kappa, int n_known) {
  const double head = (1.0 - kappa) / (n_known + 1.0);
  const double r = xi_ratio(kappa, n_known);
  // J equal terms, then the geometric branch starting at l = J + 1.
  return n_known * head + head / (1.0 - r);
}

double truncation_bound(double min_u, double kappa, int n_known) {
  const double head = (1.0 - kappa) / (n_known + 1.0);
  return n_known + 1.0 + (std::log(min_u) - std::log(head)) / std::log(xi_ratio(kappa, n_known));
}

int truncation_level(std::span<const double> u, double kappa, int n_known) {
  if (u.empty()) throw Error(ErrorCode::EmptySlice, "truncation level needs at least one slice variable");
  const double min_u = *std::min_element(u.begin(), u.end());
  const double bound = truncation_bound(min_u, kappa, n_known);
  const int largest_below = static_cast<int>(std::ceil(bound)) - 1;
  return std::max(largest_below, n_known + 1);
}

Vector stick_breaking(const Vector& v) {
  Vector w(v.size());
  double remaining = 1.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    w[k] = v[k] * remaining;
    remaining *= 1.0 - v[k];
  }
  return w;
}

std::pair<int, int> zeta_to_alpha_beta(int zeta, int n_known) {
  if (zeta <= n_known) return {zeta, 0};
  return {0, zeta - n_known};
}

int alpha_beta_to_zeta(int alpha, int beta, int n_known) { return alpha > 0 ? alpha : n_known + beta; }

double log_gaussian_density(const Vector& x, const GaussianAtom& atom) {
  return GaussianEvaluator(atom).log_density(x);
}

GaussianEvaluator::GaussianEvaluator(const GaussianAtom& atom) : mean_(atom.mean) {
  Eigen::LLT<Matrix> chol(atom.cov);
  if (chol.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "Gaussian covariance is not positive definite");
  }
  lower_ = chol.matrixL();
  const double log_det = 2.0 * lower_.diagonal().array().log().sum();
  constant_ = -0.5 * (static_cast<double>(mean_.size()) * std::log(2.0 * std::numbers::pi) + log_det);
}

double GaussianEvaluator::log_density(const Vector& x) const {
  const Vector z = lower_.triangularView<Eigen::Lower>().solve(x - mean_);
  return constant_ - 0.5 * z.squaredNorm();
}

void GaussianEvaluator::log_density_columns(const Matrix& points, Eigen::Ref<Vector> out) const {
  const Matrix z = lower_.triangularView<Eigen::Lower>().solve(points.colwise() - mean_);
  out = (constant_ - 0.5 * z.colwise().squaredNorm().array()).matrix().transpose();
}

namespace {

/// Sum over pairs j > l of a_j a_l mu_j mu_l.
double cross_term(const PriorMoments& m) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < m.a.size(); ++j) {
    for (Eigen::Index l = 0; l < j; ++l) s += m.a[j] * m.a[l] * m.mean[j] * m.mean[l];
  }
  return s;
}

void check_moments(const PriorMoments& m) {
  if (m.a.size() < 1 || m.mean.size() != m.a.size() || m.second_moment.size() != m.a.size()) {
    throw Error(ErrorCode::DimensionMismatch, "prior moments need matching a, mean and second moment vectors");
  }
}

}  // namespace

double prior_mean(const PriorMoments& m) {
  check_moments(m);
  return m.a.dot(m.mean) / m.a_total();
}

double prior_variance(const PriorMoments& m) {
  check_moments(m);
  const double a = m.a_total();
  double s = 0.0;
  for (Eigen::Index j = 0; j < m.a.size(); ++j) {
    s += m.a[j] / a * (m.second_moment[j] - m.a[j] / a * m.mean[j] * m.mean[j]);
  }
  return s - 2.0 * cross_term(m) / (a * a);
}

double covariance_decrement(const PriorMoments& m, double gamma) {
  check_moments(m);
  const double a = m.a_total();
  const double a0 = m.a[0];
  return a0 * (a0 + 1.0) / (a * (a + 1.0)) * (gamma / (1.0 + gamma)) * m.variance(0);
}

double prior_covariance(const PriorMoments& m, double gamma) {
  check_moments(m);
  const double a = m.a_total();
  double s = 0.0;
  for (Eigen::Index j = 0; j < m.a.size(); ++j) {
    s += m.a[j] * (m.a[j] + 1.0) / (a * (a + 1.0)) * m.second_moment[j] - m.a[j] * m.a[j] / (a * a) * m.mean[j] * m.mean[j];
  }
  const double cov0 = s - 2.0 / (a * a * (a + 1.0)) * cross_term(m);
  return cov0 - covariance_decrement(m, gamma);
}

double tie_probability(const Vector& a, double gamma) {
  if (a.size() < 1) throw Error(ErrorCode::InvalidArgument, "tie probability needs weights");
  const double total = a.sum();
  const double norm = total * (total + 1.0);
  double known = 0.0;
  for (Eigen::Index k = 1; k < a.size(); ++k) known += a[k] * (a[k] + 1.0) / norm;
  return known + a[0] * (a[0] + 1.0) / norm / (1.0 + gamma);
}

double tie_probability_symmetric(int n_known, double a0, double a_tilde, double gamma) {
  Vector a = Vector::Constant(n_known + 1, a_tilde / (n_known + 1.0));
  a[0] = a0 / (n_known + 1.0);
  return tie_probability(a, gamma);
}

}  // namespace brand
