#include "brand/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "brand/error.hpp"

namespace brand {

double Rng::uniform() {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  double u = 0.0;
  do {
    u = dist(engine_);
  } while (u <= 0.0);
  return u;
}

double Rng::normal() {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "gamma draw needs positive shape and rate");
  }
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(engine_);
}

double Rng::beta(double a, double b) {
  const double x = gamma(a, 1.0);
  const double y = gamma(b, 1.0);
  const double s = x + y;
  if (s <= 0.0) return a >= b ? 1.0 : 0.0;
  return x / s;
}

Vector Rng::dirichlet(std::span<const double> concentration) {
  Vector draw(static_cast<Eigen::Index>(concentration.size()));
  double total = 0.0;
  for (std::size_t k = 0; k < concentration.size(); ++k) {
    draw[static_cast<Eigen::Index>(k)] = gamma(concentration[k], 1.0);
    total += draw[static_cast<Eigen::Index>(k)];
  }
  if (total <= 0.0) {
    // Every component underflowed; put the mass on the largest concentration.
    draw.setZero();
    const auto it = std::max_element(concentration.begin(), concentration.end());
    draw[static_cast<Eigen::Index>(it - concentration.begin())] = 1.0;
    return draw;
  }
  return draw / total;
}

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "categorical draw with no positive weight");
  }
  double target = uniform() * total;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    target -= weights[k];
    if (target < 0.0) return k;
  }
  // Rounding can leave a sliver; return the last positive weight.
  for (std::size_t k = weights.size(); k-- > 0;) {
    if (weights[k] > 0.0) return k;
  }
  return weights.size() - 1;
}

std::size_t Rng::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Matrix sample_inverse_wishart(double dof, const Matrix& scale, Rng& rng) {
  const Eigen::Index p = scale.rows();
  if (!(dof > static_cast<double>(p) - 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "inverse-Wishart needs dof > p - 1");
  }
  Eigen::LLT<Matrix> chol(scale);
  if (chol.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "inverse-Wishart scale matrix is not SPD");
  }
  // Bartlett factor A of a Wishart(dof, I) draw; Sigma = C A^{-T} A^{-1} C^T.
  Matrix a = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(dof - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Matrix c = chol.matrixL();
  // B = C A^{-T}  <=>  B A^T = C  <=>  A B^T = C^T.
  const Matrix bt = a.triangularView<Eigen::Lower>().solve(c.transpose());
  Matrix sigma = bt.transpose() * bt;
  return 0.5 * (sigma + sigma.transpose());
}

Vector sample_mvn(const Vector& mean, const Matrix& cov, Rng& rng) {
  Eigen::LLT<Matrix> chol(cov);
  if (chol.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "normal covariance is not SPD");
  }
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + chol.matrixL() * z;
}

Vector sample_mvn_canonical(const Matrix& precision, const Vector& linear, Rng& rng) {
  Eigen::LLT<Matrix> chol(precision);
  if (chol.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "precision matrix is not SPD");
  }
  const Vector mean = chol.solve(linear);
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  // Q = L L^T, x = mean + L^{-T} z has covariance Q^{-1}.
  return mean + chol.matrixU().solve(z);
}

}  // namespace brand
