#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "brand/types.hpp"

namespace brand {

/// Seeded random source used by every stochastic routine. All draws flow
/// through one mt19937_64 so a run is reproducible from its seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform draw on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Gamma with the given shape and rate (mean shape / rate).
  double gamma(double shape, double rate);
  double beta(double a, double b);
  double chi_squared(double dof) { return gamma(0.5 * dof, 0.5); }
  /// Inverse-gamma with shape a and scale b (mean b / (a - 1)).
  double inverse_gamma(double shape, double scale) { return 1.0 / gamma(shape, scale); }
  Vector dirichlet(std::span<const double> concentration);
  /// Index drawn proportionally to non-negative weights.
  std::size_t categorical(std::span<const double> weights);
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Deterministic child seed for a named stream of a root seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

/// Draw from an inverse-Wishart with the given degrees of freedom and scale
/// matrix (E = scale / (dof - p - 1)), via the Bartlett decomposition.
Matrix sample_inverse_wishart(double dof, const Matrix& scale, Rng& rng);

/// Draw from N(mean, cov).
Vector sample_mvn(const Vector& mean, const Matrix& cov, Rng& rng);

/// Draw from N(Q^{-1} b, Q^{-1}) given the precision Q and the linear term b.
Vector sample_mvn_canonical(const Matrix& precision, const Vector& linear, Rng& rng);

}  // namespace brand
