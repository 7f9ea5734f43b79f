#include "brand/functional.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "brand/detail/slice_engine.hpp"
#include "brand/error.hpp"

namespace brand::functional {

namespace {

constexpr double kNoiseFloor = 1e-12;

double upper_chi2_quantile(int dof, double tail) {
  const boost::math::chi_squared_distribution<double> chi(dof);
  return boost::math::quantile(boost::math::complement(chi, tail));
}

void check_order(const BasisSpec& spec) {
  if (spec.order < 1) throw Error(ErrorCode::InvalidKnots, "spline order must be at least 1");
  if (spec.n_basis < spec.order) {
    throw Error(ErrorCode::InvalidKnots, "number of basis functions (" + std::to_string(spec.n_basis) +
                                             ") is below the spline order (" + std::to_string(spec.order) + ")");
  }
}

std::pair<double, double> basis_range(const BasisSpec& spec, const Vector& grid) {
  if (grid.size() == 0 && (!spec.lower || !spec.upper)) {
    throw Error(ErrorCode::InvalidKnots, "basis range needs a grid or explicit bounds");
  }
  const double lo = spec.lower.value_or(grid.size() > 0 ? grid.minCoeff() : 0.0);
  const double hi = spec.upper.value_or(grid.size() > 0 ? grid.maxCoeff() : 0.0);
  return {lo, hi};
}

Matrix rows_of(const Matrix& values, const IndexList& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = values.row(rows[i]);
  return out;
}

}  // namespace

void CurveSet::validate() const {
  if (values.cols() != grid.size()) {
    throw Error(ErrorCode::DimensionMismatch, "curves have " + std::to_string(values.cols()) + " points but the grid has " +
                                                  std::to_string(grid.size()));
  }
  for (Eigen::Index t = 1; t < grid.size(); ++t) {
    if (!(grid[t] > grid[t - 1])) throw Error(ErrorCode::InvalidArgument, "grid is not strictly increasing");
  }
  if (!values.allFinite() || !grid.allFinite()) throw Error(ErrorCode::InvalidArgument, "curves contain non-finite values");
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != values.rows()) {
    throw Error(ErrorCode::LengthMismatch, "label count differs from the number of curves");
  }
}

Vector uniform_knots(const BasisSpec& spec, double lower, double upper) {
  check_order(spec);
  if (!(upper > lower)) throw Error(ErrorCode::InvalidKnots, "basis range is empty");
  const int n_interior = spec.n_basis - spec.order;
  Vector knots(spec.n_basis + spec.order);
  for (int i = 0; i < spec.order; ++i) {
    knots[i] = lower;
    knots[spec.n_basis + i] = upper;
  }
  for (int i = 1; i <= n_interior; ++i) {
    knots[spec.order + i - 1] = lower + (upper - lower) * i / (n_interior + 1);
  }
  return knots;
}

Matrix bspline_basis(const BasisSpec& spec, const Vector& grid) {
  const auto [lo, hi] = basis_range(spec, grid);
  const Vector knots = uniform_knots(spec, lo, hi);
  const int degree = spec.order - 1;
  const int B = spec.n_basis;
  const double slack = 1e-12 * (hi - lo);
  Matrix out = Matrix::Zero(grid.size(), B);
  std::vector<double> left(static_cast<std::size_t>(spec.order)), right(static_cast<std::size_t>(spec.order)),
      values(static_cast<std::size_t>(spec.order));
  for (Eigen::Index r = 0; r < grid.size(); ++r) {
    double t = grid[r];
    if (t < lo - slack || t > hi + slack) {
      throw Error(ErrorCode::InvalidKnots, "grid point " + std::to_string(t) + " lies outside the knot range");
    }
    t = std::clamp(t, lo, hi);
    // Knot span: knots[span] <= t < knots[span + 1]; the right end uses the last span.
    int span = B - 1;
    if (t < hi) {
      const double* first = knots.data() + degree;
      const double* last = knots.data() + B + 1;
      span = static_cast<int>(std::upper_bound(first, last, t) - knots.data()) - 1;
    }
    // Cox-de Boor triangle for the order nonzero basis functions.
    values[0] = 1.0;
    for (int j = 1; j <= degree; ++j) {
      left[static_cast<std::size_t>(j)] = t - knots[span + 1 - j];
      right[static_cast<std::size_t>(j)] = knots[span + j] - t;
      double saved = 0.0;
      for (int k = 0; k < j; ++k) {
        const double denom = right[static_cast<std::size_t>(k + 1)] + left[static_cast<std::size_t>(j - k)];
        const double temp = values[static_cast<std::size_t>(k)] / denom;
        values[static_cast<std::size_t>(k)] = saved + right[static_cast<std::size_t>(k + 1)] * temp;
        saved = left[static_cast<std::size_t>(j - k)] * temp;
      }
      values[static_cast<std::size_t>(j)] = saved;
    }
    for (int k = 0; k <= degree; ++k) out(r, span - degree + k) = values[static_cast<std::size_t>(k)];
  }
  return out;
}

Matrix smooth_curves(const CurveSet& curves, const BasisSpec& spec) {
  curves.validate();
  if (curves.n_points() < spec.n_basis) {
    throw Error(ErrorCode::RankDeficientBasis, std::to_string(curves.n_points()) + " grid points cannot identify " +
                                                   std::to_string(spec.n_basis) + " basis coefficients");
  }
  // Clamped uniform knots can break the Schoenberg-Whitney interleaving when
  // T is close to B; the orthogonal decomposition then returns the
  // minimum-norm least-squares coefficients.
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(bspline_basis(spec, curves.grid));
  return cod.solve(curves.values.transpose()).transpose();
}

double InverseGamma::log_density(double x) const {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

InverseGamma known_noise_prior(double mean, double variance) {
  if (!(mean > 0.0) || !(variance > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "noise prior needs a positive mean and variance");
  }
  const double ratio = mean * mean / variance;
  return InverseGamma{2.0 + ratio, mean * (1.0 + ratio)};
}

double Normal::log_density(double x) const {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + d * d / variance);
}

Vector CanonicalNormal::mean() const { return precision.llt().solve(linear); }

Matrix CanonicalNormal::covariance() const {
  return precision.llt().solve(Matrix::Identity(precision.rows(), precision.cols()));
}

std::vector<FunctionalKnownPrior> extract_functional_priors(const CurveSet& train, const BasisSpec& spec,
                                                            const McdConfig& cfg, double phi, double v) {
  train.validate();
  if (train.labels.empty()) throw Error(ErrorCode::InvalidArgument, "training curves need class labels");
  if (phi < 0.0 || v < 0.0) throw Error(ErrorCode::InvalidArgument, "prior variances must be non-negative");
  const Matrix basis = bspline_basis(spec, train.grid);
  const LabeledDataset coefficients{smooth_curves(train, spec), train.labels};
  const auto robust = extract_class_priors(coefficients, cfg);
  const auto sizes = coefficients.class_sizes();

  std::vector<FunctionalKnownPrior> out;
  for (std::size_t j = 0; j < robust.size(); ++j) {
    FunctionalKnownPrior prior;
    prior.grid = train.grid;
    prior.mean_curve = basis * robust[j].mean;
    prior.noise_curve = Vector::Zero(train.n_points());
    for (int row : robust[j].untrimmed) {
      prior.noise_curve += (train.values.row(row).transpose() - prior.mean_curve).array().square().matrix();
    }
    prior.noise_curve /= static_cast<double>(sizes[j] - 1);
    prior.noise_curve = prior.noise_curve.cwiseMax(kNoiseFloor);
    prior.phi = phi;
    prior.v = v;
    prior.robust = robust[j];
    out.push_back(std::move(prior));
  }
  return out;
}

void FunctionalHyper::validate() const {
  chain.validate();
  if (!(a_tau > 0.0 && b_tau > 0.0 && s2 > 0.0 && a_H > 0.0 && b_H > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "functional hyperparameters must be positive");
  }
  check_order(basis);
}

CanonicalNormal coefficient_conditional(const Matrix& basis, const Matrix& curves, const Vector& noise, double psi,
                                        double tau2) {
  const Eigen::Index B = basis.cols();
  const Vector inv_noise = noise.cwiseInverse();
  const double n = static_cast<double>(curves.rows());
  CanonicalNormal out;
  out.precision = n * (basis.transpose() * inv_noise.asDiagonal() * basis);
  out.precision.diagonal().array() += 1.0 / tau2;
  const Vector total = curves.rows() > 0 ? Vector(curves.colwise().sum().transpose()) : Vector::Zero(basis.rows());
  out.linear = basis.transpose() * inv_noise.cwiseProduct(total) + Vector::Constant(B, psi / tau2);
  return out;
}

Normal psi_conditional(const Vector& rho, double tau2, double s2) {
  const double precision = 1.0 / s2 + static_cast<double>(rho.size()) / tau2;
  return Normal{rho.sum() / tau2 / precision, 1.0 / precision};
}

InverseGamma tau2_conditional(const Vector& rho, double psi, double a_tau, double b_tau) {
  const double ss = (rho.array() - psi).square().sum();
  return InverseGamma{a_tau + 0.5 * static_cast<double>(rho.size()), b_tau + 0.5 * ss};
}

std::vector<InverseGamma> noise_conditional(const Matrix& curves, const Vector& mean,
                                            const std::vector<InverseGamma>& prior) {
  if (static_cast<Eigen::Index>(prior.size()) != mean.size() || curves.cols() != mean.size()) {
    throw Error(ErrorCode::GridMismatch, "noise prior, mean curve and curves differ in length");
  }
  const double half_n = 0.5 * static_cast<double>(curves.rows());
  std::vector<InverseGamma> out(prior.size());
  for (Eigen::Index t = 0; t < mean.size(); ++t) {
    const double ss = curves.rows() > 0 ? (curves.col(t).array() - mean[t]).square().sum() : 0.0;
    const auto& p = prior[static_cast<std::size_t>(t)];
    out[static_cast<std::size_t>(t)] = InverseGamma{p.shape + half_n, p.scale + 0.5 * ss};
  }
  return out;
}

std::vector<InverseGamma> noise_conditional(const Matrix& curves, const Vector& mean, const InverseGamma& prior) {
  return noise_conditional(curves, mean, std::vector<InverseGamma>(static_cast<std::size_t>(mean.size()), prior));
}

std::vector<Normal> known_mean_conditional(const Matrix& curves, const Vector& prior_mean, double phi,
                                           const Vector& noise) {
  if (!(phi > 0.0)) throw Error(ErrorCode::InvalidArgument, "known mean prior variance must be positive");
  if (noise.size() != prior_mean.size() || curves.cols() != prior_mean.size()) {
    throw Error(ErrorCode::GridMismatch, "prior mean, noise curve and curves differ in length");
  }
  const double n = static_cast<double>(curves.rows());
  std::vector<Normal> out(static_cast<std::size_t>(prior_mean.size()));
  for (Eigen::Index t = 0; t < prior_mean.size(); ++t) {
    const double total = curves.rows() > 0 ? curves.col(t).sum() : 0.0;
    const double precision = 1.0 / phi + n / noise[t];
    out[static_cast<std::size_t>(t)] = Normal{(prior_mean[t] / phi + total / noise[t]) / precision, 1.0 / precision};
  }
  return out;
}

Matrix group_mean_curves(const Matrix& values, const std::vector<int>& labels, int n_groups) {
  if (static_cast<Eigen::Index>(labels.size()) != values.rows()) {
    throw Error(ErrorCode::LengthMismatch, "label count differs from the number of curves");
  }
  Matrix out = Matrix::Zero(n_groups, values.cols());
  std::vector<int> counts(static_cast<std::size_t>(n_groups), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int g = labels[i];
    if (g < 1 || g > n_groups) continue;
    out.row(g - 1) += values.row(static_cast<Eigen::Index>(i));
    ++counts[static_cast<std::size_t>(g - 1)];
  }
  for (int g = 0; g < n_groups; ++g) {
    if (counts[static_cast<std::size_t>(g)] > 0) out.row(g) /= counts[static_cast<std::size_t>(g)];
  }
  return out;
}

namespace {

class FunctionalKernel {
 public:
  using Known = KnownCurveAtom;
  using Novel = NovelCurveAtom;

  FunctionalKernel(const CurveSet& test, const std::vector<FunctionalKnownPrior>& priors, const FunctionalHyper& hyper)
      : values_(test.values), hyper_(hyper), priors_(priors) {
    const int T = test.n_points();
    for (std::size_t j = 0; j < priors.size(); ++j) {
      const auto& p = priors[j];
      if (p.mean_curve.size() != T || p.noise_curve.size() != T ||
          (p.grid.size() > 0 && (p.grid.size() != T || (p.grid - test.grid).cwiseAbs().maxCoeff() > 1e-9))) {
        throw Error(ErrorCode::GridMismatch, "class " + std::to_string(j + 1) + " prior is not on the test grid");
      }
      if ((p.noise_curve.array() <= 0.0).any()) {
        throw Error(ErrorCode::InvalidArgument, "class " + std::to_string(j + 1) + " noise curve is not positive");
      }
      centers_.push_back(KnownCurveAtom{p.mean_curve, p.noise_curve});
      std::vector<InverseGamma> noise_prior;
      if (p.v > 0.0) {
        for (Eigen::Index t = 0; t < T; ++t) noise_prior.push_back(known_noise_prior(p.noise_curve[t], p.v));
      }
      noise_priors_.push_back(std::move(noise_prior));
    }
    BasisSpec spec = hyper.basis;
    if (!spec.lower) spec.lower = test.grid.minCoeff();
    if (!spec.upper) spec.upper = test.grid.maxCoeff();
    basis_ = bspline_basis(spec, test.grid);
    threshold_ = upper_chi2_quantile(T, 1e-6);
    pooled_noise_ = Vector::Zero(T);
    for (const auto& c : centers_) pooled_noise_ += c.noise;
    pooled_noise_ /= static_cast<double>(std::max<std::size_t>(1, centers_.size()));
  }

  int n_units() const { return static_cast<int>(values_.rows()); }
  const std::vector<KnownCurveAtom>& centers() const { return centers_; }

  void update_known(int j, KnownCurveAtom& atom, const IndexList& units, Rng& rng) const {
    const auto& prior = priors_[static_cast<std::size_t>(j - 1)];
    const bool mean_fixed = !(prior.phi > 0.0);
    const bool noise_fixed = !(prior.v > 0.0);
    if (mean_fixed && noise_fixed) return;
    const Matrix curves = rows_of(values_, units);
    if (!mean_fixed) {
      const auto cond = known_mean_conditional(curves, prior.mean_curve, prior.phi, atom.noise);
      for (std::size_t t = 0; t < cond.size(); ++t) atom.mean[static_cast<Eigen::Index>(t)] = rng.normal(cond[t].mean, std::sqrt(cond[t].variance));
    }
    if (!noise_fixed) {
      const auto cond = noise_conditional(curves, atom.mean, noise_priors_[static_cast<std::size_t>(j - 1)]);
      for (std::size_t t = 0; t < cond.size(); ++t) {
        atom.noise[static_cast<Eigen::Index>(t)] = std::max(rng.inverse_gamma(cond[t].shape, cond[t].scale), kNoiseFloor);
      }
    }
  }

  void update_novel(NovelCurveAtom& atom, bool fresh, const IndexList& units, Rng& rng) const {
    const Eigen::Index B = basis_.cols();
    const Eigen::Index T = basis_.rows();
    if (units.empty()) {
      atom.psi = rng.normal(0.0, std::sqrt(hyper_.s2));
      atom.tau2 = rng.inverse_gamma(hyper_.a_tau, hyper_.b_tau);
      atom.rho.resize(B);
      const double sd = std::sqrt(atom.tau2);
      for (Eigen::Index b = 0; b < B; ++b) atom.rho[b] = rng.normal(atom.psi, sd);
      atom.noise.resize(T);
      for (Eigen::Index t = 0; t < T; ++t) atom.noise[t] = std::max(rng.inverse_gamma(hyper_.a_H, hyper_.b_H), kNoiseFloor);
      atom.mean = basis_ * atom.rho;
      return;
    }
    if (fresh || atom.noise.size() != T) {
      atom.psi = 0.0;
      atom.tau2 = hyper_.b_tau / (hyper_.a_tau - 1.0 > 0.0 ? hyper_.a_tau - 1.0 : 1.0);
      atom.noise = Vector::Constant(T, hyper_.b_H / (hyper_.a_H - 1.0 > 0.0 ? hyper_.a_H - 1.0 : 1.0));
    }
    const Matrix curves = rows_of(values_, units);
    const CanonicalNormal rho = coefficient_conditional(basis_, curves, atom.noise, atom.psi, atom.tau2);
    atom.rho = sample_mvn_canonical(rho.precision, rho.linear, rng);
    atom.mean = basis_ * atom.rho;
    const Normal psi = psi_conditional(atom.rho, atom.tau2, hyper_.s2);
    atom.psi = rng.normal(psi.mean, std::sqrt(psi.variance));
    const InverseGamma tau2 = tau2_conditional(atom.rho, atom.psi, hyper_.a_tau, hyper_.b_tau);
    atom.tau2 = rng.inverse_gamma(tau2.shape, tau2.scale);
    const auto noise = noise_conditional(curves, atom.mean, InverseGamma{hyper_.a_H, hyper_.b_H});
    for (Eigen::Index t = 0; t < T; ++t) {
      const auto& c = noise[static_cast<std::size_t>(t)];
      atom.noise[t] = std::max(rng.inverse_gamma(c.shape, c.scale), kNoiseFloor);
    }
  }

  void log_likelihood(const KnownCurveAtom& atom, Eigen::Ref<Vector> out) const {
    curve_log_likelihood(atom.mean, atom.noise, out);
  }

  void log_likelihood(const NovelCurveAtom& atom, Eigen::Ref<Vector> out) const {
    curve_log_likelihood(atom.mean, atom.noise, out);
  }

  void discrepancy(const KnownCurveAtom& atom, Eigen::Ref<Vector> out) const {
    const Eigen::ArrayXd inv = atom.noise.cwiseInverse().array();
    out = ((values_.rowwise() - atom.mean.transpose()).array().square().rowwise() * inv.transpose()).rowwise().sum().matrix();
  }

  double discrepancy_threshold() const { return threshold_; }

  /// Leader clustering: a curve joins the closest existing group whose running
  /// mean it matches under the pooled known noise, else opens a new one.
  /// Singleton novelty atoms interpolate their curve and would never merge.
  IndexList initial_clusters(const IndexList& candidates) const {
    IndexList out;
    std::vector<Vector> sums;
    std::vector<int> sizes;
    const Eigen::ArrayXd inv = pooled_noise_.cwiseInverse().array();
    for (int m : candidates) {
      const Vector y = values_.row(m).transpose();
      int best = -1;
      double best_stat = threshold_;
      for (std::size_t c = 0; c < sums.size(); ++c) {
        const double n = sizes[c];
        const Vector centre = sums[c] / n;
        const double stat = ((y - centre).array().square() * inv).sum() / (1.0 + 1.0 / n);
        if (stat <= best_stat) {
          best_stat = stat;
          best = static_cast<int>(c);
        }
      }
      if (best < 0) {
        sums.push_back(y);
        sizes.push_back(1);
        best = static_cast<int>(sums.size()) - 1;
      } else {
        sums[static_cast<std::size_t>(best)] += y;
        ++sizes[static_cast<std::size_t>(best)];
      }
      out.push_back(best + 1);
    }
    return out;
  }

  AtomRecord record(const KnownCurveAtom& atom) const { return AtomRecord{0, atom.mean, Matrix(atom.noise)}; }
  AtomRecord record(const NovelCurveAtom& atom) const { return AtomRecord{0, atom.mean, Matrix(atom.noise)}; }

 private:
  void curve_log_likelihood(const Vector& mean, const Vector& noise, Eigen::Ref<Vector> out) const {
    const Eigen::ArrayXd inv = noise.cwiseInverse().array();
    const double constant = -0.5 * (noise.array().log().sum() + static_cast<double>(noise.size()) * std::log(2.0 * std::numbers::pi));
    out = (-0.5 * ((values_.rowwise() - mean.transpose()).array().square().rowwise() * inv.transpose()).rowwise().sum() + constant)
              .matrix();
  }

  const Matrix& values_;
  FunctionalHyper hyper_;
  std::vector<FunctionalKnownPrior> priors_;
  std::vector<std::vector<InverseGamma>> noise_priors_;
  std::vector<KnownCurveAtom> centers_;
  Matrix basis_;
  Vector pooled_noise_;
  double threshold_ = 0.0;
};

}  // namespace

ChainOutput run_functional_chain(const CurveSet& test, const std::vector<FunctionalKnownPrior>& priors,
                                 const FunctionalHyper& hyper) {
  test.validate();
  hyper.validate();
  if (static_cast<int>(priors.size()) != hyper.chain.n_known()) {
    throw Error(ErrorCode::DimensionMismatch, "number of class priors differs from the Dirichlet weights");
  }
  FunctionalKernel kernel(test, priors, hyper);
  Rng rng(hyper.chain.seed);
  auto state = detail::make_initial_state(kernel, kernel.centers(), hyper.chain, rng);
  return detail::run_slice_chain(kernel, std::move(state), hyper.chain, rng);
}

}  // namespace brand::functional
