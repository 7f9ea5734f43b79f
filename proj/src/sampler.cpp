#include "brand/sampler.hpp"

#include <cmath>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "brand/detail/slice_engine.hpp"
#include "brand/error.hpp"

namespace brand {

NIWParams niw_posterior(const NIWParams& prior, const Matrix& obs) {
  const Eigen::Index n = obs.rows();
  if (n == 0) return prior;
  if (obs.cols() != prior.mean.size()) throw Error(ErrorCode::DimensionMismatch, "observation dimension differs from prior");
  const Vector xbar = obs.colwise().mean().transpose();
  const Matrix centered = obs.rowwise() - xbar.transpose();
  const double nd = static_cast<double>(n);
  const double lambda = prior.precision_scale;
  NIWParams post;
  post.precision_scale = lambda + nd;
  post.dof = prior.dof + nd;
  post.mean = (lambda * prior.mean + nd * xbar) / (lambda + nd);
  const Vector diff = xbar - prior.mean;
  post.scale_matrix = prior.scale_matrix + centered.transpose() * centered + (lambda * nd / (lambda + nd)) * diff * diff.transpose();
  post.scale_matrix = 0.5 * (post.scale_matrix + post.scale_matrix.transpose());
  return post;
}

NIWParams niw_posterior(const NIWParams& prior, const Matrix& data, const IndexList& rows) {
  if (rows.empty()) return prior;
  Matrix obs(static_cast<Eigen::Index>(rows.size()), data.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) obs.row(static_cast<Eigen::Index>(i)) = data.row(rows[i]);
  return niw_posterior(prior, obs);
}

GaussianAtom sample_niw(const NIWParams& params, Rng& rng) {
  GaussianAtom atom;
  atom.cov = sample_inverse_wishart(params.dof, params.scale_matrix, rng);
  atom.mean = sample_mvn(params.mean, atom.cov / params.precision_scale, rng);
  return atom;
}

NIWParams known_class_prior(const RobustClassSummary& summary, double lambda_tr, double nu_tr) {
  const double p = static_cast<double>(summary.mean.size());
  return NIWParams{summary.mean, lambda_tr, nu_tr, (nu_tr - p - 1.0) * summary.scatter};
}

double update_gamma(double current, int n_novel, int k_novel, const std::optional<GammaPrior>& prior, Rng& rng) {
  if (!prior) return current;
  if (n_novel <= 0) return rng.gamma(prior->shape, prior->rate);
  const double eta = rng.beta(current + 1.0, static_cast<double>(n_novel));
  const double rate = prior->rate - std::log(eta);
  const double odds = (prior->shape + k_novel - 1.0) / (n_novel * rate);
  const double weight = odds / (1.0 + odds);
  const double shape = rng.uniform() < weight ? prior->shape + k_novel : prior->shape + k_novel - 1.0;
  // k_novel = 0 with units present cannot happen; keep the shape valid anyway.
  return rng.gamma(std::max(shape, prior->shape), rate);
}

namespace {

class GaussianNiwKernel {
 public:
  using Known = GaussianAtom;
  using Novel = GaussianAtom;

  GaussianNiwKernel(const TestDataset& data, const std::vector<RobustClassSummary>& priors, const Hyperparameters& hp)
      : data_(data.data), columns_(data.data.transpose()), base_(hp.base_measure), frozen_(hp.known_frozen()) {
    const int p = data.dim();
    hp.validate(p);
    if (static_cast<int>(priors.size()) != hp.chain.n_known()) {
      throw Error(ErrorCode::DimensionMismatch, "number of class priors differs from the Dirichlet weights");
    }
    for (const auto& s : priors) {
      if (s.mean.size() != p) throw Error(ErrorCode::DimensionMismatch, "class prior dimension differs from test data");
      known_.push_back(known_class_prior(s, hp.lambda_tr, hp.nu_tr));
      centers_.push_back(GaussianAtom{s.mean, s.scatter});
    }
    Matrix pooled = Matrix::Zero(p, p);
    for (const auto& c : centers_) pooled += c.cov / static_cast<double>(centers_.size());
    pooled_.compute(pooled);
    const boost::math::chi_squared_distribution<double> chi(p);
    threshold_ = boost::math::quantile(boost::math::complement(chi, 1e-6));
  }

  int n_units() const { return static_cast<int>(data_.rows()); }
  const std::vector<GaussianAtom>& centers() const { return centers_; }

  void update_known(int j, GaussianAtom& atom, const IndexList& units, Rng& rng) const {
    if (frozen_) {
      atom = centers_[static_cast<std::size_t>(j - 1)];
      return;
    }
    atom = sample_niw(niw_posterior(known_[static_cast<std::size_t>(j - 1)], data_, units), rng);
  }

  void update_novel(GaussianAtom& atom, bool, const IndexList& units, Rng& rng) const {
    atom = sample_niw(niw_posterior(base_, data_, units), rng);
  }

  void log_likelihood(const GaussianAtom& atom, Eigen::Ref<Vector> out) const {
    GaussianEvaluator(atom).log_density_columns(columns_, out);
  }

  void discrepancy(const GaussianAtom& atom, Eigen::Ref<Vector> out) const {
    Eigen::LLT<Matrix> chol(atom.cov);
    const Matrix z = chol.matrixL().solve(columns_.colwise() - atom.mean);
    out = z.colwise().squaredNorm().transpose();
  }

  double discrepancy_threshold() const { return threshold_; }

  /// Leader clustering: a candidate joins the closest cluster whose running
  /// mean passes the chi-square test under the pooled known scatter.
  IndexList initial_clusters(const IndexList& candidates) const {
    IndexList out;
    std::vector<Vector> sums;
    std::vector<int> sizes;
    for (int m : candidates) {
      const Vector y = columns_.col(m);
      int best = -1;
      double best_stat = threshold_;
      for (std::size_t c = 0; c < sums.size(); ++c) {
        const double n = sizes[c];
        const Vector diff = y - sums[c] / n;
        const double stat = pooled_.solve(diff).dot(diff) / (1.0 + 1.0 / n);
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

  AtomRecord record(const GaussianAtom& atom) const { return AtomRecord{0, atom.mean, atom.cov}; }

 private:
  const Matrix& data_;
  Matrix columns_;
  NIWParams base_;
  bool frozen_;
  std::vector<NIWParams> known_;
  std::vector<GaussianAtom> centers_;
  Eigen::LDLT<Matrix> pooled_;
  double threshold_ = 0.0;
};

}  // namespace

ChainState initial_state(const TestDataset& data, const std::vector<RobustClassSummary>& priors,
                         const Hyperparameters& hp, Rng& rng) {
  GaussianNiwKernel kernel(data, priors, hp);
  return detail::make_initial_state(kernel, kernel.centers(), hp.chain, rng);
}

void gibbs_step(ChainState& state, const TestDataset& data, const Hyperparameters& hp,
                const std::vector<RobustClassSummary>& priors, Rng& rng) {
  GaussianNiwKernel kernel(data, priors, hp);
  detail::slice_gibbs_step(state, kernel, hp.chain, rng);
}

ChainOutput run_chain(const TestDataset& data, const std::vector<RobustClassSummary>& priors,
                      const Hyperparameters& hp) {
  GaussianNiwKernel kernel(data, priors, hp);
  Rng rng(hp.chain.seed);
  ChainState state = detail::make_initial_state(kernel, kernel.centers(), hp.chain, rng);
  return detail::run_slice_chain(kernel, std::move(state), hp.chain, rng);
}

}  // namespace brand
