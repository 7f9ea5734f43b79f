#pragma once

#include <optional>
#include <vector>

#include "brand/model_core.hpp"
#include "brand/random.hpp"
#include "brand/robust_prior.hpp"
#include "brand/types.hpp"

namespace brand {

/// Unlabeled test set, one row per unit.
struct TestDataset {
  Matrix data;

  int n_units() const { return static_cast<int>(data.rows()); }
  int dim() const { return static_cast<int>(data.cols()); }
};

/// Latent state of the slice sampler. Known atoms are indexed 0..J-1 for
/// classes 1..J; novel atoms 0..K-1 for novelty clusters 1..K.
template <class KnownAtom, class NovelAtom>
struct SliceState {
  Vector pi;
  std::vector<double> v;
  std::vector<double> omega;
  std::vector<KnownAtom> known_atoms;
  std::vector<NovelAtom> novel_atoms;
  std::vector<int> alpha;
  std::vector<int> beta;
  std::vector<double> u;
  int L_star = 0;
  double gamma = 1.0;
};

using ChainState = SliceState<GaussianAtom, GaussianAtom>;

/// Location/spread pair kept in atom snapshots: (mean, covariance) for
/// Gaussian atoms, (mean curve, noise curve as a column) for functional ones.
struct AtomRecord {
  int id = 0;
  Vector location;
  Matrix spread;
};

struct AtomSnapshot {
  int iteration = 0;
  std::vector<AtomRecord> known;
  /// Occupied novelty clusters only; id is the cluster index.
  std::vector<AtomRecord> novel;
};

struct ChainOutput {
  IntTrace alpha_trace;
  IntTrace beta_trace;
  Matrix pi_trace;
  Vector gamma_trace;
  std::vector<int> n_active_trace;
  std::vector<AtomSnapshot> atom_snapshots;
  std::uint64_t seed = 0;

  int n_retained() const { return alpha_trace.rows(); }
  int n_units() const { return alpha_trace.cols(); }
  int n_known() const { return static_cast<int>(pi_trace.cols()) - 1; }
};

/// Standard NIW conjugate update; n = 0 returns the prior.
NIWParams niw_posterior(const NIWParams& prior, const Matrix& obs);
NIWParams niw_posterior(const NIWParams& prior, const Matrix& data, const IndexList& rows);

GaussianAtom sample_niw(const NIWParams& params, Rng& rng);

/// Known-class prior centred at the Stage I estimate: scale (nu - p - 1) * scatter,
/// so E[Sigma] equals the robust scatter.
NIWParams known_class_prior(const RobustClassSummary& summary, double lambda_tr, double nu_tr);

/// Escobar-West auxiliary-variable draw of the DP concentration given n units
/// in k clusters; a prior draw when n = 0 and `current` when no prior is set.
double update_gamma(double current, int n_novel, int k_novel, const std::optional<GammaPrior>& prior, Rng& rng);

/// Starting state: known atoms at the prior centres; units far from every
/// known class are grouped into novelty clusters by leader clustering.
ChainState initial_state(const TestDataset& data, const std::vector<RobustClassSummary>& priors,
                         const Hyperparameters& hp, Rng& rng);

/// One sweep of the slice-efficient Gibbs sampler.
void gibbs_step(ChainState& state, const TestDataset& data, const Hyperparameters& hp,
                const std::vector<RobustClassSummary>& priors, Rng& rng);

ChainOutput run_chain(const TestDataset& data, const std::vector<RobustClassSummary>& priors,
                      const Hyperparameters& hp);

}  // namespace brand
