#pragma once

// Kernel-independent parts of the slice-efficient Gibbs sampler. A kernel
// supplies the data model:
//
//   using Known = ...; using Novel = ...;
//   int n_units() const;
//   void update_known(int j, Known& atom, const IndexList& units, Rng& rng);
//   void update_novel(Novel& atom, bool fresh, const IndexList& units, Rng& rng);
//   void log_likelihood(const Known&, Eigen::Ref<Vector> out) const;   // every unit
//   void log_likelihood(const Novel&, Eigen::Ref<Vector> out) const;
//   void discrepancy(const Known&, Eigen::Ref<Vector> out) const;      // chi-square type statistic
//   double discrepancy_threshold() const;
//   IndexList initial_clusters(const IndexList& candidates) const;    // 1-based cluster per candidate
//   AtomRecord record(const Known&) const;  AtomRecord record(const Novel&) const;

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "brand/error.hpp"
#include "brand/model_core.hpp"
#include "brand/random.hpp"
#include "brand/sampler.hpp"

namespace brand::detail {

constexpr double kWeightFloor = 1e-300;

template <class Kernel>
using StateFor = SliceState<typename Kernel::Known, typename Kernel::Novel>;

template <class Kernel>
StateFor<Kernel> make_initial_state(Kernel& kernel, std::vector<typename Kernel::Known> known,
                                    const ChainControls& ctl, Rng& rng) {
  const int J = ctl.n_known();
  const int M = kernel.n_units();
  StateFor<Kernel> s;
  s.pi = ctl.a / ctl.a.sum();
  s.gamma = ctl.gamma;
  s.known_atoms = std::move(known);
  s.alpha.assign(static_cast<std::size_t>(M), 1);
  s.beta.assign(static_cast<std::size_t>(M), 0);
  s.u.assign(static_cast<std::size_t>(M), 0.0);

  Matrix loglik(M, J);
  Matrix stat(M, J);
  for (int j = 0; j < J; ++j) {
    kernel.log_likelihood(s.known_atoms[static_cast<std::size_t>(j)], loglik.col(j));
    kernel.discrepancy(s.known_atoms[static_cast<std::size_t>(j)], stat.col(j));
  }
  const double threshold = kernel.discrepancy_threshold();
  IndexList candidates;
  for (int m = 0; m < M; ++m) {
    if (stat.row(m).minCoeff() > threshold) {
      candidates.push_back(m);
      s.alpha[static_cast<std::size_t>(m)] = 0;
    } else {
      Eigen::Index best = 0;
      loglik.row(m).maxCoeff(&best);
      s.alpha[static_cast<std::size_t>(m)] = static_cast<int>(best) + 1;
    }
  }
  const IndexList cluster = kernel.initial_clusters(candidates);
  int next_cluster = 0;
  for (int c : cluster) next_cluster = std::max(next_cluster, c);
  std::vector<IndexList> members(static_cast<std::size_t>(next_cluster));
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    s.beta[static_cast<std::size_t>(candidates[k])] = cluster[k];
    members[static_cast<std::size_t>(cluster[k] - 1)].push_back(candidates[k]);
  }
  s.novel_atoms.resize(members.size());
  for (std::size_t h = 0; h < members.size(); ++h) kernel.update_novel(s.novel_atoms[h], true, members[h], rng);
  s.L_star = J + std::max(1, next_cluster);
  return s;
}

template <class Kernel>
void slice_gibbs_step(StateFor<Kernel>& s, Kernel& kernel, const ChainControls& ctl, Rng& rng) {
  const int J = ctl.n_known();
  const int M = kernel.n_units();
  const double kappa = ctl.kappa;

  // (1) slice variables and (2) stochastic truncation.
  int max_zeta = J + 1;
  for (int m = 0; m < M; ++m) {
    const auto i = static_cast<std::size_t>(m);
    const int zeta = alpha_beta_to_zeta(s.alpha[i], s.beta[i], J);
    max_zeta = std::max(max_zeta, zeta);
    s.u[i] = rng.uniform() * xi_value(kappa, J, zeta);
  }
  int L = M > 0 ? truncation_level(s.u, kappa, J) : J + 1;
  // u_m < xi_{zeta_m} already implies zeta_m <= L; guard against rounding.
  L = std::max(L, max_zeta);
  const int K = L - J;

  std::vector<int> known_count(static_cast<std::size_t>(J) + 1, 0);
  std::vector<int> novel_count(static_cast<std::size_t>(K) + 1, 0);
  std::vector<IndexList> known_units(static_cast<std::size_t>(J));
  std::vector<IndexList> novel_units(static_cast<std::size_t>(K));
  for (int m = 0; m < M; ++m) {
    const auto i = static_cast<std::size_t>(m);
    ++known_count[static_cast<std::size_t>(s.alpha[i])];
    if (s.alpha[i] > 0) {
      known_units[static_cast<std::size_t>(s.alpha[i] - 1)].push_back(m);
    } else {
      ++novel_count[static_cast<std::size_t>(s.beta[i])];
      novel_units[static_cast<std::size_t>(s.beta[i] - 1)].push_back(m);
    }
  }

  // DP concentration, given the current novelty partition.
  if (ctl.gamma_prior) {
    int occupied = 0;
    for (int k = 1; k <= K; ++k) occupied += novel_count[static_cast<std::size_t>(k)] > 0 ? 1 : 0;
    s.gamma = update_gamma(s.gamma, known_count[0], occupied, ctl.gamma_prior, rng);
  }

  // (3) known/novel proportions.
  std::vector<double> conc(static_cast<std::size_t>(J) + 1);
  for (int j = 0; j <= J; ++j) conc[static_cast<std::size_t>(j)] = ctl.a[j] + known_count[static_cast<std::size_t>(j)];
  s.pi = rng.dirichlet(conc);

  // (4) sticks and (5) stick-breaking weights.
  s.v.assign(static_cast<std::size_t>(K), 0.0);
  int above = 0;
  for (int k = 1; k <= K; ++k) above += novel_count[static_cast<std::size_t>(k)];
  for (int k = 1; k <= K; ++k) {
    const int n_k = novel_count[static_cast<std::size_t>(k)];
    above -= n_k;
    double v = rng.beta(1.0 + n_k, s.gamma + above);
    // Keep the stick strictly inside (0, 1) so later weights stay positive.
    v = std::clamp(v, std::numeric_limits<double>::min(), 1.0 - std::numeric_limits<double>::epsilon());
    s.v[static_cast<std::size_t>(k - 1)] = v;
  }
  const Vector omega = stick_breaking(Eigen::Map<const Vector>(s.v.data(), K));
  s.omega.assign(omega.data(), omega.data() + omega.size());

  // (6) one-line weights.
  Vector xi(L);
  Vector log_weight(L);
  for (int l = 1; l <= L; ++l) {
    xi[l - 1] = xi_value(kappa, J, l);
    const double w = l <= J ? s.pi[l] : s.pi[0] * omega[l - J - 1];
    log_weight[l - 1] = std::log(std::max(w, kWeightFloor)) - std::log(xi[l - 1]);
  }

  // (7) known atoms and (8) novel atoms up to the truncation level.
  for (int j = 1; j <= J; ++j) {
    kernel.update_known(j, s.known_atoms[static_cast<std::size_t>(j - 1)], known_units[static_cast<std::size_t>(j - 1)], rng);
  }
  const auto previous = s.novel_atoms.size();
  s.novel_atoms.resize(static_cast<std::size_t>(K));
  for (int h = 1; h <= K; ++h) {
    const auto i = static_cast<std::size_t>(h - 1);
    kernel.update_novel(s.novel_atoms[i], i >= previous, novel_units[i], rng);
  }

  // (10) allocations and (11) membership recovery.
  Matrix loglik(M, L);
  for (int l = 1; l <= L; ++l) {
    if (l <= J) {
      kernel.log_likelihood(s.known_atoms[static_cast<std::size_t>(l - 1)], loglik.col(l - 1));
    } else {
      kernel.log_likelihood(s.novel_atoms[static_cast<std::size_t>(l - J - 1)], loglik.col(l - 1));
    }
  }
  std::vector<double> prob(static_cast<std::size_t>(L));
  for (int m = 0; m < M; ++m) {
    const auto i = static_cast<std::size_t>(m);
    // xi is non-increasing, so the eligible components form a prefix.
    int eligible = 0;
    while (eligible < L && s.u[i] < xi[eligible]) ++eligible;
    if (eligible == 0) {
      throw Error(ErrorCode::AllSlicesEmpty, "unit " + std::to_string(m) + " has no eligible component");
    }
    double top = -std::numeric_limits<double>::infinity();
    for (int l = 0; l < eligible; ++l) top = std::max(top, log_weight[l] + loglik(m, l));
    for (int l = 0; l < eligible; ++l) {
      prob[static_cast<std::size_t>(l)] = std::max(std::exp(log_weight[l] + loglik(m, l) - top), kWeightFloor);
    }
    const int zeta = static_cast<int>(rng.categorical(std::span<const double>(prob.data(), static_cast<std::size_t>(eligible)))) + 1;
    const auto [alpha, beta] = zeta_to_alpha_beta(zeta, J);
    s.alpha[i] = alpha;
    s.beta[i] = beta;
  }
  s.L_star = L;
}

template <class Kernel>
AtomSnapshot take_snapshot(const StateFor<Kernel>& s, const Kernel& kernel, int iteration) {
  AtomSnapshot snap;
  snap.iteration = iteration;
  for (std::size_t j = 0; j < s.known_atoms.size(); ++j) {
    AtomRecord r = kernel.record(s.known_atoms[j]);
    r.id = static_cast<int>(j) + 1;
    snap.known.push_back(std::move(r));
  }
  std::vector<char> occupied(s.novel_atoms.size(), 0);
  for (std::size_t m = 0; m < s.alpha.size(); ++m) {
    if (s.alpha[m] == 0) occupied[static_cast<std::size_t>(s.beta[m] - 1)] = 1;
  }
  for (std::size_t h = 0; h < s.novel_atoms.size(); ++h) {
    if (!occupied[h]) continue;
    AtomRecord r = kernel.record(s.novel_atoms[h]);
    r.id = static_cast<int>(h) + 1;
    snap.novel.push_back(std::move(r));
  }
  return snap;
}

template <class Kernel>
ChainOutput run_slice_chain(Kernel& kernel, StateFor<Kernel> state, const ChainControls& ctl, Rng& rng) {
  const int J = ctl.n_known();
  const int M = kernel.n_units();
  const int retained = ctl.n_iter - ctl.n_burnin;
  ChainOutput out;
  out.seed = ctl.seed;
  out.alpha_trace = IntTrace(retained, M);
  out.beta_trace = IntTrace(retained, M);
  out.pi_trace = Matrix(retained, J + 1);
  out.gamma_trace = Vector(retained);
  out.n_active_trace.assign(static_cast<std::size_t>(retained), 0);

  for (int it = 0; it < ctl.n_iter; ++it) {
    try {
      slice_gibbs_step(state, kernel, ctl, rng);
    } catch (const Error& e) {
      throw Error(e.code(), "iteration " + std::to_string(it + 1) + ": " + e.what());
    }
    const int r = it - ctl.n_burnin;
    if (r < 0) continue;
    std::copy(state.alpha.begin(), state.alpha.end(), out.alpha_trace.row(r));
    std::copy(state.beta.begin(), state.beta.end(), out.beta_trace.row(r));
    out.pi_trace.row(r) = state.pi.transpose();
    out.gamma_trace[r] = state.gamma;
    out.n_active_trace[static_cast<std::size_t>(r)] = state.L_star;
    if (ctl.atom_thin > 0 && r % ctl.atom_thin == 0) {
      out.atom_snapshots.push_back(take_snapshot(state, kernel, it + 1));
    }
  }
  return out;
}

}  // namespace brand::detail
