#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "brand/error.hpp"
#include "brand/sampler.hpp"
#include "brand/simulation.hpp"

using namespace brand;

namespace {

RobustClassSummary summary_at(Vector mean, Matrix scatter) {
  RobustClassSummary s;
  s.mean = std::move(mean);
  s.scatter = std::move(scatter);
  return s;
}

Hyperparameters small_hyper(int J, int p, std::uint64_t seed) {
  Hyperparameters hp;
  hp.chain.a = Vector::Constant(J + 1, 1.0);
  hp.chain.a[0] = 0.1;
  hp.chain.gamma_prior = GammaPrior{1.0, 1.0};
  hp.chain.n_iter = 300;
  hp.chain.n_burnin = 100;
  hp.chain.seed = seed;
  hp.base_measure = default_base_measure(p, 10.0);
  return hp;
}

/// Two known classes plus a novel group far away.
TestDataset three_groups(Rng& rng) {
  TestDataset t{Matrix(90, 2)};
  const Vector centres[3] = {Vector{{-4.0, 0.0}}, Vector{{4.0, 0.0}}, Vector{{0.0, 9.0}}};
  for (int i = 0; i < 90; ++i) t.data.row(i) = (centres[i / 30] + Vector{{rng.normal(), rng.normal()}}).transpose();
  return t;
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("NIW posterior: one observation in one dimension") {
  const NIWParams prior{Vector::Zero(1), 1.0, 3.0, Matrix::Constant(1, 1, 1.0)};
  const NIWParams post = niw_posterior(prior, Matrix::Constant(1, 1, 2.0));
  CHECK(post.mean[0] == doctest::Approx(1.0));
  CHECK(post.precision_scale == 2.0);
  CHECK(post.dof == 4.0);
  CHECK(post.scale_matrix(0, 0) == doctest::Approx(3.0));
}

TEST_CASE("NIW posterior: empty data and sequential updates") {
  Rng rng(1);
  const NIWParams prior{Vector{{1.0, -1.0}}, 0.5, 6.0, 2.0 * Matrix::Identity(2, 2)};
  const NIWParams same = niw_posterior(prior, Matrix(0, 2));
  CHECK(same.mean == prior.mean);
  CHECK(same.scale_matrix == prior.scale_matrix);
  Matrix obs(9, 2);
  for (int i = 0; i < 18; ++i) obs(i / 2, i % 2) = rng.normal(0.5, 2.0);
  const NIWParams batch = niw_posterior(prior, obs);
  const NIWParams seq = niw_posterior(niw_posterior(prior, obs.topRows(4)), obs.bottomRows(5));
  CHECK((batch.mean - seq.mean).norm() < 1e-12);
  CHECK((batch.scale_matrix - seq.scale_matrix).norm() < 1e-10);
  CHECK(batch.dof == seq.dof);
  CHECK(batch.precision_scale == seq.precision_scale);
}

TEST_CASE("NIW conditional matches a grid oracle in one dimension") {
  // p = 1: sigma2 ~ IG(nu/2, S/2), mu | sigma2 ~ N(m, sigma2/lambda); two observations.
  const NIWParams prior{Vector::Constant(1, 0.5), 2.0, 5.0, Matrix::Constant(1, 1, 3.0)};
  Matrix obs(2, 1);
  obs << 1.3, -0.4;
  const NIWParams post = niw_posterior(prior, obs);

  auto joint = [&](double mu, double s2) {
    double lp = -0.5 * (prior.dof + 2.0) * std::log(s2) - 0.5 * prior.scale_matrix(0, 0) / s2;
    lp += -0.5 * std::log(s2) - 0.5 * prior.precision_scale * (mu - prior.mean[0]) * (mu - prior.mean[0]) / s2;
    for (int i = 0; i < 2; ++i) lp += -0.5 * std::log(s2) - 0.5 * (obs(i, 0) - mu) * (obs(i, 0) - mu) / s2;
    return std::exp(lp);
  };
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  // Marginal of sigma2 integrates mu out.
  auto marginal = [&](double s2) {
    return Quad::integrate([&](double mu) { return joint(mu, s2); }, -30.0, 30.0, 12, 1e-13);
  };
  const double norm = Quad::integrate(marginal, 0.0, 200.0, 15, 1e-13);
  double worst = 0.0;
  for (double s2 = 0.05; s2 <= 6.0; s2 += 0.05) {
    const double a = 0.5 * post.dof, b = 0.5 * post.scale_matrix(0, 0);
    const double closed = std::exp(a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(s2) - b / s2);
    worst = std::max(worst, std::abs(marginal(s2) / norm - closed));
  }
  CHECK(worst < 1e-6);

  // mu | sigma2 = 1.7.
  const double s2 = 1.7;
  const double cond_norm = Quad::integrate([&](double mu) { return joint(mu, s2); }, -30.0, 30.0, 12, 1e-13);
  worst = 0.0;
  const double var = s2 / post.precision_scale;
  for (double mu = -3.0; mu <= 3.0; mu += 0.05) {
    const double closed = std::exp(-0.5 * (mu - post.mean[0]) * (mu - post.mean[0]) / var) / std::sqrt(2.0 * std::numbers::pi * var);
    worst = std::max(worst, std::abs(joint(mu, s2) / cond_norm - closed));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("NIW draws concentrate for large precision") {
  Rng rng(2);
  const NIWParams tight{Vector{{3.0, -2.0}}, 1e8, 1e7, 1e7 * Matrix::Identity(2, 2)};
  const GaussianAtom a = sample_niw(tight, rng);
  CHECK((a.mean - tight.mean).norm() < 1e-3);
  CHECK((a.cov - Matrix::Identity(2, 2)).norm() < 0.01);
}

TEST_CASE("known class prior is centred at the robust scatter") {
  const auto s = summary_at(Vector{{1.0, 2.0}}, Matrix::Identity(2, 2) * 3.0);
  const NIWParams p = known_class_prior(s, 10.0, 10.0);
  CHECK(p.mean == s.mean);
  CHECK(p.scale_matrix == 7.0 * s.scatter);
  CHECK((p.scale_matrix / (p.dof - 3.0) - s.scatter).norm() < 1e-12);
}

TEST_CASE("DP concentration update") {
  Rng rng(3);
  CHECK(update_gamma(2.5, 10, 3, std::nullopt, rng) == 2.5);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = update_gamma(1.0, 0, 0, GammaPrior{2.0, 4.0}, rng);
    sum += g;
    sq += g * g;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean - 0.5) < 3.0 * std::sqrt((sq / n - mean * mean) / n));
  int higher = 0;
  for (int i = 0; i < 10000; ++i) {
    if (update_gamma(1.0, 20, 15, GammaPrior{1.0, 1.0}, rng) > update_gamma(1.0, 20, 2, GammaPrior{1.0, 1.0}, rng)) ++higher;
  }
  CHECK(higher > 9000);
}

TEST_CASE("chain invariants hold at every iteration") {
  Rng data_rng(4);
  const TestDataset test = three_groups(data_rng);
  const std::vector<RobustClassSummary> priors{summary_at(Vector{{-4.0, 0.0}}, Matrix::Identity(2, 2)),
                                               summary_at(Vector{{4.0, 0.0}}, Matrix::Identity(2, 2))};
  const Hyperparameters hp = small_hyper(2, 2, 17);
  Rng rng(hp.chain.seed);
  ChainState s = initial_state(test, priors, hp, rng);
  const int J = 2;
  for (int it = 0; it < 200; ++it) {
    gibbs_step(s, test, hp, priors, rng);
    CHECK_UNARY(s.L_star >= J + 1);
    CHECK(s.pi.sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t m = 0; m < s.alpha.size(); ++m) {
      CHECK_UNARY((s.alpha[m] > 0) != (s.beta[m] > 0));
      const int zeta = alpha_beta_to_zeta(s.alpha[m], s.beta[m], J);
      CHECK_UNARY(zeta <= s.L_star);
      CHECK_UNARY(s.u[m] > 0.0);
      CHECK_UNARY(s.u[m] < xi_value(hp.chain.kappa, J, zeta));
    }
  }
  // The far group ends up novel, the others known.
  int novel_far = 0;
  for (int m = 60; m < 90; ++m) novel_far += s.alpha[static_cast<std::size_t>(m)] == 0;
  CHECK(novel_far == 30);
}

TEST_CASE("chains are bit-identical under a fixed seed") {
  Rng data_rng(5);
  const TestDataset test = three_groups(data_rng);
  const std::vector<RobustClassSummary> priors{summary_at(Vector{{-4.0, 0.0}}, Matrix::Identity(2, 2)),
                                               summary_at(Vector{{4.0, 0.0}}, Matrix::Identity(2, 2))};
  const Hyperparameters hp = small_hyper(2, 2, 99);
  const ChainOutput a = run_chain(test, priors, hp);
  const ChainOutput b = run_chain(test, priors, hp);
  CHECK(a.alpha_trace == b.alpha_trace);
  CHECK(a.beta_trace == b.beta_trace);
  CHECK(a.pi_trace == b.pi_trace);
  CHECK(a.gamma_trace == b.gamma_trace);
  CHECK(a.n_retained() == 200);
  CHECK(a.atom_snapshots.size() == 20);
  Hyperparameters other = hp;
  other.chain.seed = 100;
  CHECK_FALSE(run_chain(test, priors, other).alpha_trace == a.alpha_trace);
}

TEST_CASE("a single dominant known class absorbs its own data") {
  Rng data_rng(6);
  TestDataset test{Matrix(200, 2)};
  for (int i = 0; i < 200; ++i) test.data.row(i) << data_rng.normal(), data_rng.normal();
  const std::vector<RobustClassSummary> priors{summary_at(Vector::Zero(2), Matrix::Identity(2, 2))};
  Hyperparameters hp = small_hyper(1, 2, 7);
  hp.lambda_tr = 1e6;
  hp.nu_tr = 1e6;
  const ChainOutput out = run_chain(test, priors, hp);
  int known = 0;
  for (int m = 0; m < 200; ++m) {
    int ones = 0;
    for (int r = 0; r < out.n_retained(); ++r) ones += out.alpha_trace(r, m) == 1;
    known += 2 * ones > out.n_retained();
  }
  CHECK(known >= 198);
}

TEST_CASE("frozen known atoms stay at the robust estimates") {
  Hyperparameters hp = small_hyper(1, 2, 8);
  hp.lambda_tr = 1e6;
  hp.nu_tr = 1e6;
  hp.freeze_threshold = 1e5;
  CHECK(hp.known_frozen());
  Rng data_rng(8);
  TestDataset test{Matrix(40, 2)};
  for (int i = 0; i < 40; ++i) test.data.row(i) << data_rng.normal(1.0, 1.0), data_rng.normal();
  const std::vector<RobustClassSummary> priors{summary_at(Vector{{0.5, 0.0}}, 2.0 * Matrix::Identity(2, 2))};
  const ChainOutput out = run_chain(test, priors, hp);
  for (const auto& snap : out.atom_snapshots) {
    CHECK(snap.known[0].location == priors[0].mean);
    CHECK(snap.known[0].spread == priors[0].scatter);
  }
}

TEST_CASE("hyperparameters are validated") {
  Hyperparameters hp = small_hyper(2, 2, 1);
  hp.nu_tr = 2.5;
  CHECK_THROWS_AS(hp.validate(2), Error);
  hp = small_hyper(2, 2, 1);
  hp.chain.kappa = 1.0;
  CHECK_THROWS_AS(hp.validate(2), Error);
  hp = small_hyper(2, 2, 1);
  hp.chain.n_burnin = hp.chain.n_iter;
  CHECK_THROWS_AS(hp.validate(2), Error);
  Rng rng(1);
  const TestDataset test = three_groups(rng);
  const std::vector<RobustClassSummary> one{summary_at(Vector::Zero(2), Matrix::Identity(2, 2))};
  CHECK_THROWS_AS(run_chain(test, one, small_hyper(2, 2, 1)), Error);
}

}
