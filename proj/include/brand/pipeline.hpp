#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brand/functional.hpp"
#include "brand/io.hpp"
#include "brand/postprocess.hpp"
#include "brand/robust_prior.hpp"
#include "brand/sampler.hpp"

namespace brand::pipeline {

/// Seed streams derived from the root seed.
enum class SeedStream : std::uint64_t { Simulation = 0, RobustPrior = 1, Chain = 2 };

std::uint64_t stream_seed(std::uint64_t root, SeedStream stream);

/// Every setting of a run. Keys accepted by apply() match the member names;
/// `eta.<j>` sets a per-class subset fraction.
struct RunConfig {
  std::uint64_t seed = 1;

  // Stage I
  double eta = 0.75;
  int n_starts = 500;
  int max_csteps = 100;
  double max_condition = 1000.0;
  double mrcd_rho = -1.0;  // negative: pick from the grid
  std::map<int, double> class_eta;

  // Stage II, shared
  int n_iter = 2000;
  int n_burnin = 1000;
  double kappa = 0.5;
  double a0 = 0.1;
  double gamma = 1.0;
  bool gamma_prior = true;
  double gamma_shape = 1.0;
  double gamma_rate = 1.0;
  int atom_thin = 10;

  // Stage II, multivariate
  double lambda_tr = 10.0;
  double nu_tr = 10.0;
  double base_lambda = 0.01;
  double base_nu = 10.0;
  double base_scale = 1.0;
  double freeze_threshold = 1e5;

  // Stage II, functional
  int n_basis = 100;
  int order = 5;
  double a_tau = 3.0;
  double b_tau = 1.0;
  double s2 = 1.0;
  double a_H = 5.0;
  double b_H = 1.0;
  double phi = 0.0;
  double v = 0.0;
  std::string layout = "wide";

  // Post-processing and output
  double ppn_threshold = 0.5;
  int min_size = 0;  // 0: max(5, ceil(0.01 M))
  std::string trace_format = "bin";

  /// Throws InvalidArgument on unknown keys or malformed values.
  void apply(const io::KeyValues& values);
  io::Json to_json() const;

  McdConfig mcd() const;
  ChainControls chain(std::span<const int> class_sizes) const;
  Hyperparameters hyperparameters(std::span<const int> class_sizes, int dim) const;
  functional::FunctionalHyper functional_hyper(std::span<const int> class_sizes) const;
  functional::BasisSpec basis() const;
  PostprocessConfig postprocess() const;
};

struct FitResult {
  std::vector<RobustClassSummary> priors;
  ChainOutput chain;
  PosteriorSummary summary;
};

struct FunctionalFitResult {
  std::vector<functional::FunctionalKnownPrior> priors;
  ChainOutput chain;
  PosteriorSummary summary;
  /// Mean test curve of every final label 1..max label (row l - 1).
  Matrix label_means;
};

std::vector<RobustClassSummary> extract_priors(const LabeledDataset& train, const RunConfig& cfg);

/// Stage I, Stage II and post-processing; metrics are filled when truth is given.
FitResult fit(const LabeledDataset& train, const TestDataset& test, const RunConfig& cfg,
              const std::vector<int>* truth = nullptr);

FunctionalFitResult fit_functional(const functional::CurveSet& train, const functional::CurveSet& test,
                                   const RunConfig& cfg, const std::vector<int>* truth = nullptr);

}  // namespace brand::pipeline
