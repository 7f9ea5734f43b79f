#pragma once

#include <string>
#include <vector>

#include "brand/functional.hpp"
#include "brand/random.hpp"
#include "brand/robust_prior.hpp"
#include "brand/sampler.hpp"

namespace brand::sim {

struct Component {
  Vector mean;
  Matrix cov;
};

/// Gaussian training classes 1..J (the first train_sizes.size() components)
/// and a test set drawn from every component.
struct SimulationSpec {
  std::vector<Component> components;
  std::vector<int> train_sizes;
  std::vector<int> test_sizes;
  /// Share of class 2 relabelled as 3 and of class 3 relabelled as 2.
  double label_noise = 0.0;

  void validate() const;
};

/// Seven bivariate components: three known classes, a novel group at the
/// origin, two crossing groups sharing a centre and a tight far-away group.
std::vector<Component> benchmark_components();

/// notsmall-noise, notsmall-clean, small-noise or small-clean.
SimulationSpec scenario(const std::string& name);

struct SimulatedData {
  LabeledDataset train;
  TestDataset test;
  /// Generating component (1-based) of every test unit.
  std::vector<int> truth;
  /// Generating class of every training row, before label noise.
  std::vector<int> train_truth;
};

SimulatedData generate_simulation(const SimulationSpec& spec, Rng& rng);

/// Six curve families on [0, 6]; groups 1-3 are known, 4-6 novel.
double toy_function(int group, double t);

struct FunctionalToySpec {
  int n_per_group = 25;
  int n_points = 100;
  double lower = 0.0;
  double upper = 6.0;
  double noise_sd = 0.25;
  /// Spike-contaminated training curves per known group.
  std::vector<int> contaminated = {3, 2, 3};
  int n_spikes = 15;
  double spike_sd = 5.0;
  /// Share of training curves whose label moves to the next class (cyclically).
  double label_shuffle = 0.1;
};

struct FunctionalToyData {
  functional::CurveSet train;
  functional::CurveSet test;
  std::vector<int> truth;
  /// Training curves with spikes added.
  IndexList contaminated_rows;
  /// Training curves before contamination and relabelling.
  functional::CurveSet clean_train;
};

FunctionalToyData generate_functional_toy(const FunctionalToySpec& spec, Rng& rng);

}  // namespace brand::sim
