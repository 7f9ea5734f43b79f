#include "brand/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "brand/error.hpp"

namespace brand::sim {

namespace {

Matrix cov2(double a, double b, double c) {
  Matrix m(2, 2);
  m << a, b, b, c;
  return m;
}

Component component(double x, double y, const Matrix& cov) { return Component{Vector{{x, y}}, cov}; }

/// k distinct indices out of n, drawn without replacement.
IndexList choose(int n, int k, Rng& rng) {
  IndexList all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.index(static_cast<std::size_t>(n - i));
    std::swap(all[static_cast<std::size_t>(i)], all[j]);
  }
  all.resize(static_cast<std::size_t>(k));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

void SimulationSpec::validate() const {
  if (components.empty() || train_sizes.empty()) throw Error(ErrorCode::InvalidArgument, "simulation needs components");
  if (train_sizes.size() > components.size() || test_sizes.size() != components.size()) {
    throw Error(ErrorCode::LengthMismatch, "simulation sizes do not match the components");
  }
  for (int n : train_sizes) {
    if (n <= 0) throw Error(ErrorCode::InvalidArgument, "training sizes must be positive");
  }
  for (int n : test_sizes) {
    if (n <= 0) throw Error(ErrorCode::InvalidArgument, "test sizes must be positive");
  }
  if (!(label_noise >= 0.0 && label_noise < 1.0)) throw Error(ErrorCode::InvalidArgument, "label noise must lie in [0, 1)");
  if (label_noise > 0.0 && train_sizes.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, "label noise swaps classes 2 and 3");
  }
}

std::vector<Component> benchmark_components() {
  return {
      component(-5, 5, cov2(1, 0.9, 1)),   component(-4, -4, cov2(1, 0, 1)),  component(4, 4, cov2(1, 0, 1)),
      component(0, 0, cov2(1, -0.75, 1)), component(5, -10, cov2(1, 0.9, 1)), component(5, -10, cov2(1, -0.9, 1)),
      component(-10, -10, cov2(0.01, 0, 0.01)),
  };
}

SimulationSpec scenario(const std::string& name) {
  SimulationSpec spec;
  spec.components = benchmark_components();
  spec.train_sizes = {300, 300, 400};
  if (name.starts_with("notsmall")) {
    spec.test_sizes = {200, 200, 250, 90, 100, 100, 10};
  } else if (name.starts_with("small")) {
    spec.test_sizes = {350, 250, 250, 49, 50, 50, 1};
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + name + "'");
  }
  if (name.ends_with("-noise")) {
    spec.label_noise = 0.12;
  } else if (!name.ends_with("-clean")) {
    throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + name + "' (use -noise or -clean)");
  }
  return spec;
}

SimulatedData generate_simulation(const SimulationSpec& spec, Rng& rng) {
  spec.validate();
  const auto p = spec.components.front().mean.size();
  SimulatedData out;
  auto draw = [&](const std::vector<int>& sizes, Matrix& data, std::vector<int>& labels) {
    const int total = std::accumulate(sizes.begin(), sizes.end(), 0);
    data.resize(total, p);
    int row = 0;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      const auto& comp = spec.components[c];
      for (int i = 0; i < sizes[c]; ++i, ++row) {
        data.row(row) = sample_mvn(comp.mean, comp.cov, rng).transpose();
        labels.push_back(static_cast<int>(c) + 1);
      }
    }
  };
  draw(spec.train_sizes, out.train.data, out.train.labels);
  out.train_truth = out.train.labels;
  draw(spec.test_sizes, out.test.data, out.truth);

  if (spec.label_noise > 0.0) {
    const IndexList rows2 = out.train.class_rows(2);
    const IndexList rows3 = out.train.class_rows(3);
    const auto flip2 = choose(static_cast<int>(rows2.size()), static_cast<int>(std::lround(spec.label_noise * rows2.size())), rng);
    const auto flip3 = choose(static_cast<int>(rows3.size()), static_cast<int>(std::lround(spec.label_noise * rows3.size())), rng);
    for (int k : flip2) out.train.labels[static_cast<std::size_t>(rows2[static_cast<std::size_t>(k)])] = 3;
    for (int k : flip3) out.train.labels[static_cast<std::size_t>(rows3[static_cast<std::size_t>(k)])] = 2;
  }
  return out;
}

double toy_function(int group, double t) {
  switch (group) {
    case 1: return 5.0 * std::cos(std::exp(std::sin(t)));
    case 2: return 3.0 * std::log(std::sin(std::pow(t, 1.5)) + 1.0);
    case 3: return 2.0 * t * std::cos(t - 2.5);
    case 4: return -3.0 * std::abs(t - 1.0) * std::sin(t);
    case 5: return std::abs(t - 2.0) * std::cos(t);
    case 6: return (t - 1.0) * (t - 1.0) * std::sin(t);
    default: throw Error(ErrorCode::InvalidArgument, "toy group must be 1..6");
  }
}

FunctionalToyData generate_functional_toy(const FunctionalToySpec& spec, Rng& rng) {
  if (spec.n_per_group <= 0 || spec.n_points < 2 || !(spec.upper > spec.lower) || !(spec.noise_sd >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid functional toy settings");
  }
  const int n_known = 3;
  const Vector grid = Vector::LinSpaced(spec.n_points, spec.lower, spec.upper);
  auto draw = [&](int groups, functional::CurveSet& set, std::vector<int>& truth) {
    set.grid = grid;
    set.values.resize(groups * spec.n_per_group, spec.n_points);
    int row = 0;
    for (int g = 1; g <= groups; ++g) {
      for (int i = 0; i < spec.n_per_group; ++i, ++row) {
        for (int t = 0; t < spec.n_points; ++t) set.values(row, t) = toy_function(g, grid[t]) + rng.normal(0.0, spec.noise_sd);
        truth.push_back(g);
      }
    }
  };
  FunctionalToyData out;
  std::vector<int> train_truth;
  draw(n_known, out.train, train_truth);
  out.train.labels = train_truth;
  out.clean_train = out.train;
  draw(6, out.test, out.truth);

  // Spikes on a few curves of every known group.
  for (int g = 1; g <= n_known && g <= static_cast<int>(spec.contaminated.size()); ++g) {
    const int k = std::min(spec.contaminated[static_cast<std::size_t>(g - 1)], spec.n_per_group);
    for (int i : choose(spec.n_per_group, k, rng)) {
      const int row = (g - 1) * spec.n_per_group + i;
      for (int t : choose(spec.n_points, std::min(spec.n_spikes, spec.n_points), rng)) {
        out.train.values(row, t) += rng.normal(0.0, spec.spike_sd);
      }
      out.contaminated_rows.push_back(row);
    }
  }
  std::sort(out.contaminated_rows.begin(), out.contaminated_rows.end());

  const int n_train = out.train.n_curves();
  const int n_shuffle = static_cast<int>(std::lround(spec.label_shuffle * n_train));
  for (int row : choose(n_train, n_shuffle, rng)) {
    int& label = out.train.labels[static_cast<std::size_t>(row)];
    label = label % n_known + 1;
  }
  return out;
}

}  // namespace brand::sim
