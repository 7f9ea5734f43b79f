// brand: command-line front end for the two-stage novelty detector.
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.

#include <chrono>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "brand/error.hpp"
#include "brand/io.hpp"
#include "brand/pipeline.hpp"
#include "brand/simulation.hpp"

namespace fs = std::filesystem;
using namespace brand;

namespace {

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "Flat key = value configuration file");
  cmd->add_option("--set", opts.overrides, "Override a configuration key (key=value); repeatable");
  cmd->add_option("--seed", opts.seed, "Root seed")->each([&opts](const std::string&) { opts.seed_given = true; });
}

pipeline::RunConfig load_config(const CommonOptions& opts) {
  pipeline::RunConfig cfg;
  if (!opts.config.empty()) cfg.apply(io::read_config(opts.config));
  cfg.apply(io::parse_overrides(opts.overrides));
  if (opts.seed_given) cfg.seed = opts.seed;
  return cfg;
}

void write_timing(const fs::path& dir, std::chrono::steady_clock::time_point start) {
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  io::write_json(dir / "timing.json", io::Json{{"seconds", seconds}});
}

void print_metrics(const Metrics& m) { std::cout << io::to_json(m).dump(2) << '\n'; }

int run_simulate(const std::string& scenario, std::uint64_t seed, const fs::path& out) {
  Rng rng(pipeline::stream_seed(seed, pipeline::SeedStream::Simulation));
  fs::create_directories(out);
  if (scenario == "functional-toy") {
    const auto data = sim::generate_functional_toy(sim::FunctionalToySpec{}, rng);
    io::write_curves(out / "train_curves.csv", data.train);
    io::write_curves(out / "test_curves.csv", data.test);
    io::write_labels(out / "truth.csv", data.truth);
  } else {
    const auto data = sim::generate_simulation(sim::scenario(scenario), rng);
    io::write_multivariate(out / "train.csv", data.train.data, data.train.labels);
    io::write_multivariate(out / "test.csv", data.test.data);
    io::write_labels(out / "truth.csv", data.truth);
  }
  io::write_manifest(out, "simulate", io::Json{{"scenario", scenario}}, seed, {});
  std::cout << "wrote " << scenario << " data to " << out.string() << '\n';
  return 0;
}

int run_extract(const CommonOptions& opts, const fs::path& train_path, bool functional_mode, const fs::path& out) {
  const auto cfg = load_config(opts);
  io::Json priors = io::Json::array();
  if (functional_mode) {
    const auto train = io::load_curves(train_path, io::parse_layout(cfg.layout));
    for (const auto& p : functional::extract_functional_priors(train, cfg.basis(), cfg.mcd(), cfg.phi, cfg.v)) {
      priors.push_back(io::to_json(p));
    }
  } else {
    for (const auto& p : pipeline::extract_priors(io::load_multivariate(train_path, true), cfg)) priors.push_back(io::to_json(p));
  }
  fs::create_directories(out);
  io::write_json(out / "priors.json", priors);
  io::write_manifest(out, "extract-priors", cfg.to_json(), cfg.seed, {train_path});
  std::cout << "extracted " << priors.size() << " class priors to " << (out / "priors.json").string() << '\n';
  return 0;
}

int run_fit(const CommonOptions& opts, const fs::path& train_path, const fs::path& test_path, const std::string& truth_path,
            const fs::path& out, bool functional_mode) {
  const auto start = std::chrono::steady_clock::now();
  const auto cfg = load_config(opts);
  std::vector<int> truth;
  std::vector<fs::path> inputs{train_path, test_path};
  if (!truth_path.empty()) {
    truth = io::read_labels(truth_path);
    inputs.emplace_back(truth_path);
  }
  const std::vector<int>* truth_ptr = truth.empty() ? nullptr : &truth;
  fs::create_directories(out);
  io::Json priors = io::Json::array();
  PosteriorSummary summary;
  if (functional_mode) {
    const auto layout = io::parse_layout(cfg.layout);
    const auto train = io::load_curves(train_path, layout);
    const auto test = io::load_curves(test_path, layout);
    if (truth_ptr && static_cast<int>(truth.size()) != test.n_curves()) {
      throw Error(ErrorCode::LengthMismatch, "truth has " + std::to_string(truth.size()) + " labels for " +
                                                 std::to_string(test.n_curves()) + " test curves");
    }
    auto result = pipeline::fit_functional(train, test, cfg, truth_ptr);
    for (const auto& p : result.priors) priors.push_back(io::to_json(p));
    io::write_chain(out / "chain", result.chain, cfg.trace_format == "bin");
    std::vector<std::string> header;
    for (Eigen::Index t = 0; t < test.grid.size(); ++t) header.push_back(io::format_double(test.grid[t]));
    io::write_csv(out / "summary" / "label_mean_curves.csv", result.label_means, header);
    summary = std::move(result.summary);
  } else {
    const auto train = io::load_multivariate(train_path, true);
    const auto test_rows = io::load_multivariate(test_path, false);
    if (truth_ptr && static_cast<int>(truth.size()) != test_rows.n_rows()) {
      throw Error(ErrorCode::LengthMismatch, "truth has " + std::to_string(truth.size()) + " labels for " +
                                                 std::to_string(test_rows.n_rows()) + " test units");
    }
    auto result = pipeline::fit(train, TestDataset{test_rows.data}, cfg, truth_ptr);
    for (const auto& p : result.priors) priors.push_back(io::to_json(p));
    io::write_chain(out / "chain", result.chain, cfg.trace_format == "bin");
    summary = std::move(result.summary);
  }
  io::write_json(out / "priors.json", priors);
  io::write_summary(out / "summary", summary);
  io::write_manifest(out, functional_mode ? "fit-functional" : "fit", cfg.to_json(), cfg.seed, inputs);
  write_timing(out, start);
  std::cout << "novelty units: " << summary.ppcm.units.size() << ", novelty clusters: "
            << (summary.best_partition.empty() ? 0 : *std::max_element(summary.best_partition.begin(), summary.best_partition.end()))
            << '\n';
  if (summary.metrics) print_metrics(*summary.metrics);
  return 0;
}

int run_summarize(const CommonOptions& opts, const fs::path& chain_dir, const std::string& truth_path, const fs::path& out) {
  const auto cfg = load_config(opts);
  const ChainOutput chain = io::read_chain(chain_dir);
  PosteriorSummary summary = summarize(chain, cfg.postprocess());
  if (!truth_path.empty()) summary.metrics = evaluate(summary.labels, io::read_labels(truth_path), chain.n_known());
  io::write_summary(out, summary);
  if (summary.metrics) print_metrics(*summary.metrics);
  return 0;
}

int run_metrics(const fs::path& labels_path, const fs::path& truth_path, int n_known, const std::string& out) {
  const Metrics m = evaluate(io::read_labels(labels_path), io::read_labels(truth_path), n_known);
  if (!out.empty()) io::write_json(out, io::to_json(m));
  print_metrics(m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust Bayesian novelty detection with a Dirichlet-process novelty term", "brand"};
  app.require_subcommand(1);

  std::string scenario = "notsmall-noise";
  std::uint64_t sim_seed = 1;
  std::string sim_out = "data";
  auto* simulate = app.add_subcommand("simulate", "Generate a benchmark scenario");
  simulate->add_option("--scenario", scenario, "notsmall-noise, notsmall-clean, small-noise, small-clean or functional-toy")
      ->capture_default_str();
  simulate->add_option("--seed", sim_seed, "Root seed")->capture_default_str();
  simulate->add_option("--out", sim_out, "Output directory")->capture_default_str();

  CommonOptions extract_opts;
  std::string extract_train, extract_out = "priors";
  bool extract_functional = false;
  auto* extract = app.add_subcommand("extract-priors", "Stage I robust class priors");
  extract->add_option("--train", extract_train, "Labelled training CSV")->required();
  extract->add_option("--out", extract_out, "Output directory")->capture_default_str();
  extract->add_flag("--functional", extract_functional, "Training file holds curves");
  add_common(extract, extract_opts);

  CommonOptions fit_opts;
  std::string fit_train, fit_test, fit_truth, fit_out = "run";
  auto add_fit = [&](const std::string& name, const std::string& help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("--train", fit_train, "Labelled training file")->required();
    cmd->add_option("--test", fit_test, "Test file")->required();
    cmd->add_option("--truth", fit_truth, "Optional true test labels, for metrics");
    cmd->add_option("--out", fit_out, "Output directory")->capture_default_str();
    add_common(cmd, fit_opts);
    return cmd;
  };
  auto* fit = add_fit("fit", "Stage I, Stage II and post-processing on multivariate data");
  auto* fit_functional = add_fit("fit-functional", "Stage I, Stage II and post-processing on curves");

  CommonOptions sum_opts;
  std::string sum_chain, sum_truth, sum_out = "summary";
  auto* summarize_cmd = app.add_subcommand("summarize", "Recompute the posterior summary from a chain directory");
  summarize_cmd->add_option("--chain", sum_chain, "Chain directory written by fit")->required();
  summarize_cmd->add_option("--truth", sum_truth, "Optional true test labels");
  summarize_cmd->add_option("--out", sum_out, "Output directory")->capture_default_str();
  add_common(summarize_cmd, sum_opts);

  std::string met_labels, met_truth, met_out;
  int met_known = 0;
  auto* metrics = app.add_subcommand("metrics", "ARI, novelty precision and known-class accuracy");
  metrics->add_option("--labels", met_labels, "Predicted labels (labels.csv or one column)")->required();
  metrics->add_option("--truth", met_truth, "True labels")->required();
  metrics->add_option("--n-known", met_known, "Number of known classes")->required()->check(CLI::PositiveNumber);
  metrics->add_option("--out", met_out, "Write metrics JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*simulate) return run_simulate(scenario, sim_seed, sim_out);
    if (*extract) return run_extract(extract_opts, extract_train, extract_functional, extract_out);
    if (*fit) return run_fit(fit_opts, fit_train, fit_test, fit_truth, fit_out, false);
    if (*fit_functional) return run_fit(fit_opts, fit_train, fit_test, fit_truth, fit_out, true);
    if (*summarize_cmd) return run_summarize(sum_opts, sum_chain, sum_truth, sum_out);
    if (*metrics) return run_metrics(met_labels, met_truth, met_known, met_out);
  } catch (const Error& e) {
    std::cerr << "brand: " << e.what() << '\n';
    return is_numerical(e.code()) ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "brand: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
