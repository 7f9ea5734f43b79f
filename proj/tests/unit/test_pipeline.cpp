#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <sys/wait.h>

#include "brand/error.hpp"
#include "brand/io.hpp"
#include "brand/pipeline.hpp"
#include "brand/simulation.hpp"

using namespace brand;
namespace fs = std::filesystem;

TEST_SUITE("pipeline") {

TEST_CASE("run config keys") {
  pipeline::RunConfig cfg;
  cfg.apply({{"eta", "0.9"}, {"n_iter", "50"}, {"gamma_prior", "off"}, {"eta.2", "1"}, {"layout", "columnar"}});
  CHECK(cfg.eta == 0.9);
  CHECK(cfg.n_iter == 50);
  CHECK_FALSE(cfg.gamma_prior);
  CHECK(cfg.class_eta.at(2) == 1.0);
  CHECK(cfg.mcd().eta_for(2) == 1.0);
  CHECK(cfg.mcd().eta_for(1) == 0.9);
  CHECK_FALSE(cfg.chain(std::vector<int>{10, 10}).gamma_prior.has_value());
  CHECK(cfg.to_json()["class_eta"]["2"] == 1.0);

  CHECK_THROWS_AS(cfg.apply({{"etta", "0.9"}}), Error);
  CHECK_THROWS_AS(cfg.apply({{"n_iter", "many"}}), Error);
  CHECK_THROWS_AS(cfg.apply({{"n_iter", "5.5"}}), Error);
  CHECK_THROWS_AS(cfg.apply({{"trace_format", "parquet"}}), Error);
  CHECK_THROWS_AS(cfg.apply({{"layout", "tall"}}), Error);
}

TEST_CASE("run config feeds every stage") {
  pipeline::RunConfig cfg;
  cfg.apply({{"seed", "4"}, {"base_scale", "10"}, {"min_size", "3"}, {"mrcd_rho", "0.3"}});
  const std::vector<int> sizes{30, 70};
  const Hyperparameters hp = cfg.hyperparameters(sizes, 2);
  CHECK(hp.base_measure.scale_matrix == 10.0 * Matrix::Identity(2, 2));
  CHECK(hp.chain.a[1] == doctest::Approx(0.3));
  CHECK(hp.chain.seed == pipeline::stream_seed(4, pipeline::SeedStream::Chain));
  CHECK(cfg.mcd().seed == pipeline::stream_seed(4, pipeline::SeedStream::RobustPrior));
  CHECK(cfg.mcd().mrcd_rho.value() == 0.3);
  CHECK(cfg.postprocess().min_size.value() == 3);
  CHECK(cfg.basis().n_basis == 100);
  CHECK(cfg.functional_hyper(sizes).chain.a.size() == 3);
}

TEST_CASE("seed streams are distinct and stable") {
  using pipeline::SeedStream;
  const auto s0 = pipeline::stream_seed(1, SeedStream::Simulation);
  const auto s1 = pipeline::stream_seed(1, SeedStream::RobustPrior);
  const auto s2 = pipeline::stream_seed(1, SeedStream::Chain);
  CHECK(s0 != s1);
  CHECK(s1 != s2);
  CHECK(s0 == derive_seed(1, 0));
}

TEST_CASE("simulation scenarios") {
  Rng rng(pipeline::stream_seed(1, pipeline::SeedStream::Simulation));
  const auto data = sim::generate_simulation(sim::scenario("notsmall-noise"), rng);
  CHECK(data.train.n_rows() == 1000);
  CHECK(data.test.n_units() == 950);
  CHECK(data.truth.size() == 950);
  int flipped_2 = 0, flipped_3 = 0;
  for (std::size_t i = 0; i < data.train.labels.size(); ++i) {
    if (data.train_truth[i] == 2 && data.train.labels[i] == 3) ++flipped_2;
    if (data.train_truth[i] == 3 && data.train.labels[i] == 2) ++flipped_3;
    if (data.train_truth[i] == 1) CHECK(data.train.labels[i] == 1);
  }
  CHECK(flipped_2 == 36);
  CHECK(flipped_3 == 48);
  const auto small = sim::generate_simulation(sim::scenario("small-clean"), rng);
  CHECK(small.test.n_units() == 1000);
  CHECK(small.train.labels == small.train_truth);
  CHECK_THROWS_AS(sim::scenario("huge-noise"), Error);
  CHECK_THROWS_AS(sim::scenario("small-dirty"), Error);
}

TEST_CASE("functional toy sizes") {
  Rng rng(3);
  const auto toy = sim::generate_functional_toy({}, rng);
  CHECK(toy.train.n_curves() == 75);
  CHECK(toy.test.n_curves() == 150);
  CHECK(toy.test.n_points() == 100);
  CHECK(toy.contaminated_rows.size() == 8);
  int moved = 0;
  for (std::size_t i = 0; i < toy.train.labels.size(); ++i) moved += toy.train.labels[i] != toy.clean_train.labels[i];
  CHECK(moved > 0);
  CHECK(moved < 15);
}

TEST_CASE("end-to-end fit on a small clean scenario") {
  Rng rng(pipeline::stream_seed(3, pipeline::SeedStream::Simulation));
  const auto data = sim::generate_simulation(sim::scenario("notsmall-clean"), rng);
  pipeline::RunConfig cfg;
  cfg.apply({{"seed", "3"}, {"n_starts", "50"}, {"n_iter", "400"}, {"n_burnin", "200"}, {"base_scale", "10"}});
  const auto result = pipeline::fit(data.train, data.test, cfg, &data.truth);
  REQUIRE(result.summary.metrics.has_value());
  CHECK(result.priors.size() == 3);
  CHECK(result.chain.n_retained() == 200);
  CHECK(result.summary.metrics->known_accuracy >= 0.9);
  CHECK(result.summary.metrics->novelty_precision >= 0.9);

  TestDataset wrong{Matrix::Zero(5, 3)};
  CHECK_THROWS_AS(pipeline::fit(data.train, wrong, cfg), Error);
}

#ifdef BRAND_CLI_PATH
TEST_CASE("command-line tool") {
  const fs::path dir = fs::temp_directory_path() / "brand_cli_test";
  fs::remove_all(dir);
  const std::string cli = BRAND_CLI_PATH;
  auto run = [&](const std::string& args) {
    const int status = std::system((cli + " " + args + " > " + (dir / "log.txt").string() + " 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  fs::create_directories(dir);
  CHECK(run("simulate --scenario small-clean --seed 2 --out " + (dir / "data").string()) == 0);
  CHECK(fs::exists(dir / "data" / "train.csv"));
  CHECK(fs::exists(dir / "data" / "manifest.json"));

  const std::string fit_args = "fit --train " + (dir / "data" / "train.csv").string() + " --test " +
                               (dir / "data" / "test.csv").string() + " --truth " + (dir / "data" / "truth.csv").string() +
                               " --set n_iter=200 --set n_burnin=100 --set n_starts=20 --set base_scale=10 --out " +
                               (dir / "fit").string();
  CHECK(run(fit_args) == 0);
  for (const char* f : {"priors.json", "manifest.json", "timing.json", "chain/meta.json", "summary/labels.csv",
                        "summary/metrics.json"})
    CHECK(fs::exists(dir / "fit" / f));

  CHECK(run("summarize --chain " + (dir / "fit" / "chain").string() + " --out " + (dir / "again").string()) == 0);
  const auto first = io::read_labels(dir / "fit" / "summary" / "labels.csv");
  CHECK(io::read_labels(dir / "again" / "labels.csv") == first);
  CHECK(run("metrics --labels " + (dir / "fit" / "summary" / "labels.csv").string() + " --truth " +
            (dir / "data" / "truth.csv").string() + " --n-known 3") == 0);

  CHECK(run("") == 1);
  CHECK(run("fit --train") == 1);
  CHECK(run("fit --train " + (dir / "nope.csv").string() + " --test " + (dir / "nope.csv").string()) == 2);
  CHECK(run(fit_args + " --set bogus=1") == 2);
  fs::remove_all(dir);
}
#endif

}
