#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>

#include "brand/error.hpp"
#include "brand/io.hpp"
#include "brand/random.hpp"

using namespace brand;
namespace fs = std::filesystem;

namespace {

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("brand_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& f) const { return path / f; }
};

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("doubles round-trip through text") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.normal() * std::pow(10.0, rng.uniform(-30.0, 30.0));
    CHECK(io::parse_double(io::format_double(x)) == x);
  }
  CHECK(io::parse_double(" 2.5 ") == 2.5);
  CHECK(io::parse_double("1e-3") == 1e-3);
  CHECK_THROWS_AS(io::parse_double("abc"), Error);
}

TEST_CASE("CSV header detection and round-trip") {
  TempDir dir("csv");
  Matrix m(3, 2);
  m << 1.0, -2.5, 1e-17, 3.0, 0.1, 7.0;
  io::write_csv(dir / "a.csv", m, {"x", "y"});
  const auto a = io::read_csv(dir / "a.csv");
  CHECK(a.header == std::vector<std::string>{"x", "y"});
  CHECK(a.values == m);
  io::write_csv(dir / "b.csv", m);
  const auto b = io::read_csv(dir / "b.csv");
  CHECK(b.header.empty());
  CHECK(b.values == m);
  const auto forced = io::read_csv(dir / "b.csv", true);
  CHECK(forced.values.rows() == 2);

  write_text(dir / "ragged.csv", "1,2\n3\n");
  CHECK(code_of([&] { io::read_csv(dir / "ragged.csv"); }) == ErrorCode::ParseError);
  write_text(dir / "bad.csv", "x,y\n1,2\n3,oops\n");
  try {
    io::read_csv(dir / "bad.csv");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("row 3, column 2") != std::string::npos);
  }
  CHECK(code_of([&] { io::read_csv(dir / "missing.csv"); }) == ErrorCode::IoError);
}

TEST_CASE("multivariate data with labels") {
  TempDir dir("mv");
  Matrix x(4, 2);
  x << 0.5, 1.5, 2.0, 3.0, -1.0, 0.0, 4.0, 4.5;
  io::write_multivariate(dir / "train.csv", x, {1, 2, 2, 1});
  const LabeledDataset d = io::load_multivariate(dir / "train.csv", true);
  CHECK(d.data == x);
  CHECK(d.labels == std::vector<int>{1, 2, 2, 1});
  const LabeledDataset raw = io::load_multivariate(dir / "train.csv", false);
  CHECK(raw.data.cols() == 3);
  write_text(dir / "frac.csv", "x,label\n1,1.5\n");
  CHECK_THROWS_AS(io::load_multivariate(dir / "frac.csv", true), Error);
}

TEST_CASE("curves in both layouts") {
  TempDir dir("curves");
  functional::CurveSet c{Vector::LinSpaced(5, 0.0, 1.0), Matrix(3, 5), {1, 2, 1}};
  Rng rng(2);
  for (int i = 0; i < 3; ++i)
    for (int t = 0; t < 5; ++t) c.values(i, t) = rng.normal();
  for (auto layout : {io::CurveLayout::Wide, io::CurveLayout::Columnar}) {
    const fs::path p = dir / (layout == io::CurveLayout::Wide ? "wide.csv" : "col.csv");
    io::write_curves(p, c, layout);
    const auto back = io::load_curves(p, layout);
    CHECK(back.grid == c.grid);
    CHECK(back.values == c.values);
    CHECK(back.labels == c.labels);
  }
  functional::CurveSet unlabelled = c;
  unlabelled.labels.clear();
  io::write_curves(dir / "u.csv", unlabelled);
  CHECK(io::load_curves(dir / "u.csv", io::CurveLayout::Wide).labels.empty());
  CHECK(io::parse_layout("columnar") == io::CurveLayout::Columnar);
  CHECK_THROWS_AS(io::parse_layout("tall"), Error);
  write_text(dir / "badgrid.csv", "0,a,2\n1,2,3\n");
  CHECK(code_of([&] { io::load_curves(dir / "badgrid.csv", io::CurveLayout::Wide); }) == ErrorCode::ParseError);
}

TEST_CASE("labels files") {
  TempDir dir("labels");
  io::write_labels(dir / "l.csv", {3, 1, 0, 2});
  CHECK(io::read_labels(dir / "l.csv") == std::vector<int>{3, 1, 0, 2});
  write_text(dir / "summary.csv", "unit,label,ppn,anomaly\n0,2,0.1,0\n1,4,0.9,1\n");
  CHECK(io::read_labels(dir / "summary.csv") == std::vector<int>{2, 4});
}

TEST_CASE("config files and overrides") {
  TempDir dir("config");
  write_text(dir / "run.cfg", "# run settings\nseed = 7\n\neta=0.9  # trailing comment\nlayout = wide\n");
  const auto kv = io::read_config(dir / "run.cfg");
  CHECK(kv.size() == 3);
  CHECK(kv.at("seed") == "7");
  CHECK(kv.at("eta") == "0.9");
  write_text(dir / "bad.cfg", "seed 7\n");
  CHECK(code_of([&] { io::read_config(dir / "bad.cfg"); }) == ErrorCode::ParseError);
  const auto o = io::parse_overrides({"n_iter=50", " kappa = 0.3"});
  CHECK(o.at("n_iter") == "50");
  CHECK(o.at("kappa") == "0.3");
  CHECK_THROWS_AS(io::parse_overrides({"n_iter"}), Error);
}

TEST_CASE("JSON round-trips of priors") {
  RobustClassSummary s;
  s.mean = Vector{{1.0, -0.1}};
  s.scatter = Matrix::Identity(2, 2) * 0.3;
  s.untrimmed = {0, 2, 5};
  s.method = RobustMethod::MRCD;
  s.rho = 0.25;
  s.consistency = 1.5;
  s.determinant = 0.09;
  const auto back = io::robust_from_json(io::to_json(s));
  CHECK(back.mean == s.mean);
  CHECK(back.scatter == s.scatter);
  CHECK(back.untrimmed == s.untrimmed);
  CHECK(back.method == RobustMethod::MRCD);
  CHECK(back.rho == 0.25);
  CHECK(back.consistency == 1.5);
  auto broken = io::to_json(s);
  broken["mean"] = std::vector<double>{1.0};
  CHECK_THROWS_AS(io::robust_from_json(broken), Error);

  functional::FunctionalKnownPrior f;
  f.grid = Vector::LinSpaced(4, 0.0, 3.0);
  f.mean_curve = Vector{{0.1, 0.2, 0.3, 0.4}};
  f.noise_curve = Vector::Constant(4, 0.05);
  f.phi = 0.5;
  f.robust = s;
  TempDir dir("json");
  io::write_json(dir / "f.json", io::to_json(f));
  const auto g = io::functional_prior_from_json(io::read_json(dir / "f.json"));
  CHECK(g.grid == f.grid);
  CHECK(g.mean_curve == f.mean_curve);
  CHECK(g.noise_curve == f.noise_curve);
  CHECK(g.phi == 0.5);
  CHECK(g.robust.untrimmed == s.untrimmed);
  write_text(dir / "bad.json", "{ nope");
  CHECK(code_of([&] { io::read_json(dir / "bad.json"); }) == ErrorCode::ParseError);

  const Metrics m{std::numeric_limits<double>::quiet_NaN(), 1.0, 0.5};
  CHECK(io::to_json(m)["ari"].is_null());
}

TEST_CASE("chain directories round-trip in both trace formats") {
  ChainOutput chain;
  chain.alpha_trace = IntTrace(3, 4);
  chain.beta_trace = IntTrace(3, 4);
  for (int i = 0; i < 3; ++i)
    for (int m = 0; m < 4; ++m) {
      chain.alpha_trace(i, m) = (i + m) % 3;
      chain.beta_trace(i, m) = chain.alpha_trace(i, m) == 0 ? 1 + m % 2 : 0;
    }
  chain.pi_trace = Matrix::Constant(3, 3, 1.0 / 3.0);
  chain.gamma_trace = Vector{{0.5, 1.25, 2.0}};
  chain.n_active_trace = {1, 2, 2};
  chain.seed = 99;
  chain.atom_snapshots.push_back({2, {{1, Vector{{0.0, 1.0}}, Matrix::Identity(2, 2)}}, {{1, Vector{{5.0, 5.0}}, Matrix::Identity(2, 2) * 2.0}}});
  TempDir dir("chain");
  for (bool binary : {true, false}) {
    const fs::path d = dir / (binary ? "bin" : "csv");
    io::write_chain(d, chain, binary);
    const ChainOutput back = io::read_chain(d);
    CHECK(back.alpha_trace == chain.alpha_trace);
    CHECK(back.beta_trace == chain.beta_trace);
    CHECK(back.pi_trace == chain.pi_trace);
    CHECK(back.gamma_trace == chain.gamma_trace);
    CHECK(back.n_active_trace == chain.n_active_trace);
    CHECK(back.seed == 99);
    REQUIRE(back.atom_snapshots.size() == 1);
    CHECK(back.atom_snapshots[0].iteration == 2);
    CHECK(back.atom_snapshots[0].novel[0].location == chain.atom_snapshots[0].novel[0].location);
    CHECK(back.atom_snapshots[0].novel[0].spread == chain.atom_snapshots[0].novel[0].spread);
  }
  CHECK(fs::file_size(dir / "bin" / "traces" / "alpha.bin") == 3 * 4 * sizeof(std::int32_t));
}

TEST_CASE("summary directory") {
  PosteriorSummary s;
  s.ppn = Vector{{0.0, 0.9, 1.0}};
  s.labels = {1, 3, 3};
  s.ppcm.units = {1, 2};
  s.ppcm.probability = Matrix::Ones(2, 2);
  s.best_partition = {1, 1};
  s.anomaly_flags = {false, true, true};
  s.n_candidates = 1;
  s.min_size = 5;
  s.metrics = Metrics{1.0, 1.0, 1.0};
  TempDir dir("summary");
  io::write_summary(dir.path, s);
  for (const char* f : {"labels.csv", "ppcm.bin", "ppcm.json", "partition.csv", "metrics.json", "summary.json"})
    CHECK(fs::exists(dir / f));
  CHECK(io::read_labels(dir / "labels.csv") == s.labels);
  CHECK(fs::file_size(dir / "ppcm.bin") == 4 * sizeof(double));
  CHECK(io::read_json(dir / "summary.json")["n_novelty_units"] == 2);
}

TEST_CASE("git blob hashes and manifests") {
  TempDir dir("manifest");
  write_text(dir / "hello.txt", "hello\n");
  CHECK(io::git_blob_sha1(dir / "hello.txt") == "ce013625030ba8dba906f756967f9e9ca394464a");
  write_text(dir / "empty.txt", "");
  CHECK(io::git_blob_sha1(dir / "empty.txt") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  io::write_manifest(dir.path, "fit", io::Json{{"eta", 0.75}}, 5, {dir / "hello.txt"});
  const auto m = io::read_json(dir / "manifest.json");
  CHECK(m["command"] == "fit");
  CHECK(m["seed"] == 5);
  CHECK(m["inputs"][0]["git_blob_sha1"] == "ce013625030ba8dba906f756967f9e9ca394464a");
}

}
