#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "brand/error.hpp"
#include "brand/postprocess.hpp"
#include "brand/random.hpp"

using namespace brand;

namespace {

IntTrace trace_from(const std::vector<std::vector<int>>& rows) {
  IntTrace t(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t m = 0; m < rows[i].size(); ++m) t(static_cast<int>(i), static_cast<int>(m)) = rows[i][m];
  return t;
}

/// One column per unit: trace of unit m is columns[m].
IntTrace trace_by_unit(const std::vector<std::vector<int>>& columns) {
  IntTrace t(static_cast<int>(columns.front().size()), static_cast<int>(columns.size()));
  for (std::size_t m = 0; m < columns.size(); ++m)
    for (std::size_t i = 0; i < columns[m].size(); ++i) t(static_cast<int>(i), static_cast<int>(m)) = columns[m][i];
  return t;
}

Matrix ppcm3() {
  Matrix p(3, 3);
  p << 1.0, 0.9, 0.1, 0.9, 1.0, 0.1, 0.1, 0.1, 1.0;
  return p;
}

}  // namespace

TEST_SUITE("postprocess") {

TEST_CASE("PPN and modal alpha") {
  const IntTrace t = trace_by_unit({{0, 0, 0, 0}, {0, 1, 0, 2}, {1, 1, 1, 2}, {2, 1, 1, 2}});
  const Vector p = ppn(t);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 0.5);
  CHECK(p[2] == 0.0);
  const auto modal = modal_alpha(t);
  CHECK(modal[2] == 1);
  CHECK(modal[3] == 1);  // tie between 1 and 2 goes to the smaller label
  CHECK(novelty_units(p) == IndexList{0});
  CHECK(novelty_units(p, 0.4) == IndexList{0, 1});
}

TEST_CASE("classification counts only, not order") {
  const IntTrace a = trace_by_unit({{1, 1, 2, 0, 1}, {0, 0, 0, 3, 3}});
  const IntTrace b = trace_by_unit({{0, 2, 1, 1, 1}, {3, 0, 3, 0, 0}});
  const auto la = classify(a, IndexList{1}, Partition{1}, 3);
  const auto lb = classify(b, IndexList{1}, Partition{1}, 3);
  CHECK(la == lb);
  CHECK(la[0] == 1);
  CHECK(la[1] == 4);
}

TEST_CASE("coclustering") {
  const IntTrace beta = trace_by_unit({{1, 1, 2, 2}, {1, 2, 2, 1}, {1, 1, 2, 2}, {0, 0, 2, 2}});
  const Coclustering c = coclustering(beta, IndexList{0, 1, 2, 3});
  CHECK(c.probability(0, 1) == 0.5);
  CHECK(c.probability(0, 2) == 1.0);
  CHECK(c.probability(2, 3) == 1.0);  // iterations with beta = 0 are left out
  CHECK(c.probability(1, 3) == 0.5);
  CHECK((c.probability - c.probability.transpose()).norm() == 0.0);
  for (int i = 0; i < 4; ++i) CHECK(c.probability(i, i) == 1.0);

  const IntTrace never = trace_by_unit({{1, 0}, {0, 1}});
  const Coclustering n = coclustering(never, IndexList{0, 1});
  CHECK(n.probability(0, 1) == 0.0);
  CHECK(n.missing.size() == 1);
}

TEST_CASE("coclustering of independent uniform labels is one third") {
  Rng rng(1);
  const int I = 10000;
  std::vector<std::vector<int>> cols(2, std::vector<int>(I));
  for (int i = 0; i < I; ++i) {
    cols[0][static_cast<std::size_t>(i)] = 1 + static_cast<int>(rng.index(3));
    cols[1][static_cast<std::size_t>(i)] = 1 + static_cast<int>(rng.index(3));
  }
  const double p = coclustering(trace_by_unit(cols), IndexList{0, 1}).probability(0, 1);
  CHECK(std::abs(p - 1.0 / 3.0) < 3.0 * std::sqrt(2.0 / 9.0 / I));
}

TEST_CASE("VI scores of the three-unit example") {
  const Matrix p = ppcm3();
  CHECK(vi_score(p, {0, 0, 0}) == doctest::Approx(2.4918530963296748).epsilon(1e-13));
  CHECK(vi_score(p, {0, 0, 1}) == doctest::Approx(0.5590367316089017).epsilon(1e-13));
  CHECK(vi_score(p, {0, 1, 0}) == doctest::Approx(3.713020310834054).epsilon(1e-13));
  CHECK(vi_score(p, {1, 0, 0}) == doctest::Approx(3.713020310834054).epsilon(1e-13));
  CHECK(vi_score(p, {0, 1, 2}) == doctest::Approx(2.263034405833794).epsilon(1e-13));
  const auto all = all_partitions(3);
  CHECK(all.size() == 5);
  CHECK(all[best_partition_vi(p, all)] == Partition{0, 0, 1});
  CHECK(best_partition_vi(p, {Partition{0, 1, 2}}) == 0);
  CHECK_THROWS_AS(best_partition_vi(p, {}), Error);
}

TEST_CASE("block PPCM: the generating partition scores zero and beats its neighbours") {
  const Partition truth{0, 0, 1, 1, 1, 2};
  Matrix p(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) p(i, j) = truth[static_cast<std::size_t>(i)] == truth[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
  CHECK(std::abs(vi_score(p, truth)) < 1e-12);
  const double base = vi_score(p, truth);
  CHECK(vi_score(p, {0, 0, 0, 0, 0, 2}) >= base);
  CHECK(vi_score(p, {0, 0, 1, 1, 3, 2}) >= base);
  CHECK(vi_score(p, {0, 0, 1, 1, 1, 1}) >= base);
  CHECK(vi_score(p, {0, 3, 1, 1, 1, 2}) >= base);
}

TEST_CASE("set partitions are Bell numbers in canonical form") {
  const int bell[] = {1, 1, 2, 5, 15, 52, 203, 877, 4140};
  for (int n = 1; n <= 8; ++n) {
    const auto all = all_partitions(n);
    CHECK(static_cast<int>(all.size()) == bell[n]);
    for (const auto& p : all) CHECK(canonical_partition(p) == p);
  }
  CHECK(canonical_partition({5, 5, 2, 7, 2}) == Partition{0, 0, 1, 2, 1});
}

TEST_CASE("visited partitions are distinct up to relabelling") {
  const IntTrace beta = trace_from({{1, 1, 2}, {2, 2, 1}, {3, 1, 1}, {0, 1, 1}});
  const auto visited = visited_partitions(beta, IndexList{0, 1, 2});
  // A zero beta is its own group, so the last row repeats the third.
  CHECK(visited.size() == 2);
  CHECK(visited[0] == Partition{0, 0, 1});
  CHECK(visited[1] == Partition{0, 1, 1});
}

TEST_CASE("anomaly flags") {
  CHECK(default_min_size(100) == 5);
  CHECK(default_min_size(1001) == 11);
  const auto none = flag_anomalies({1, 1, 2, 2}, 2);
  CHECK(std::none_of(none.begin(), none.end(), [](bool b) { return b; }));
  const auto flags = flag_anomalies({1, 1, 1, 2}, 2);
  CHECK(flags == std::vector<bool>{false, false, false, true});
}

TEST_CASE("adjusted Rand index") {
  CHECK(ari({1, 1, 2, 2}, {1, 1, 2, 2}) == doctest::Approx(1.0));
  CHECK(ari({1, 1, 2, 2, 3}, {7, 7, 4, 4, 9}) == doctest::Approx(1.0));
  // Pair counting: index 0, expected 2/3, max 2.
  CHECK(ari({1, 1, 2, 2}, {1, 2, 1, 2}) == doctest::Approx(-0.5).epsilon(1e-14));
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> a(30), b(30);
    for (int i = 0; i < 30; ++i) {
      a[static_cast<std::size_t>(i)] = static_cast<int>(rng.index(4));
      b[static_cast<std::size_t>(i)] = static_cast<int>(rng.index(3));
    }
    CHECK(ari(a, b) == doctest::Approx(ari(b, a)).epsilon(1e-14));
    std::vector<int> relabelled = a;
    for (int& x : relabelled) x = 10 - x;
    CHECK(ari(relabelled, b) == doctest::Approx(ari(a, b)).epsilon(1e-14));
  }
}

TEST_CASE("metrics") {
  const std::vector<int> truth{1, 1, 2, 2, 3, 4, 4, 5};
  const std::vector<int> labels{1, 1, 2, 3, 3, 4, 0, 3};
  CHECK(known_accuracy(labels, truth, 3) == doctest::Approx(4.0 / 5.0));
  CHECK(novelty_precision(labels, truth, 3) == doctest::Approx(1.0));
  const std::vector<int> wrong{4, 1, 2, 2, 3, 4, 4, 5};
  CHECK(novelty_precision(wrong, truth, 3) == doctest::Approx(3.0 / 4.0));
  const Metrics m = evaluate(labels, truth, 3);
  CHECK(m.known_accuracy == doctest::Approx(0.8));
  CHECK_THROWS_AS(evaluate(labels, {1, 2}, 3), Error);
}

TEST_CASE("summaries of a synthetic chain") {
  // Units 0-1 always known, 2-4 novel in one cluster, 5 novel alone.
  ChainOutput chain;
  chain.alpha_trace = trace_by_unit({{1, 1, 1, 1}, {2, 2, 2, 2}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 1}});
  chain.beta_trace = trace_by_unit({{0, 0, 0, 0}, {0, 0, 0, 0}, {1, 2, 1, 1}, {1, 2, 1, 1}, {1, 2, 1, 1}, {2, 1, 3, 0}});
  chain.pi_trace = Matrix::Constant(4, 3, 1.0 / 3.0);
  PostprocessConfig cfg;
  cfg.min_size = 2;
  const PosteriorSummary s = summarize(chain, cfg);
  CHECK(s.labels[0] == 1);
  CHECK(s.labels[1] == 2);
  CHECK(s.ppcm.units == IndexList{2, 3, 4, 5});
  CHECK(s.labels[2] == s.labels[3]);
  CHECK(s.labels[3] == s.labels[4]);
  CHECK(s.labels[2] > 2);
  CHECK(s.labels[5] > 2);
  CHECK(s.labels[5] != s.labels[2]);
  CHECK(s.anomaly_flags[5]);
  CHECK_FALSE(s.anomaly_flags[2]);
  CHECK_FALSE(s.anomaly_flags[0]);
  for (Eigen::Index i = 0; i < s.ppn.size(); ++i) CHECK_UNARY(s.ppn[i] >= 0.0 && s.ppn[i] <= 1.0);
}

}
