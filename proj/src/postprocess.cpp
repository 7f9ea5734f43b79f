#include "brand/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "brand/error.hpp"

namespace brand {

Vector ppn(const IntTrace& alpha_trace) {
  if (alpha_trace.empty()) throw Error(ErrorCode::InvalidArgument, "PPN needs a non-empty trace");
  Vector out = Vector::Zero(alpha_trace.cols());
  for (int i = 0; i < alpha_trace.rows(); ++i) {
    const auto* row = alpha_trace.row(i);
    for (int m = 0; m < alpha_trace.cols(); ++m) out[m] += row[m] == 0 ? 1.0 : 0.0;
  }
  return out / static_cast<double>(alpha_trace.rows());
}

std::vector<int> modal_alpha(const IntTrace& alpha_trace) {
  const int M = alpha_trace.cols();
  int top = 0;
  for (auto v : alpha_trace.data()) top = std::max(top, static_cast<int>(v));
  std::vector<int> counts(static_cast<std::size_t>(top) + 1);
  std::vector<int> out(static_cast<std::size_t>(M), 0);
  for (int m = 0; m < M; ++m) {
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < alpha_trace.rows(); ++i) ++counts[static_cast<std::size_t>(alpha_trace(i, m))];
    // max_element returns the first maximum, i.e. the smallest label on ties.
    out[static_cast<std::size_t>(m)] = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  }
  return out;
}

IndexList novelty_units(const Vector& ppn_values, double threshold) {
  IndexList units;
  for (Eigen::Index m = 0; m < ppn_values.size(); ++m) {
    if (ppn_values[m] > threshold) units.push_back(static_cast<int>(m));
  }
  return units;
}

std::vector<int> classify(const IntTrace& alpha_trace, const IndexList& novel_units, const Partition& best_partition,
                          int n_known) {
  if (novel_units.size() != best_partition.size()) {
    throw Error(ErrorCode::LengthMismatch, "partition length differs from the number of novelty units");
  }
  std::vector<int> labels = modal_alpha(alpha_trace);
  for (std::size_t k = 0; k < novel_units.size(); ++k) {
    labels[static_cast<std::size_t>(novel_units[k])] = n_known + best_partition[k];
  }
  return labels;
}

Coclustering coclustering(const IntTrace& beta_trace, const IndexList& units) {
  const auto n = static_cast<Eigen::Index>(units.size());
  Coclustering out;
  out.units = units;
  Matrix same = Matrix::Zero(n, n);
  Matrix both = Matrix::Zero(n, n);
  std::vector<int> b(units.size());
  for (int i = 0; i < beta_trace.rows(); ++i) {
    const auto* row = beta_trace.row(i);
    for (std::size_t k = 0; k < units.size(); ++k) b[k] = row[units[k]];
    for (Eigen::Index x = 0; x < n; ++x) {
      if (b[static_cast<std::size_t>(x)] == 0) continue;
      for (Eigen::Index y = x + 1; y < n; ++y) {
        const int by = b[static_cast<std::size_t>(y)];
        if (by == 0) continue;
        both(x, y) += 1.0;
        if (by == b[static_cast<std::size_t>(x)]) same(x, y) += 1.0;
      }
    }
  }
  out.probability = Matrix::Identity(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = x + 1; y < n; ++y) {
      double p = 0.0;
      if (both(x, y) > 0.0) {
        p = same(x, y) / both(x, y);
      } else {
        out.missing.emplace_back(static_cast<int>(x), static_cast<int>(y));
      }
      out.probability(x, y) = p;
      out.probability(y, x) = p;
    }
  }
  return out;
}

Partition canonical_partition(const Partition& p) {
  std::map<int, int> relabel;
  Partition out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto it = relabel.try_emplace(p[i], static_cast<int>(relabel.size())).first;
    out[i] = it->second;
  }
  return out;
}

std::vector<Partition> visited_partitions(const IntTrace& beta_trace, const IndexList& units) {
  std::vector<Partition> out;
  std::set<Partition> seen;
  Partition raw(units.size());
  for (int i = 0; i < beta_trace.rows(); ++i) {
    const auto* row = beta_trace.row(i);
    for (std::size_t k = 0; k < units.size(); ++k) raw[k] = row[units[k]];
    Partition c = canonical_partition(raw);
    if (seen.insert(c).second) out.push_back(std::move(c));
  }
  return out;
}

double vi_score(const Matrix& ppcm, const Partition& partition) {
  const auto n = static_cast<Eigen::Index>(partition.size());
  if (ppcm.rows() != n || ppcm.cols() != n) throw Error(ErrorCode::DimensionMismatch, "PPCM size differs from partition");
  std::map<int, IndexList> members;
  for (Eigen::Index m = 0; m < n; ++m) members[partition[static_cast<std::size_t>(m)]].push_back(static_cast<int>(m));
  double score = 0.0;
  for (Eigen::Index m = 0; m < n; ++m) {
    const IndexList& group = members[partition[static_cast<std::size_t>(m)]];
    double within = 0.0;
    for (int other : group) within += ppcm(m, other);
    score += std::log2(static_cast<double>(group.size())) + std::log2(ppcm.row(m).sum()) - 2.0 * std::log2(within);
  }
  return score;
}

std::size_t best_partition_vi(const Matrix& ppcm, const std::vector<Partition>& candidates) {
  if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "VI search needs at least one candidate");
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const double s = vi_score(ppcm, candidates[c]);
    if (s < best_score) {
      best_score = s;
      best = c;
    }
  }
  return best;
}

std::vector<Partition> all_partitions(int n) {
  std::vector<Partition> out;
  if (n <= 0) return {Partition{}};
  Partition rgs(static_cast<std::size_t>(n), 0);
  std::vector<int> prefix_max(static_cast<std::size_t>(n), 0);
  while (true) {
    out.push_back(rgs);
    // Increment the restricted growth string from the right.
    int i = n - 1;
    while (i > 0 && rgs[static_cast<std::size_t>(i)] > prefix_max[static_cast<std::size_t>(i - 1)]) --i;
    if (i == 0) break;
    ++rgs[static_cast<std::size_t>(i)];
    prefix_max[static_cast<std::size_t>(i)] = std::max(prefix_max[static_cast<std::size_t>(i - 1)], rgs[static_cast<std::size_t>(i)]);
    for (int k = i + 1; k < n; ++k) {
      rgs[static_cast<std::size_t>(k)] = 0;
      prefix_max[static_cast<std::size_t>(k)] = prefix_max[static_cast<std::size_t>(k - 1)];
    }
  }
  return out;
}

int default_min_size(int n_units) {
  return std::max(5, static_cast<int>(std::ceil(0.01 * n_units)));
}

std::vector<bool> flag_anomalies(const Partition& partition, int min_size) {
  std::map<int, int> sizes;
  for (int c : partition) ++sizes[c];
  std::vector<bool> flags(partition.size());
  for (std::size_t i = 0; i < partition.size(); ++i) flags[i] = sizes[partition[i]] < min_size;
  return flags;
}

double ari(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "ARI needs partitions of equal length");
  const double n = static_cast<double>(a.size());
  if (a.size() < 2) return 1.0;
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, count] : table) index += pairs(count);
  for (const auto& [key, count] : rows) sum_rows += pairs(count);
  for (const auto& [key, count] : cols) sum_cols += pairs(count);
  const double expected = sum_rows * sum_cols / pairs(n);
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;  // both partitions trivial and identical in structure
  return (index - expected) / (max_index - expected);
}

double novelty_precision(const std::vector<int>& labels, const std::vector<int>& truth, int n_known) {
  if (labels.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "labels and truth differ in length");
  double flagged = 0.0, correct = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= 1 && labels[i] <= n_known) continue;
    flagged += 1.0;
    if (truth[i] > n_known) correct += 1.0;
  }
  return flagged > 0.0 ? correct / flagged : std::numeric_limits<double>::quiet_NaN();
}

double known_accuracy(const std::vector<int>& labels, const std::vector<int>& truth, int n_known) {
  if (labels.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "labels and truth differ in length");
  double total = 0.0, correct = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (truth[i] < 1 || truth[i] > n_known) continue;
    total += 1.0;
    if (labels[i] == truth[i]) correct += 1.0;
  }
  return total > 0.0 ? correct / total : std::numeric_limits<double>::quiet_NaN();
}

Metrics evaluate(const std::vector<int>& labels, const std::vector<int>& truth, int n_known) {
  return Metrics{ari(labels, truth), novelty_precision(labels, truth, n_known), known_accuracy(labels, truth, n_known)};
}

PosteriorSummary summarize(const ChainOutput& chain, const PostprocessConfig& cfg) {
  PosteriorSummary out;
  const int M = chain.n_units();
  out.ppn = ppn(chain.alpha_trace);
  const IndexList units = novelty_units(out.ppn, cfg.ppn_threshold);
  out.ppcm = coclustering(chain.beta_trace, units);
  if (!units.empty()) {
    const auto candidates = visited_partitions(chain.beta_trace, units);
    out.n_candidates = static_cast<int>(candidates.size());
    const Partition& best = candidates[best_partition_vi(out.ppcm.probability, candidates)];
    out.best_partition.resize(best.size());
    for (std::size_t k = 0; k < best.size(); ++k) out.best_partition[k] = best[k] + 1;
  }
  out.labels = classify(chain.alpha_trace, units, out.best_partition, chain.n_known());
  out.min_size = cfg.min_size.value_or(default_min_size(M));
  out.anomaly_flags.assign(static_cast<std::size_t>(M), false);
  const auto flags = flag_anomalies(out.best_partition, out.min_size);
  for (std::size_t k = 0; k < units.size(); ++k) out.anomaly_flags[static_cast<std::size_t>(units[k])] = flags[k];
  return out;
}

}  // namespace brand
