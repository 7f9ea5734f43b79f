#pragma once

#include <optional>
#include <vector>

#include "brand/sampler.hpp"
#include "brand/types.hpp"

namespace brand {

/// Cluster assignment, one entry per unit.
using Partition = std::vector<int>;

/// Share of retained iterations with alpha_m = 0, per unit.
Vector ppn(const IntTrace& alpha_trace);

/// Most frequent alpha per unit; ties go to the smallest value.
std::vector<int> modal_alpha(const IntTrace& alpha_trace);

/// Units whose PPN exceeds the threshold, in increasing order.
IndexList novelty_units(const Vector& ppn_values, double threshold = 0.5);

/// Final labels: modal known class 1..J, or J + c for a unit in cluster c
/// (1-based) of `best_partition` over `novel_units`. A unit whose modal
/// value is 0 but that did not pass the PPN threshold gets label 0.
std::vector<int> classify(const IntTrace& alpha_trace, const IndexList& novel_units, const Partition& best_partition,
                          int n_known);

struct Coclustering {
  IndexList units;
  /// Symmetric, unit diagonal, entries in [0, 1].
  Matrix probability;
  /// Pairs (i < j, positions in `units`) that were never novel together.
  std::vector<std::pair<int, int>> missing;
};

/// p_mm' = #{both novel and same cluster} / #{both novel}, over the given units.
Coclustering coclustering(const IntTrace& beta_trace, const IndexList& units);

/// Relabels clusters by order of first appearance (0, 1, 2, ...).
Partition canonical_partition(const Partition& p);

/// Distinct partitions of `units` visited by the chain, in order of first
/// visit; a zero beta (unit not novel in that iteration) forms its own group.
std::vector<Partition> visited_partitions(const IntTrace& beta_trace, const IndexList& units);

/// Lower bound of the posterior expected variation of information (base 2).
double vi_score(const Matrix& ppcm, const Partition& partition);

/// Index of the candidate with the smallest score; ties keep the first.
std::size_t best_partition_vi(const Matrix& ppcm, const std::vector<Partition>& candidates);

/// Every set partition of n elements in canonical form (restricted growth strings).
std::vector<Partition> all_partitions(int n);

/// max(5, ceil(0.01 * M)).
int default_min_size(int n_units);

/// True for units whose cluster has fewer than min_size members.
std::vector<bool> flag_anomalies(const Partition& partition, int min_size);

double ari(const std::vector<int>& a, const std::vector<int>& b);

/// Share of units labelled novel (label 0 or > J) whose true class is > J.
double novelty_precision(const std::vector<int>& labels, const std::vector<int>& truth, int n_known);

/// Accuracy over units whose true class is one of the known 1..J.
double known_accuracy(const std::vector<int>& labels, const std::vector<int>& truth, int n_known);

struct PostprocessConfig {
  double ppn_threshold = 0.5;
  std::optional<int> min_size;
};

struct Metrics {
  double ari = 0.0;
  double novelty_precision = 0.0;
  double known_accuracy = 0.0;
};

struct PosteriorSummary {
  Vector ppn;
  std::vector<int> labels;
  Coclustering ppcm;
  /// Cluster ids 1..S over ppcm.units.
  Partition best_partition;
  /// Per unit; only novelty units can be flagged.
  std::vector<bool> anomaly_flags;
  int n_candidates = 0;
  int min_size = 0;
  std::optional<Metrics> metrics;
};

PosteriorSummary summarize(const ChainOutput& chain, const PostprocessConfig& cfg = {});

Metrics evaluate(const std::vector<int>& labels, const std::vector<int>& truth, int n_known);

}  // namespace brand
