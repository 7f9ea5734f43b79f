#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "brand/types.hpp"

namespace brand {

/// Labeled training set: one row per observation, class labels in 1..J.
struct LabeledDataset {
  Matrix data;
  std::vector<int> labels;

  int n_rows() const { return static_cast<int>(data.rows()); }
  int dim() const { return static_cast<int>(data.cols()); }
  int n_classes() const;
  std::vector<int> class_sizes() const;
  /// Row indices (into data) of class j.
  IndexList class_rows(int j) const;
  /// Throws InvalidArgument/LengthMismatch when the invariants do not hold.
  void validate() const;
};

struct McdConfig {
  double eta = 0.75;
  int n_starts = 500;
  int max_csteps = 100;
  std::uint64_t seed = 0;
  /// Per-class subset fractions, keyed by 1-based class index.
  std::map<int, double> class_eta;
  /// Fixes the MRCD shrinkage weight instead of searching the grid.
  std::optional<double> mrcd_rho;
  /// Condition-number ceiling used to pick the MRCD shrinkage weight.
  double max_condition = 1000.0;

  double eta_for(int class_index) const;
};

enum class RobustMethod { MCD, MRCD };

const char* to_string(RobustMethod method) noexcept;

struct RobustClassSummary {
  Vector mean;
  /// Consistency-corrected scatter (regularized for MRCD).
  Matrix scatter;
  /// Sorted row indices of the h retained observations.
  IndexList untrimmed;
  RobustMethod method = RobustMethod::MCD;
  /// Determinant of the optimized objective: the raw subset covariance for
  /// MCD, the regularized scatter for MRCD.
  double determinant = 0.0;
  /// MRCD shrinkage weight (0 for MCD).
  double rho = 0.0;
  double consistency = 1.0;
};

/// Per-start record of the objective along the C-step iterations.
struct McdTrace {
  std::vector<std::vector<double>> determinants;
};

/// Croux-Haesbroeck factor eta / F_{chi2, p+2}(q_eta) with q_eta the eta-quantile of chi2_p.
double consistency_factor(double eta, int p);

/// h = floor(eta * n).
int subset_size(double eta, int n);

/// Raw FAST-MCD location/scatter of the rows of `data`.
RobustClassSummary fast_mcd(const Matrix& data, const McdConfig& cfg, McdTrace* trace = nullptr);

/// Minimum regularized covariance determinant estimator with the given SPD target.
RobustClassSummary mrcd(const Matrix& data, const McdConfig& cfg, const Matrix& target);

/// Diagonal of the sample covariance; zero variances are replaced by the mean
/// of the positive ones so the target stays SPD.
Matrix mrcd_default_target(const Matrix& data);

/// One summary per class; untrimmed indices refer to rows of train.data.
std::vector<RobustClassSummary> extract_class_priors(const LabeledDataset& train, const McdConfig& cfg);

namespace detail {

/// Unbiased covariance of the selected rows.
Matrix subset_covariance(const Matrix& data, const IndexList& rows, Vector* mean = nullptr);

/// Log-determinant of an SPD matrix, or nullopt when the Cholesky fails or
/// the matrix is numerically singular.
std::optional<double> spd_log_det(const Matrix& m);

double condition_number(const Matrix& m);

}  // namespace detail

}  // namespace brand
