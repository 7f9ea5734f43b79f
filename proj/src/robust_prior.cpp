#include "brand/robust_prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "brand/error.hpp"
#include "brand/random.hpp"

namespace brand {

namespace {

constexpr double kMonotoneSlack = 1e-9;

void require_finite(const Matrix& data) {
  if (!data.allFinite()) throw Error(ErrorCode::InvalidArgument, "data contains non-finite entries");
}

Matrix gather_rows(const Matrix& data, const IndexList& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), data.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = data.row(rows[i]);
  return out;
}

/// The h rows closest to `center` under the metric `cov`, ties broken by row index.
IndexList closest_rows(const Matrix& data, const Vector& center, const Eigen::LLT<Matrix>& cov, int h) {
  const Eigen::Index n = data.rows();
  const Matrix centered = (data.rowwise() - center.transpose()).transpose();
  const Matrix z = cov.matrixL().solve(centered);
  const Vector d = z.colwise().squaredNorm().transpose();
  IndexList order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
  order.resize(static_cast<std::size_t>(h));
  std::sort(order.begin(), order.end());
  return order;
}

/// Random ordering of 0..n-1 drawn from rng (Fisher-Yates).
IndexList random_order(int n, Rng& rng) {
  IndexList order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.index(static_cast<std::size_t>(i) + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  return order;
}

bool all_rows_identical(const Matrix& data) {
  for (Eigen::Index i = 1; i < data.rows(); ++i) {
    if (data.row(i) != data.row(0)) return false;
  }
  return true;
}

void check_monotone(const std::vector<double>& log_dets) {
  for (std::size_t k = 1; k < log_dets.size(); ++k) {
    if (log_dets[k] > log_dets[k - 1] + kMonotoneSlack) {
      throw std::logic_error("C-step increased the covariance determinant");
    }
  }
}

}  // namespace

namespace detail {

Matrix subset_covariance(const Matrix& data, const IndexList& rows, Vector* mean) {
  const Matrix sub = gather_rows(data, rows);
  const Vector mu = sub.colwise().mean().transpose();
  const Matrix centered = sub.rowwise() - mu.transpose();
  const double denom = std::max<double>(1.0, static_cast<double>(sub.rows()) - 1.0);
  Matrix cov = (centered.transpose() * centered) / denom;
  if (mean) *mean = mu;
  return 0.5 * (cov + cov.transpose());
}

std::optional<double> spd_log_det(const Matrix& m) {
  Eigen::LLT<Matrix> chol(m);
  if (chol.info() != Eigen::Success) return std::nullopt;
  if (!(chol.rcond() > 1e-12)) return std::nullopt;
  const Vector diag = Matrix(chol.matrixL()).diagonal();
  return 2.0 * diag.array().log().sum();
}

double condition_number(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  const Vector ev = eig.eigenvalues();
  const double lo = ev.minCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return ev.maxCoeff() / lo;
}

}  // namespace detail

int LabeledDataset::n_classes() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end());
}

std::vector<int> LabeledDataset::class_sizes() const {
  std::vector<int> sizes(static_cast<std::size_t>(std::max(0, n_classes())), 0);
  for (int l : labels) {
    if (l >= 1) ++sizes[static_cast<std::size_t>(l - 1)];
  }
  return sizes;
}

IndexList LabeledDataset::class_rows(int j) const {
  IndexList rows;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == j) rows.push_back(static_cast<int>(i));
  }
  return rows;
}

void LabeledDataset::validate() const {
  if (static_cast<std::size_t>(data.rows()) != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "training data has " + std::to_string(data.rows()) + " rows but " +
                                               std::to_string(labels.size()) + " labels");
  }
  if (data.cols() < 1) throw Error(ErrorCode::InvalidArgument, "training data needs at least one column");
  require_finite(data);
  for (int l : labels) {
    if (l < 1) throw Error(ErrorCode::InvalidArgument, "class labels must be in 1..J");
  }
  const auto sizes = class_sizes();
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    if (sizes[j] < 2) {
      throw Error(ErrorCode::InsufficientRows, "class " + std::to_string(j + 1) + " has fewer than 2 rows");
    }
  }
}

double McdConfig::eta_for(int class_index) const {
  const auto it = class_eta.find(class_index);
  return it == class_eta.end() ? eta : it->second;
}

const char* to_string(RobustMethod method) noexcept { return method == RobustMethod::MCD ? "MCD" : "MRCD"; }

double consistency_factor(double eta, int p) {
  if (!(eta >= 0.5) || eta > 1.0) throw Error(ErrorCode::InvalidArgument, "eta must lie in [0.5, 1]");
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (eta >= 1.0) return 1.0;
  const boost::math::chi_squared_distribution<double> chi_p(p);
  const boost::math::chi_squared_distribution<double> chi_p2(p + 2);
  const double q = boost::math::quantile(chi_p, eta);
  return eta / boost::math::cdf(chi_p2, q);
}

int subset_size(double eta, int n) { return static_cast<int>(std::floor(eta * n + 1e-9)); }

RobustClassSummary fast_mcd(const Matrix& data, const McdConfig& cfg, McdTrace* trace) {
  require_finite(data);
  const int n = static_cast<int>(data.rows());
  const int p = static_cast<int>(data.cols());
  const int h = subset_size(cfg.eta, n);
  if (h < p + 1) {
    throw Error(ErrorCode::InsufficientRows,
                "MCD subset size " + std::to_string(h) + " is below p + 1 = " + std::to_string(p + 1));
  }
  if (cfg.n_starts < 1 || cfg.max_csteps < 1) {
    throw Error(ErrorCode::InvalidArgument, "n_starts and max_csteps must be positive");
  }
  const double c0 = consistency_factor(cfg.eta, p);

  IndexList best;
  double best_log_det = std::numeric_limits<double>::infinity();

  if (h == n) {
    best.resize(static_cast<std::size_t>(n));
    std::iota(best.begin(), best.end(), 0);
    const auto ld = detail::spd_log_det(detail::subset_covariance(data, best));
    if (!ld) throw Error(ErrorCode::SingularSubset, "sample covariance is singular");
    best_log_det = *ld;
    if (trace) trace->determinants.push_back({*ld});
  } else {
    for (int s = 0; s < cfg.n_starts; ++s) {
      Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(s)));
      const IndexList order = random_order(n, rng);

      // Elemental (p + 1)-subset, grown until its covariance is invertible.
      IndexList start(order.begin(), order.begin() + p + 1);
      Vector mean;
      Matrix cov = detail::subset_covariance(data, start, &mean);
      std::size_t next = static_cast<std::size_t>(p) + 1;
      while (!detail::spd_log_det(cov) && next < order.size()) {
        start.push_back(order[next++]);
        cov = detail::subset_covariance(data, start, &mean);
      }
      if (!detail::spd_log_det(cov)) continue;

      IndexList subset = closest_rows(data, mean, Eigen::LLT<Matrix>(cov), h);
      std::vector<double> log_dets;
      for (int step = 0; step < cfg.max_csteps; ++step) {
        cov = detail::subset_covariance(data, subset, &mean);
        const auto ld = detail::spd_log_det(cov);
        if (!ld) {
          throw Error(ErrorCode::SingularSubset,
                      "an h-subset has singular covariance (observations lie on a hyperplane)");
        }
        log_dets.push_back(*ld);
        IndexList next_subset = closest_rows(data, mean, Eigen::LLT<Matrix>(cov), h);
        if (next_subset == subset) break;
        subset = std::move(next_subset);
      }
      check_monotone(log_dets);
      if (trace) trace->determinants.push_back(log_dets);
      if (log_dets.back() < best_log_det) {
        best_log_det = log_dets.back();
        best = subset;
      }
    }
    if (best.empty()) throw Error(ErrorCode::SingularSubset, "no start produced an invertible subset");
  }

  RobustClassSummary out;
  Matrix cov = detail::subset_covariance(data, best, &out.mean);
  out.scatter = c0 * cov;
  out.untrimmed = best;
  out.method = RobustMethod::MCD;
  out.determinant = std::exp(best_log_det);
  out.consistency = c0;
  return out;
}

Matrix mrcd_default_target(const Matrix& data) {
  const Vector mu = data.colwise().mean().transpose();
  const double denom = std::max<double>(1.0, static_cast<double>(data.rows()) - 1.0);
  Vector var = ((data.rowwise() - mu.transpose()).array().square().colwise().sum() / denom).transpose();
  double positive_sum = 0.0;
  int positive = 0;
  for (Eigen::Index k = 0; k < var.size(); ++k) {
    if (var[k] > 0.0) {
      positive_sum += var[k];
      ++positive;
    }
  }
  const double fill = positive > 0 ? positive_sum / positive : 1.0;
  for (Eigen::Index k = 0; k < var.size(); ++k) {
    if (!(var[k] > 0.0)) var[k] = fill;
  }
  return var.asDiagonal();
}

namespace {

struct MrcdProblem {
  const Matrix& data;
  const Matrix& target;
  double c0;
  int h;

  Matrix regularized(const IndexList& subset, double rho, Vector* mean) const {
    const Matrix s = detail::subset_covariance(data, subset, mean);
    Matrix k = rho * target + (1.0 - rho) * c0 * s;
    return 0.5 * (k + k.transpose());
  }

  double pick_rho(const IndexList& subset, double max_condition) const {
    const Matrix s = detail::subset_covariance(data, subset);
    for (int g = 1; g <= 100; ++g) {
      const double rho = g / 100.0;
      const Matrix k = rho * target + (1.0 - rho) * c0 * s;
      if (detail::condition_number(k) <= max_condition) return rho;
    }
    return 1.0;
  }

  /// C-steps from `subset` under a fixed rho; returns the final log-determinant.
  double concentrate(IndexList& subset, double rho, int max_steps, std::vector<double>* log_dets) const {
    double last = std::numeric_limits<double>::infinity();
    std::vector<double> local;
    for (int step = 0; step < max_steps; ++step) {
      Vector mean;
      const Matrix k = regularized(subset, rho, &mean);
      Eigen::LLT<Matrix> chol(k);
      if (chol.info() != Eigen::Success) {
        throw Error(ErrorCode::NotPositiveDefinite, "regularized scatter is not positive definite");
      }
      last = 2.0 * Matrix(chol.matrixL()).diagonal().array().log().sum();
      local.push_back(last);
      IndexList next = closest_rows(data, mean, chol, h);
      if (next == subset) break;
      subset = std::move(next);
    }
    check_monotone(local);
    if (log_dets) *log_dets = std::move(local);
    return last;
  }
};

}  // namespace

RobustClassSummary mrcd(const Matrix& data, const McdConfig& cfg, const Matrix& target) {
  require_finite(data);
  const int n = static_cast<int>(data.rows());
  const int p = static_cast<int>(data.cols());
  if (n < 2) throw Error(ErrorCode::InsufficientRows, "MRCD needs at least two rows");
  if (target.rows() != p || target.cols() != p) {
    throw Error(ErrorCode::DimensionMismatch, "MRCD target must be p x p");
  }
  if (Eigen::LLT<Matrix>(target).info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "MRCD target is not positive definite");
  }
  if (all_rows_identical(data)) throw Error(ErrorCode::DegenerateData, "all rows are identical");
  const int h = std::max(2, subset_size(cfg.eta, n));
  if (cfg.mrcd_rho && (!(*cfg.mrcd_rho > 0.0) || *cfg.mrcd_rho > 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "MRCD rho must lie in (0, 1]");
  }
  const MrcdProblem problem{data, target, consistency_factor(cfg.eta, p), h};

  // Deterministic start: the h rows closest to the coordinatewise median in
  // the target metric. It also fixes rho when no override is given.
  Vector median(p);
  for (int k = 0; k < p; ++k) {
    std::vector<double> col(data.col(k).data(), data.col(k).data() + n);
    auto mid = col.begin() + n / 2;
    std::nth_element(col.begin(), mid, col.end());
    median[k] = *mid;
  }
  IndexList initial = closest_rows(data, median, Eigen::LLT<Matrix>(target), h);
  double rho = cfg.mrcd_rho ? *cfg.mrcd_rho : problem.pick_rho(initial, cfg.max_condition);

  IndexList best;
  double best_log_det = std::numeric_limits<double>::infinity();
  auto consider = [&](IndexList subset) {
    const double ld = problem.concentrate(subset, rho, cfg.max_csteps, nullptr);
    if (ld < best_log_det) {
      best_log_det = ld;
      best = std::move(subset);
    }
  };
  consider(initial);
  if (h < n) {
    for (int s = 0; s < cfg.n_starts; ++s) {
      Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(s)));
      IndexList start = random_order(n, rng);
      start.resize(static_cast<std::size_t>(h));
      std::sort(start.begin(), start.end());
      consider(std::move(start));
    }
  }

  // Raise rho when the winning subset is worse conditioned than the start.
  for (int round = 0; round < 10 && !cfg.mrcd_rho; ++round) {
    if (detail::condition_number(problem.regularized(best, rho, nullptr)) <= cfg.max_condition) break;
    const double raised = problem.pick_rho(best, cfg.max_condition);
    if (raised <= rho) break;
    rho = raised;
    best_log_det = problem.concentrate(best, rho, cfg.max_csteps, nullptr);
  }

  RobustClassSummary out;
  out.scatter = problem.regularized(best, rho, &out.mean);
  out.untrimmed = best;
  out.method = RobustMethod::MRCD;
  out.determinant = std::exp(best_log_det);
  out.rho = rho;
  out.consistency = problem.c0;
  return out;
}

std::vector<RobustClassSummary> extract_class_priors(const LabeledDataset& train, const McdConfig& cfg) {
  train.validate();
  const int classes = train.n_classes();
  const int p = train.dim();
  std::vector<RobustClassSummary> out;
  out.reserve(static_cast<std::size_t>(classes));
  for (int j = 1; j <= classes; ++j) {
    const IndexList rows = train.class_rows(j);
    const Matrix x = gather_rows(train.data, rows);
    McdConfig local = cfg;
    local.eta = cfg.eta_for(j);
    local.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(j));
    RobustClassSummary summary;
    try {
      const int h = subset_size(local.eta, static_cast<int>(rows.size()));
      if (h <= p) {
        summary = mrcd(x, local, mrcd_default_target(x));
      } else {
        try {
          summary = fast_mcd(x, local);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::SingularSubset) throw;
          summary = mrcd(x, local, mrcd_default_target(x));
        }
      }
    } catch (const Error& e) {
      throw e.with_class(j);
    }
    for (int& idx : summary.untrimmed) idx = rows[static_cast<std::size_t>(idx)];
    out.push_back(std::move(summary));
  }
  return out;
}

}  // namespace brand
