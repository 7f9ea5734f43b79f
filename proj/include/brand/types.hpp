#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace brand {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IndexList = std::vector<int>;

/// Row-major integer trace (iterations x units) for latent allocations.
class IntTrace {
 public:
  IntTrace() = default;
  IntTrace(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0) {}

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::int32_t& operator()(int i, int m) { return data_[static_cast<std::size_t>(i) * cols_ + m]; }
  std::int32_t operator()(int i, int m) const { return data_[static_cast<std::size_t>(i) * cols_ + m]; }

  const std::int32_t* row(int i) const { return data_.data() + static_cast<std::size_t>(i) * cols_; }
  std::int32_t* row(int i) { return data_.data() + static_cast<std::size_t>(i) * cols_; }

  const std::vector<std::int32_t>& data() const noexcept { return data_; }
  std::vector<std::int32_t>& data() noexcept { return data_; }

  bool operator==(const IntTrace&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::int32_t> data_;
};

}  // namespace brand
