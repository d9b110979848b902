#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace robcov {

/// n x p observation matrix: rows are time points, columns are variables.
/// Construction rejects empty or non-finite data; operations that need more
/// rows (e.g. pairwise statistics) check that themselves.
class ReturnsPanel {
 public:
  explicit ReturnsPanel(Eigen::MatrixXd data) : data_(std::move(data)) {
    if (data_.rows() < 1 || data_.cols() < 1) {
      throw std::invalid_argument("ReturnsPanel: empty panel (" + std::to_string(data_.rows()) +
                                  "x" + std::to_string(data_.cols()) + ")");
    }
    if (!data_.allFinite()) throw std::invalid_argument("ReturnsPanel: non-finite entries");
  }

  const Eigen::MatrixXd& data() const noexcept { return data_; }
  Eigen::Index n() const noexcept { return data_.rows(); }
  Eigen::Index p() const noexcept { return data_.cols(); }

 private:
  Eigen::MatrixXd data_;
};

}  // namespace robcov
