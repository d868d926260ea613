#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ivmkit/errors.hpp"

namespace ivmkit {

/// Feature matrix with binary labels; one observation per row.
struct Dataset {
  Eigen::MatrixXd X;                       // N x d
  Eigen::VectorXi y;                       // length N, values in {0, 1}
  std::vector<std::string> feature_names;  // size d, or empty

  int n() const { return static_cast<int>(X.rows()); }
  int dim() const { return static_cast<int>(X.cols()); }

  void validate() const;

  /// True when both label values occur at least once.
  bool has_both_classes() const;

  Dataset select_rows(const std::vector<int>& rows) const;
  Dataset select_columns(const std::vector<int>& cols) const;
};

/// Per-feature affine rescaling to zero mean / unit variance.
/// Zero-variance columns are left unscaled.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& X);
  Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd transform(const Eigen::VectorXd& x) const;
};

}  // namespace ivmkit
