#include "ivmkit/dataset.hpp"

namespace ivmkit {

void Dataset::validate() const {
  if (X.rows() != y.size()) {
    throw DimensionError("label count does not match row count", X.rows(), y.size());
  }
  if (!feature_names.empty() &&
      static_cast<long>(feature_names.size()) != X.cols()) {
    throw DimensionError("feature name count does not match column count",
                         X.cols(), static_cast<long>(feature_names.size()));
  }
  if (!X.allFinite()) {
    throw InvalidInputError("feature matrix contains non-finite values");
  }
  for (int i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) {
      throw InvalidInputError("labels must be 0 or 1, found " + std::to_string(y[i]) +
                              " at row " + std::to_string(i));
    }
  }
}

bool Dataset::has_both_classes() const {
  bool saw0 = false, saw1 = false;
  for (int i = 0; i < y.size(); ++i) {
    (y[i] == 0 ? saw0 : saw1) = true;
  }
  return saw0 && saw1;
}

Dataset Dataset::select_rows(const std::vector<int>& rows) const {
  Dataset out;
  out.X.resize(static_cast<long>(rows.size()), X.cols());
  out.y.resize(static_cast<long>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<long>(i)) = X.row(rows[i]);
    out.y[static_cast<long>(i)] = y[rows[i]];
  }
  out.feature_names = feature_names;
  return out;
}

Dataset Dataset::select_columns(const std::vector<int>& cols) const {
  Dataset out;
  out.X.resize(X.rows(), static_cast<long>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.X.col(static_cast<long>(j)) = X.col(cols[j]);
    if (!feature_names.empty()) {
      out.feature_names.push_back(feature_names[static_cast<std::size_t>(cols[j])]);
    }
  }
  out.y = y;
  return out;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  Standardizer s;
  const long n = X.rows();
  s.mean = X.colwise().mean();
  s.scale.resize(X.cols());
  for (long j = 0; j < X.cols(); ++j) {
    double ss = 0.0;
    for (long i = 0; i < n; ++i) {
      const double d = X(i, j) - s.mean[j];
      ss += d * d;
    }
    const double var = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
    const double sd = std::sqrt(var);
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& X) const {
  if (X.cols() != mean.size()) {
    throw DimensionError("standardizer dimension mismatch", mean.size(), X.cols());
  }
  return (X.rowwise() - mean.transpose()).array().rowwise() /
         scale.transpose().array();
}

Eigen::VectorXd Standardizer::transform(const Eigen::VectorXd& x) const {
  if (x.size() != mean.size()) {
    throw DimensionError("standardizer dimension mismatch", mean.size(), x.size());
  }
  return (x - mean).cwiseQuotient(scale);
}

}  // namespace ivmkit
