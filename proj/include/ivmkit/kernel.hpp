#pragma once

#include <Eigen/Dense>

#include "ivmkit/errors.hpp"

namespace ivmkit {

enum class KernelFamily { Linear, Radial };

/// Kernel family plus width. The radial kernel is
///   K(x, z) = exp(-gamma * ||x - z||^2),
/// so a sigma-style width converts as gamma = 1 / (2 sigma^2).
struct KernelSpec {
  KernelFamily family = KernelFamily::Radial;
  double gamma = 1.0;  // ignored for Linear

  static KernelSpec linear() { return {KernelFamily::Linear, 0.0}; }
  static KernelSpec radial(double gamma) { return {KernelFamily::Radial, gamma}; }
  static KernelSpec radial_sigma(double sigma);

  void validate() const;
};

const char* kernel_family_name(KernelFamily family);
KernelFamily kernel_family_from_name(const std::string& name);

/// Single kernel evaluation. Inputs must be finite and of equal dimension.
double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& z);

/// Gram matrix with entry (i, j) = K(rows[i], cols[j]). Rows and columns must
/// be non-empty and share a dimension. A self-Gram (rows == cols) is symmetric
/// to machine precision and positive semi-definite for both families.
Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& rows,
                     const Eigen::MatrixXd& cols, int threads = 0);

/// Column of the Gram matrix: K(rows[i], z) for all i. No validation beyond
/// dimension; intended for inner loops over pre-validated data.
Eigen::VectorXd gram_column(const KernelSpec& spec, const Eigen::MatrixXd& rows,
                            const Eigen::VectorXd& z);

}  // namespace ivmkit
