#include "ivmkit/kernel.hpp"

#include <cmath>

#include "ivmkit/parallel.hpp"

namespace ivmkit {

namespace {

// Squared distance accumulated term by term; the expanded dot-product form
// cancels catastrophically at small distances.
double squared_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
  double s = 0.0;
  for (long k = 0; k < x.size(); ++k) {
    const double d = x[k] - z[k];
    s += d * d;
  }
  return s;
}

double eval_unchecked(const KernelSpec& spec, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& z) {
  if (spec.family == KernelFamily::Linear) {
    return x.dot(z);
  }
  return std::exp(-spec.gamma * squared_distance(x, z));
}

}  // namespace

KernelSpec KernelSpec::radial_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidInputError("kernel sigma must be positive and finite");
  }
  return radial(1.0 / (2.0 * sigma * sigma));
}

void KernelSpec::validate() const {
  if (family == KernelFamily::Radial &&
      (!(gamma > 0.0) || !std::isfinite(gamma))) {
    throw InvalidInputError("radial kernel requires gamma > 0 and finite");
  }
}

const char* kernel_family_name(KernelFamily family) {
  return family == KernelFamily::Linear ? "linear" : "radial";
}

KernelFamily kernel_family_from_name(const std::string& name) {
  if (name == "linear") return KernelFamily::Linear;
  if (name == "radial" || name == "rbf") return KernelFamily::Radial;
  throw InvalidInputError("unknown kernel family: " + name);
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& z) {
  spec.validate();
  if (x.size() != z.size()) {
    throw DimensionError("kernel arguments differ in dimension", x.size(), z.size());
  }
  if (x.size() < 1) {
    throw InvalidInputError("kernel arguments must have dimension >= 1");
  }
  if (!x.allFinite() || !z.allFinite()) {
    throw InvalidInputError("kernel arguments must be finite");
  }
  return eval_unchecked(spec, x, z);
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& rows,
                     const Eigen::MatrixXd& cols, int threads) {
  spec.validate();
  if (rows.rows() == 0 || cols.rows() == 0) {
    throw InvalidInputError("gram requires non-empty observation sets");
  }
  if (rows.cols() != cols.cols()) {
    throw DimensionError("gram row/column sets differ in dimension", rows.cols(),
                         cols.cols());
  }
  if (!rows.allFinite() || !cols.allFinite()) {
    throw InvalidInputError("gram inputs must be finite");
  }
  const long n = rows.rows();
  const long m = cols.rows();
  Eigen::MatrixXd out(n, m);
  parallel_for(
      static_cast<std::size_t>(n),
      [&](std::size_t i) {
        const Eigen::VectorXd xi = rows.row(static_cast<long>(i));
        for (long j = 0; j < m; ++j) {
          out(static_cast<long>(i), j) = eval_unchecked(spec, xi, cols.row(j));
        }
      },
      static_cast<unsigned>(threads < 0 ? 0 : threads));
  return out;
}

Eigen::VectorXd gram_column(const KernelSpec& spec, const Eigen::MatrixXd& rows,
                            const Eigen::VectorXd& z) {
  Eigen::VectorXd out(rows.rows());
  for (long i = 0; i < rows.rows(); ++i) {
    out[i] = eval_unchecked(spec, rows.row(i), z);
  }
  return out;
}

}  // namespace ivmkit
