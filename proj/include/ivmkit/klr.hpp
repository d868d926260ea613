#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "ivmkit/errors.hpp"
#include "ivmkit/kernel.hpp"

namespace ivmkit {

/// Numerically stable log(1 + exp(f)); safe for |f| well beyond 1e3.
inline double softplus(double f) {
  if (f > 0.0) return f + std::log1p(std::exp(-f));
  return std::log1p(std::exp(f));
}

/// Logistic function, evaluated without overflow for any finite f.
inline double sigmoid(double f) {
  if (f >= 0.0) return 1.0 / (1.0 + std::exp(-f));
  const double e = std::exp(f);
  return e / (1.0 + e);
}

/// Regularized kernel logistic regression problem
///   H(a) = -y' (K a) + 1' log(1 + exp(K a)) + (lambda/2) a' Q a
/// with regressor K (N x q) and regularizer Q (q x q).
struct KlrProblem {
  Eigen::MatrixXd regressor;    // K_a, N x q
  Eigen::MatrixXd regularizer;  // K_q, q x q
  Eigen::VectorXd labels;       // length N, entries in {0, 1}
  double lambda = 1.0;

  int n() const { return static_cast<int>(regressor.rows()); }
  int q() const { return static_cast<int>(regressor.cols()); }
  void validate() const;
};

struct KlrSolution {
  Eigen::VectorXd coeffs;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // H after each Newton iteration
};

double nll_objective(const KlrProblem& problem, const Eigen::VectorXd& a);

/// Closed-form gradient -K'(y - p) + lambda Q a.
Eigen::VectorXd klr_gradient(const KlrProblem& problem, const Eigen::VectorXd& a);

/// One weighted-least-squares Newton update from a_prev. Solves the symmetric
/// system (K' W K + lambda Q) a = K' W z without forming an inverse; a
/// singular system gets escalating diagonal jitter before failing.
Eigen::VectorXd newton_step(const KlrProblem& problem, const Eigen::VectorXd& a_prev);

/// Damped Newton iteration from a = 0 (or `init`), halving the step until the
/// objective decreases. Stops when |H_k - H_{k-1}| <= tol * (1 + |H_k|).
KlrSolution fit_klr(const KlrProblem& problem, double tol = 1e-8, int max_iter = 100,
                    const Eigen::VectorXd* init = nullptr);

/// A fitted kernel expansion f(x) = sum_j coeffs[j] K(x, basis[j]); there is
/// no intercept term.
struct KernelExpansion {
  KernelSpec kernel;
  Eigen::MatrixXd basis;   // q x d
  Eigen::VectorXd coeffs;  // length q

  double decision(const Eigen::VectorXd& x) const;
  Eigen::VectorXd decision(const Eigen::MatrixXd& X) const;
};

/// Class-1 probability 1 / (1 + exp(-f(x))), strictly inside (0, 1).
double predict_prob(const KernelExpansion& model, const Eigen::VectorXd& x);
Eigen::VectorXd predict_prob(const KernelExpansion& model, const Eigen::MatrixXd& X);

}  // namespace ivmkit
