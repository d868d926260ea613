#include "ivmkit/klr.hpp"

#include <algorithm>

namespace ivmkit {

namespace {

constexpr double kProbClamp = 1e-10;   // keeps W and W^-1 finite
constexpr double kPredClamp = 1e-15;   // keeps emitted probabilities in (0, 1)
constexpr int kMaxHalvings = 30;

double clamp_prob(double p, double eps) {
  return std::min(std::max(p, eps), 1.0 - eps);
}

}  // namespace

void KlrProblem::validate() const {
  if (regressor.cols() != regularizer.rows() ||
      regularizer.rows() != regularizer.cols()) {
    throw DimensionError("regularizer must be square with the regressor's column count",
                         regressor.cols(), regularizer.rows());
  }
  if (labels.size() != regressor.rows()) {
    throw DimensionError("label count must match regressor rows", regressor.rows(),
                         labels.size());
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidInputError("lambda must be positive and finite");
  }
  for (long i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) {
      throw InvalidInputError("labels must be exactly 0 or 1");
    }
  }
}

double nll_objective(const KlrProblem& problem, const Eigen::VectorXd& a) {
  if (a.size() != problem.regressor.cols()) {
    throw DimensionError("coefficient length mismatch", problem.regressor.cols(),
                         a.size());
  }
  if (!a.allFinite()) {
    throw InvalidInputError("coefficients must be finite");
  }
  const Eigen::VectorXd f = problem.regressor * a;
  double h = 0.0;
  for (long i = 0; i < f.size(); ++i) {
    h += softplus(f[i]) - problem.labels[i] * f[i];
  }
  h += 0.5 * problem.lambda * a.dot(problem.regularizer * a);
  return h;
}

Eigen::VectorXd klr_gradient(const KlrProblem& problem, const Eigen::VectorXd& a) {
  const Eigen::VectorXd f = problem.regressor * a;
  Eigen::VectorXd p(f.size());
  for (long i = 0; i < f.size(); ++i) p[i] = sigmoid(f[i]);
  return -problem.regressor.transpose() * (problem.labels - p) +
         problem.lambda * (problem.regularizer * a);
}

Eigen::VectorXd newton_step(const KlrProblem& problem, const Eigen::VectorXd& a_prev) {
  if (a_prev.size() != problem.regressor.cols()) {
    throw DimensionError("coefficient length mismatch", problem.regressor.cols(),
                         a_prev.size());
  }
  const long n = problem.regressor.rows();
  const long q = problem.regressor.cols();

  const Eigen::VectorXd f = problem.regressor * a_prev;
  Eigen::VectorXd w(n), wz(n);
  for (long i = 0; i < n; ++i) {
    const double p = clamp_prob(sigmoid(f[i]), kProbClamp);
    const double wi = p * (1.0 - p);
    w[i] = wi;
    // w * z = w * (f + (y - p)/w) = w*f + (y - p)
    wz[i] = wi * f[i] + (problem.labels[i] - p);
  }

  Eigen::MatrixXd system = problem.regressor.transpose() * w.asDiagonal() * problem.regressor;
  system.noalias() += problem.lambda * problem.regularizer;
  const Eigen::VectorXd rhs = problem.regressor.transpose() * wz;

  const double trace = system.trace();
  const double base = trace > 0.0 ? trace / static_cast<double>(q) : 1.0;
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd regularized = system;
    if (jitter > 0.0) {
      regularized.diagonal().array() += jitter;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(regularized);
    if (ldlt.info() == Eigen::Success) {
      Eigen::VectorXd a = ldlt.solve(rhs);
      if (a.allFinite()) {
        return a;
      }
    }
    if (jitter == 0.0) {
      jitter = 1e-10 * base;
    } else if (jitter < 1e-4 * base) {
      jitter = std::min(jitter * 10.0, 1e-4 * base);
    } else {
      throw ConvergenceError("Newton system singular even with diagonal jitter");
    }
  }
}

KlrSolution fit_klr(const KlrProblem& problem, double tol, int max_iter,
                    const Eigen::VectorXd* init) {
  problem.validate();
  if (!(tol > 0.0)) throw InvalidInputError("tol must be positive");
  if (max_iter < 1) throw InvalidInputError("max_iter must be >= 1");

  KlrSolution sol;
  Eigen::VectorXd a = init ? *init : Eigen::VectorXd::Zero(problem.q());
  if (a.size() != problem.q()) {
    throw DimensionError("initial coefficient length mismatch", problem.q(), a.size());
  }
  double h = nll_objective(problem, a);
  sol.objective_trace.push_back(h);

  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd target = newton_step(problem, a);
    const Eigen::VectorXd delta = target - a;

    // Backtracking: pure Newton can overshoot at small lambda.
    double step = 1.0;
    double h_new = h;
    Eigen::VectorXd a_new = a;
    for (int halving = 0; halving <= kMaxHalvings; ++halving) {
      const Eigen::VectorXd cand = a + step * delta;
      const double h_cand = nll_objective(problem, cand);
      if (h_cand <= h) {
        a_new = cand;
        h_new = h_cand;
        break;
      }
      step *= 0.5;
    }

    const double prev = h;
    a = a_new;
    h = h_new;
    sol.iterations = it;
    sol.objective_trace.push_back(h);
    if (std::abs(h - prev) <= tol * (1.0 + std::abs(h))) {
      sol.converged = true;
      break;
    }
  }

  sol.coeffs = std::move(a);
  sol.objective = h;
  return sol;
}

double KernelExpansion::decision(const Eigen::VectorXd& x) const {
  if (x.size() != basis.cols()) {
    throw DimensionError("query dimension mismatch", basis.cols(), x.size());
  }
  if (!x.allFinite()) {
    throw InvalidInputError("query point must be finite");
  }
  return gram_column(kernel, basis, x).dot(coeffs);
}

Eigen::VectorXd KernelExpansion::decision(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out(X.rows());
  for (long i = 0; i < X.rows(); ++i) out[i] = decision(Eigen::VectorXd(X.row(i)));
  return out;
}

double predict_prob(const KernelExpansion& model, const Eigen::VectorXd& x) {
  return clamp_prob(sigmoid(model.decision(x)), kPredClamp);
}

Eigen::VectorXd predict_prob(const KernelExpansion& model, const Eigen::MatrixXd& X) {
  Eigen::VectorXd out(X.rows());
  for (long i = 0; i < X.rows(); ++i) out[i] = predict_prob(model, Eigen::VectorXd(X.row(i)));
  return out;
}

}  // namespace ivmkit
