#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ivmkit/dataset.hpp"
#include "ivmkit/kernel.hpp"
#include "ivmkit/klr.hpp"

namespace ivmkit {

/// Candidate selection strategy for the greedy scan. Exact refits every
/// candidate subproblem to convergence; OneStep takes a single damped Newton
/// update from the warm start, which is far cheaper and ranks candidates
/// almost identically.
enum class IvmSelection { Exact, OneStep };

struct IvmConfig {
  KernelSpec kernel;
  double lambda = 0.0067;
  double conv_tol = 1e-4;   // relative lagged objective change
  int conv_lag = 1;
  int max_import = 50;
  IvmSelection selection = IvmSelection::OneStep;
  double fit_tol = 1e-8;    // subproblem Newton tolerance (Exact mode)
  int fit_max_iter = 100;
  int threads = 0;          // 0 = hardware default

  void validate(int n) const;
};

/// Sparse kernel logistic classifier over the greedily chosen import set.
struct IvmModel {
  KernelSpec kernel;
  double lambda = 0.0;
  std::vector<int> import_indices;  // training indices, in selection order
  Eigen::MatrixXd import_points;    // |S| x d
  Eigen::VectorXd coeffs;           // length |S|
  std::vector<double> history;      // objective after each greedy addition

  KernelExpansion expansion() const { return {kernel, import_points, coeffs}; }
};

struct CandidateFit {
  double objective = 0.0;
  Eigen::VectorXd coeffs;  // length |S| + 1, candidate coefficient last
};

/// Objective of the subproblem restricted to basis S + {candidate}. The
/// regressor spans all N training rows; only the basis is restricted. The
/// warm start (length |S|) is padded with a zero for the new column.
CandidateFit candidate_objective(const Dataset& data, const std::vector<int>& import_set,
                                 int candidate, const IvmConfig& config,
                                 const Eigen::VectorXd* warm_start = nullptr);

struct GreedyChoice {
  int chosen = -1;
  double objective = 0.0;
  Eigen::VectorXd coeffs;
};

/// Evaluates every candidate in `remaining` and returns the argmin of the
/// subproblem objective; ties break toward the lowest training index.
GreedyChoice greedy_step(const Dataset& data, const std::vector<int>& import_set,
                         const std::vector<int>& remaining, const IvmConfig& config,
                         const Eigen::VectorXd* warm_start = nullptr);

/// Grows the import set one point at a time until the objective trace
/// converges (relative lagged test) or max_import is reached, then returns
/// the model at the best recorded objective.
IvmModel fit_ivm(const Dataset& data, const IvmConfig& config);

double predict_ivm(const IvmModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd predict_ivm(const IvmModel& model, const Eigen::MatrixXd& X);

}  // namespace ivmkit
