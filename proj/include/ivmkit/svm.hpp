#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ivmkit/dataset.hpp"
#include "ivmkit/kernel.hpp"

namespace ivmkit {

struct SvmConfig {
  KernelSpec kernel;
  double cost = 1.0;      // box constraint C; relates to the penalty weight as C = 1/(2 N lambda)
  double smo_tol = 1e-3;  // KKT violation tolerance
  int max_passes = 0;     // sweep budget; 0 means 10 * N sweeps of N updates each

  void validate() const;
};

/// Soft-margin SVM with decision f(x) = b + sum_j dual_coeffs[j] K(x, sv_j),
/// classified by sign. dual_coeffs[j] = y_j * alpha_j; only alpha > 0 is kept.
struct SvmModel {
  KernelSpec kernel;
  double bias = 0.0;
  bool converged = true;
  std::vector<int> support_indices;  // into the training set
  Eigen::MatrixXd support_points;    // n_sv x d
  Eigen::VectorXd dual_coeffs;       // length n_sv
};

/// Fits by sequential minimal optimization on the dual. Labels arrive in
/// {0, 1} and are mapped to {-1, +1} at the boundary (0 -> -1). Pair
/// selection is the maximal-violation rule: the first index maximizes the
/// KKT violation, the second maximizes |E_i - E_j| among feasible partners.
SvmModel fit_svm(const Dataset& data, const SvmConfig& config);

double decision_value(const SvmModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd decision_value(const SvmModel& model, const Eigen::MatrixXd& X);

/// Largest KKT violation of the fitted model over the training set; used by
/// tests and reported alongside grid-search results.
double max_kkt_violation(const SvmModel& model, const Dataset& data, double cost);

struct GridCell {
  KernelFamily family;
  double gamma;
  double cost;
  double cv_error;
};

struct GridSearchResult {
  SvmConfig best;
  double best_cv_error = 1.0;
  std::vector<GridCell> table;
};

/// Stratified k-fold cross-validated misclassification error over the full
/// kernel x gamma x cost grid; ties resolve to the earliest grid cell.
GridSearchResult grid_search(const Dataset& data, const std::vector<KernelFamily>& kernels,
                             const std::vector<double>& gammas,
                             const std::vector<double>& costs, int folds,
                             std::uint64_t seed, int threads = 0);

/// The gamma and cost grids used for the expressway experiment.
std::vector<double> default_svm_gammas();
std::vector<double> default_svm_costs();

}  // namespace ivmkit
