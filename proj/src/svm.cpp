#include "ivmkit/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ivmkit/parallel.hpp"
#include "ivmkit/rng.hpp"

namespace ivmkit {

namespace {

constexpr double kEtaFloor = 1e-12;

struct SmoState {
  Eigen::VectorXd alpha;
  Eigen::VectorXd f;  // decision values without bias
  Eigen::VectorXd y;  // +-1
  double cost;
};

bool in_up_set(const SmoState& s, long i) {
  return (s.y[i] > 0 && s.alpha[i] < s.cost) || (s.y[i] < 0 && s.alpha[i] > 0);
}

bool in_low_set(const SmoState& s, long i) {
  return (s.y[i] < 0 && s.alpha[i] < s.cost) || (s.y[i] > 0 && s.alpha[i] > 0);
}

// Maximal violating pair: i maximizes y_i - f_i over the "up" set, j
// minimizes it over the "low" set. The gap is the KKT violation.
struct Pair {
  long i = -1, j = -1;
  double gap = 0.0;
};

Pair select_pair(const SmoState& s) {
  Pair p;
  double up = -std::numeric_limits<double>::infinity();
  double low = std::numeric_limits<double>::infinity();
  for (long k = 0; k < s.alpha.size(); ++k) {
    const double v = s.y[k] - s.f[k];
    if (in_up_set(s, k) && v > up) {
      up = v;
      p.i = k;
    }
    if (in_low_set(s, k) && v < low) {
      low = v;
      p.j = k;
    }
  }
  p.gap = (p.i >= 0 && p.j >= 0) ? up - low : 0.0;
  return p;
}

// Analytic two-variable update. Endpoint assignments are exact (an alpha
// that hits the box lands on exactly 0 or C); dust-sized alphas would
// otherwise keep an index in the movable sets while the feasible interval
// collapses below rounding, stalling the pair selection forever.
void update_pair(SmoState& s, const Eigen::MatrixXd& K, long i, long j) {
  const double yi = s.y[i], yj = s.y[j];
  const double ai_old = s.alpha[i], aj_old = s.alpha[j];
  const double ei = s.f[i] - yi, ej = s.f[j] - yj;
  const double c = s.cost;

  double eta = K(i, i) + K(j, j) - 2.0 * K(i, j);
  if (eta < kEtaFloor) eta = kEtaFloor;
  const double aj_unc = aj_old + yj * (ei - ej) / eta;

  double ai, aj;
  if (yi != yj) {
    const double diff = ai_old - aj_old;  // ai - aj is invariant
    const bool lo_binds_i = diff < 0.0;   // alpha_i = 0 produces the lower endpoint
    const bool hi_binds_i = diff > 0.0;   // alpha_i = C produces the upper endpoint
    const double lo = lo_binds_i ? -diff : 0.0;
    const double hi = hi_binds_i ? c - diff : c;
    if (aj_unc <= lo) {
      aj = lo;
      ai = lo_binds_i ? 0.0 : diff;
    } else if (aj_unc >= hi) {
      aj = hi;
      ai = hi_binds_i ? c : diff + c;
    } else {
      aj = aj_unc;
      ai = diff + aj;
    }
  } else {
    const double sum = ai_old + aj_old;  // ai + aj is invariant
    const bool lo_binds_i = sum > c;     // alpha_i = C produces the lower endpoint
    const bool hi_binds_i = sum < c;     // alpha_i = 0 produces the upper endpoint
    const double lo = lo_binds_i ? sum - c : 0.0;
    const double hi = hi_binds_i ? sum : c;
    if (aj_unc <= lo) {
      aj = lo;
      ai = lo_binds_i ? c : sum;
    } else if (aj_unc >= hi) {
      aj = hi;
      ai = hi_binds_i ? 0.0 : sum - c;
    } else {
      aj = aj_unc;
      ai = sum - aj;
    }
  }

  s.alpha[i] = ai;
  s.alpha[j] = aj;
  const double di = (ai - ai_old) * yi;
  const double dj = (aj - aj_old) * yj;
  s.f += di * K.col(i) + dj * K.col(j);
}

double compute_bias(const SmoState& s) {
  double free_sum = 0.0;
  long free_count = 0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (long k = 0; k < s.alpha.size(); ++k) {
    const double v = s.y[k] - s.f[k];
    if (s.alpha[k] > 0.0 && s.alpha[k] < s.cost) {
      free_sum += v;
      ++free_count;
    } else {
      // Bound points constrain b to an interval.
      if (in_up_set(s, k)) lo = std::max(lo, v);
      if (in_low_set(s, k)) hi = std::min(hi, v);
    }
  }
  if (free_count > 0) return free_sum / static_cast<double>(free_count);
  if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
  if (std::isfinite(lo)) return lo;
  if (std::isfinite(hi)) return hi;
  return 0.0;
}

Eigen::VectorXd signed_labels(const Dataset& data) {
  Eigen::VectorXd y(data.y.size());
  for (long i = 0; i < data.y.size(); ++i) y[i] = data.y[i] == 1 ? 1.0 : -1.0;
  return y;
}

int misclassified_count(const SvmModel& model, const Dataset& data) {
  int errors = 0;
  for (int i = 0; i < data.n(); ++i) {
    const double f = decision_value(model, Eigen::VectorXd(data.X.row(i)));
    const int predicted = f >= 0.0 ? 1 : 0;  // sign rule; f == 0 counts positive
    if (predicted != data.y[i]) ++errors;
  }
  return errors;
}

// Round-robin fold assignment per class after a seeded shuffle.
std::vector<int> stratified_folds(const Dataset& data, int folds, std::uint64_t seed) {
  std::vector<int> pos, neg;
  for (int i = 0; i < data.n(); ++i) (data.y[i] == 1 ? pos : neg).push_back(i);
  Rng rng(seed);
  Rng pos_rng = rng.split(1);
  Rng neg_rng = rng.split(2);
  pos_rng.shuffle(pos);
  neg_rng.shuffle(neg);
  std::vector<int> assignment(static_cast<std::size_t>(data.n()), -1);
  for (std::size_t k = 0; k < pos.size(); ++k) {
    assignment[static_cast<std::size_t>(pos[k])] = static_cast<int>(k % folds);
  }
  for (std::size_t k = 0; k < neg.size(); ++k) {
    assignment[static_cast<std::size_t>(neg[k])] = static_cast<int>(k % folds);
  }
  return assignment;
}

}  // namespace

void SvmConfig::validate() const {
  kernel.validate();
  if (!(cost > 0.0) || !std::isfinite(cost)) {
    throw InvalidInputError("svm cost must be positive and finite");
  }
  if (!(smo_tol > 0.0)) throw InvalidInputError("smo_tol must be positive");
  if (max_passes < 0) throw InvalidInputError("max_passes must be >= 0");
}

SvmModel fit_svm(const Dataset& data, const SvmConfig& config) {
  data.validate();
  config.validate();
  if (!data.has_both_classes()) {
    throw InvalidInputError("svm requires both label values in the training set");
  }

  const long n = data.n();
  const Eigen::MatrixXd K = gram(config.kernel, data.X, data.X, 1);

  SmoState state;
  state.alpha = Eigen::VectorXd::Zero(n);
  state.f = Eigen::VectorXd::Zero(n);
  state.y = signed_labels(data);
  state.cost = config.cost;

  const long sweeps = config.max_passes > 0 ? config.max_passes : 10 * n;
  const long max_updates = sweeps * n;
  bool converged = false;
  for (long updates = 0; updates < max_updates; ++updates) {
    const Pair pair = select_pair(state);
    if (pair.i < 0 || pair.j < 0 || pair.gap < config.smo_tol) {
      converged = true;
      break;
    }
    update_pair(state, K, pair.i, pair.j);
  }

  SvmModel model;
  model.kernel = config.kernel;
  model.converged = converged;
  model.bias = compute_bias(state);
  for (long i = 0; i < n; ++i) {
    if (state.alpha[i] > 0.0) model.support_indices.push_back(static_cast<int>(i));
  }
  model.support_points.resize(static_cast<long>(model.support_indices.size()),
                              data.X.cols());
  model.dual_coeffs.resize(static_cast<long>(model.support_indices.size()));
  for (std::size_t k = 0; k < model.support_indices.size(); ++k) {
    const int i = model.support_indices[k];
    model.support_points.row(static_cast<long>(k)) = data.X.row(i);
    model.dual_coeffs[static_cast<long>(k)] = state.alpha[i] * state.y[i];
  }
  return model;
}

double decision_value(const SvmModel& model, const Eigen::VectorXd& x) {
  if (model.dual_coeffs.size() < 1) {
    throw InvalidInputError("svm model has an empty support set");
  }
  if (x.size() != model.support_points.cols()) {
    throw DimensionError("query dimension mismatch", model.support_points.cols(),
                         x.size());
  }
  return model.bias + gram_column(model.kernel, model.support_points, x).dot(model.dual_coeffs);
}

Eigen::VectorXd decision_value(const SvmModel& model, const Eigen::MatrixXd& X) {
  Eigen::VectorXd out(X.rows());
  for (long i = 0; i < X.rows(); ++i) {
    out[i] = decision_value(model, Eigen::VectorXd(X.row(i)));
  }
  return out;
}

double max_kkt_violation(const SvmModel& model, const Dataset& data, double cost) {
  // Reconstruct alpha per training index (0 when not a support vector).
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(data.n());
  for (std::size_t k = 0; k < model.support_indices.size(); ++k) {
    alpha[model.support_indices[k]] = std::abs(model.dual_coeffs[static_cast<long>(k)]);
  }
  const Eigen::VectorXd y = signed_labels(data);
  double worst = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const double margin =
        y[i] * decision_value(model, Eigen::VectorXd(data.X.row(i)));
    const double a = alpha[i];
    double violation = 0.0;
    if (a <= 0.0) {
      violation = std::max(0.0, 1.0 - margin);
    } else if (a >= cost) {
      violation = std::max(0.0, margin - 1.0);
    } else {
      violation = std::abs(margin - 1.0);
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

GridSearchResult grid_search(const Dataset& data, const std::vector<KernelFamily>& kernels,
                             const std::vector<double>& gammas,
                             const std::vector<double>& costs, int folds,
                             std::uint64_t seed, int threads) {
  data.validate();
  if (folds < 2) throw InvalidInputError("grid search requires folds >= 2");
  if (kernels.empty() || gammas.empty() || costs.empty()) {
    throw InvalidInputError("grid search requires non-empty parameter grids");
  }
  if (!data.has_both_classes()) {
    throw StratificationError("grid search requires both classes");
  }

  const std::vector<int> fold_of = stratified_folds(data, folds, seed);

  // Per-fold train/eval index lists, validated up front.
  std::vector<std::vector<int>> train_idx(static_cast<std::size_t>(folds));
  std::vector<std::vector<int>> eval_idx(static_cast<std::size_t>(folds));
  for (int i = 0; i < data.n(); ++i) {
    for (int f = 0; f < folds; ++f) {
      (fold_of[static_cast<std::size_t>(i)] == f ? eval_idx : train_idx)
          [static_cast<std::size_t>(f)].push_back(i);
    }
  }
  for (int f = 0; f < folds; ++f) {
    bool saw0 = false, saw1 = false;
    for (int i : train_idx[static_cast<std::size_t>(f)]) {
      (data.y[i] == 1 ? saw1 : saw0) = true;
    }
    if (!saw0 || !saw1) {
      throw StratificationError("fold " + std::to_string(f) +
                                " leaves a single-class training set");
    }
  }

  struct Task {
    std::size_t cell;
    int fold;
  };
  std::vector<GridCell> table;
  for (KernelFamily family : kernels) {
    for (double g : gammas) {
      for (double c : costs) {
        table.push_back({family, g, c, 0.0});
      }
    }
  }
  std::vector<Task> tasks;
  for (std::size_t cell = 0; cell < table.size(); ++cell) {
    for (int f = 0; f < folds; ++f) tasks.push_back({cell, f});
  }
  std::vector<int> errors(tasks.size(), 0);

  parallel_for(
      tasks.size(),
      [&](std::size_t t) {
        const Task& task = tasks[t];
        const GridCell& cell = table[task.cell];
        SvmConfig config;
        config.kernel = cell.family == KernelFamily::Radial
                            ? KernelSpec::radial(cell.gamma)
                            : KernelSpec::linear();
        config.cost = cell.cost;
        const Dataset train = data.select_rows(train_idx[static_cast<std::size_t>(task.fold)]);
        const Dataset eval = data.select_rows(eval_idx[static_cast<std::size_t>(task.fold)]);
        const SvmModel model = fit_svm(train, config);
        errors[t] = misclassified_count(model, eval);
      },
      static_cast<unsigned>(threads < 0 ? 0 : threads));

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    table[tasks[t].cell].cv_error += static_cast<double>(errors[t]);
  }
  for (GridCell& cell : table) {
    cell.cv_error /= static_cast<double>(data.n());
  }

  GridSearchResult result;
  result.table = table;
  std::size_t best = 0;
  for (std::size_t c = 1; c < table.size(); ++c) {
    if (table[c].cv_error < table[best].cv_error) best = c;
  }
  result.best_cv_error = table[best].cv_error;
  result.best.kernel = table[best].family == KernelFamily::Radial
                           ? KernelSpec::radial(table[best].gamma)
                           : KernelSpec::linear();
  result.best.cost = table[best].cost;
  return result;
}

std::vector<double> default_svm_gammas() {
  return {0.001, 0.01, 0.1, 0.5, 1, 2, 5, 10, 20, 50};
}

std::vector<double> default_svm_costs() {
  return {0.01, 0.1, 1, 10, 100};
}

}  // namespace ivmkit
