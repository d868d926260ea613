#include "ivmkit/ivm.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "ivmkit/parallel.hpp"

namespace ivmkit {

namespace {

constexpr int kMaxHalvings = 30;

// Subproblem for basis S + {candidate}: regressor columns are kernel columns
// of the basis over all N rows, regularizer is the basis self-Gram. The
// candidate's kernel column doubles as the source of the regularizer border
// because S is a subset of the training rows.
KlrProblem assemble_subproblem(const Dataset& data, const Eigen::MatrixXd& basis_cols,
                               const Eigen::MatrixXd& basis_gram,
                               const std::vector<int>& import_set, int candidate,
                               const Eigen::VectorXd& candidate_col, double lambda) {
  const long n = data.X.rows();
  const long q = static_cast<long>(import_set.size());

  KlrProblem problem;
  problem.regressor.resize(n, q + 1);
  if (q > 0) problem.regressor.leftCols(q) = basis_cols;
  problem.regressor.col(q) = candidate_col;

  problem.regularizer.resize(q + 1, q + 1);
  if (q > 0) {
    problem.regularizer.topLeftCorner(q, q) = basis_gram;
    for (long j = 0; j < q; ++j) {
      const double k = candidate_col[import_set[static_cast<std::size_t>(j)]];
      problem.regularizer(j, q) = k;
      problem.regularizer(q, j) = k;
    }
  }
  problem.regularizer(q, q) = candidate_col[candidate];

  problem.labels = data.y.cast<double>();
  problem.lambda = lambda;
  return problem;
}

// Single damped Newton update; never returns an objective above the start.
CandidateFit one_step_fit(const KlrProblem& problem, const Eigen::VectorXd& start) {
  const double h0 = nll_objective(problem, start);
  const Eigen::VectorXd target = newton_step(problem, start);
  const Eigen::VectorXd delta = target - start;
  double step = 1.0;
  for (int halving = 0; halving <= kMaxHalvings; ++halving) {
    const Eigen::VectorXd cand = start + step * delta;
    const double h = nll_objective(problem, cand);
    if (h <= h0) return {h, cand};
    step *= 0.5;
  }
  return {h0, start};
}

CandidateFit solve_subproblem(const KlrProblem& problem, const IvmConfig& config,
                              const Eigen::VectorXd& start) {
  if (config.selection == IvmSelection::OneStep) {
    return one_step_fit(problem, start);
  }
  KlrSolution sol = fit_klr(problem, config.fit_tol, config.fit_max_iter, &start);
  return {sol.objective, std::move(sol.coeffs)};
}

Eigen::VectorXd padded_warm_start(const Eigen::VectorXd* warm, long q) {
  Eigen::VectorXd start = Eigen::VectorXd::Zero(q + 1);
  if (warm != nullptr) {
    if (warm->size() != q) {
      throw DimensionError("warm start length must match import set size", q,
                           warm->size());
    }
    start.head(q) = *warm;
  }
  return start;
}

struct ScanResult {
  std::optional<CandidateFit> fit;
  std::string error;
};

// Evaluates every candidate and reduces to the argmin in index order.
GreedyChoice scan_candidates(const Dataset& data, const Eigen::MatrixXd& basis_cols,
                             const Eigen::MatrixXd& basis_gram,
                             const std::vector<int>& import_set,
                             const std::vector<int>& remaining, const IvmConfig& config,
                             const Eigen::VectorXd& start) {
  std::vector<ScanResult> results(remaining.size());
  parallel_for(
      remaining.size(),
      [&](std::size_t k) {
        const int candidate = remaining[k];
        try {
          const Eigen::VectorXd col =
              gram_column(config.kernel, data.X, data.X.row(candidate));
          const KlrProblem problem = assemble_subproblem(
              data, basis_cols, basis_gram, import_set, candidate, col, config.lambda);
          results[k].fit = solve_subproblem(problem, config, start);
        } catch (const Error& e) {
          results[k].error =
              "candidate " + std::to_string(candidate) + ": " + e.what();
        }
      },
      static_cast<unsigned>(config.threads < 0 ? 0 : config.threads));

  GreedyChoice best;
  std::vector<std::string> failures;
  for (std::size_t k = 0; k < remaining.size(); ++k) {
    if (!results[k].fit) {
      failures.push_back(results[k].error);
      continue;
    }
    const CandidateFit& fit = *results[k].fit;
    if (best.chosen < 0 || fit.objective < best.objective) {
      best.chosen = remaining[k];
      best.objective = fit.objective;
      best.coeffs = fit.coeffs;
    }
  }
  if (best.chosen < 0) {
    std::ostringstream msg;
    msg << "every candidate subproblem failed:";
    for (const auto& f : failures) msg << "\n  " << f;
    throw ConvergenceError(msg.str());
  }
  return best;
}

void check_import_set(const Dataset& data, const std::vector<int>& import_set) {
  std::vector<int> sorted = import_set;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] < 0 || sorted[i] >= data.n()) {
      throw InvalidInputError("import index out of range: " + std::to_string(sorted[i]));
    }
    if (i > 0 && sorted[i] == sorted[i - 1]) {
      throw InvalidInputError("duplicate import index: " + std::to_string(sorted[i]));
    }
  }
}

Eigen::MatrixXd basis_columns(const Dataset& data, const KernelSpec& kernel,
                              const std::vector<int>& import_set) {
  Eigen::MatrixXd cols(data.X.rows(), static_cast<long>(import_set.size()));
  for (std::size_t j = 0; j < import_set.size(); ++j) {
    cols.col(static_cast<long>(j)) =
        gram_column(kernel, data.X, data.X.row(import_set[j]));
  }
  return cols;
}

Eigen::MatrixXd basis_self_gram(const Eigen::MatrixXd& basis_cols,
                                const std::vector<int>& import_set) {
  const long q = static_cast<long>(import_set.size());
  Eigen::MatrixXd g(q, q);
  for (long i = 0; i < q; ++i) {
    for (long j = 0; j < q; ++j) {
      g(i, j) = basis_cols(import_set[static_cast<std::size_t>(i)], j);
    }
  }
  return g;
}

}  // namespace

void IvmConfig::validate(int n) const {
  kernel.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidInputError("ivm lambda must be positive and finite");
  }
  if (conv_tol < 0.0) throw InvalidInputError("conv_tol must be >= 0");
  if (conv_lag < 1) throw InvalidInputError("conv_lag must be >= 1");
  if (max_import < 1) throw InvalidInputError("max_import must be >= 1");
  if (n < 2) throw InvalidInputError("ivm requires at least two observations");
}

CandidateFit candidate_objective(const Dataset& data, const std::vector<int>& import_set,
                                 int candidate, const IvmConfig& config,
                                 const Eigen::VectorXd* warm_start) {
  data.validate();
  config.validate(data.n());
  check_import_set(data, import_set);
  if (candidate < 0 || candidate >= data.n()) {
    throw InvalidInputError("candidate index out of range: " + std::to_string(candidate));
  }
  if (std::find(import_set.begin(), import_set.end(), candidate) != import_set.end()) {
    throw InvalidInputError("candidate already in the import set: " +
                            std::to_string(candidate));
  }
  const Eigen::MatrixXd cols = basis_columns(data, config.kernel, import_set);
  const Eigen::MatrixXd basis_gram = basis_self_gram(cols, import_set);
  const Eigen::VectorXd start =
      padded_warm_start(warm_start, static_cast<long>(import_set.size()));
  try {
    const Eigen::VectorXd col =
        gram_column(config.kernel, data.X, data.X.row(candidate));
    const KlrProblem problem = assemble_subproblem(data, cols, basis_gram, import_set,
                                                   candidate, col, config.lambda);
    return solve_subproblem(problem, config, start);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError("candidate " + std::to_string(candidate) + ": " + e.what());
  }
}

GreedyChoice greedy_step(const Dataset& data, const std::vector<int>& import_set,
                         const std::vector<int>& remaining, const IvmConfig& config,
                         const Eigen::VectorXd* warm_start) {
  data.validate();
  config.validate(data.n());
  check_import_set(data, import_set);
  if (remaining.empty()) {
    throw InvalidInputError("greedy step requires a non-empty candidate set");
  }
  const Eigen::MatrixXd cols = basis_columns(data, config.kernel, import_set);
  const Eigen::MatrixXd basis_gram = basis_self_gram(cols, import_set);
  const Eigen::VectorXd start =
      padded_warm_start(warm_start, static_cast<long>(import_set.size()));
  return scan_candidates(data, cols, basis_gram, import_set, remaining, config, start);
}

IvmModel fit_ivm(const Dataset& data, const IvmConfig& config) {
  data.validate();
  config.validate(data.n());
  if (!data.has_both_classes()) {
    throw InvalidInputError("ivm requires both label values in the training set");
  }

  const int n = data.n();
  const int max_import = std::min(config.max_import, n);

  std::vector<int> import_set;
  std::vector<int> remaining(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) remaining[static_cast<std::size_t>(i)] = i;

  Eigen::MatrixXd basis_cols(n, 0);
  Eigen::MatrixXd basis_gram(0, 0);
  Eigen::VectorXd warm(0);

  std::vector<double> history;
  std::vector<Eigen::VectorXd> step_coeffs;

  while (static_cast<int>(import_set.size()) < max_import && !remaining.empty()) {
    const Eigen::VectorXd start = padded_warm_start(
        import_set.empty() ? nullptr : &warm, static_cast<long>(import_set.size()));
    const GreedyChoice choice = scan_candidates(data, basis_cols, basis_gram,
                                                import_set, remaining, config, start);

    // Grow the maintained basis by the chosen column.
    const long q = static_cast<long>(import_set.size());
    const Eigen::VectorXd col =
        gram_column(config.kernel, data.X, data.X.row(choice.chosen));
    basis_cols.conservativeResize(Eigen::NoChange, q + 1);
    basis_cols.col(q) = col;
    Eigen::MatrixXd grown(q + 1, q + 1);
    grown.topLeftCorner(q, q) = basis_gram;
    for (long j = 0; j < q; ++j) {
      const double k = col[import_set[static_cast<std::size_t>(j)]];
      grown(j, q) = k;
      grown(q, j) = k;
    }
    grown(q, q) = col[choice.chosen];
    basis_gram = std::move(grown);

    import_set.push_back(choice.chosen);
    remaining.erase(std::find(remaining.begin(), remaining.end(), choice.chosen));
    warm = choice.coeffs;
    history.push_back(choice.objective);
    step_coeffs.push_back(choice.coeffs);

    const int k = static_cast<int>(history.size());
    if (config.conv_tol > 0.0 && k > config.conv_lag) {
      const double h_now = history[static_cast<std::size_t>(k - 1)];
      const double h_lag = history[static_cast<std::size_t>(k - 1 - config.conv_lag)];
      const double rel = std::abs(h_now - h_lag) / std::max(std::abs(h_now), 1e-300);
      if (rel < config.conv_tol) break;
    }
  }

  // The damped updates make the trace non-increasing, so the best recorded
  // objective is normally the last; keep the explicit argmin anyway.
  std::size_t best = 0;
  for (std::size_t k = 1; k < history.size(); ++k) {
    if (history[k] < history[best]) best = k;
  }

  IvmModel model;
  model.kernel = config.kernel;
  model.lambda = config.lambda;
  model.import_indices.assign(import_set.begin(),
                              import_set.begin() + static_cast<long>(best) + 1);
  model.import_points.resize(static_cast<long>(best) + 1, data.X.cols());
  for (std::size_t j = 0; j <= best; ++j) {
    model.import_points.row(static_cast<long>(j)) = data.X.row(import_set[j]);
  }
  model.coeffs = step_coeffs[best];
  model.history.assign(history.begin(), history.begin() + static_cast<long>(best) + 1);
  return model;
}

double predict_ivm(const IvmModel& model, const Eigen::VectorXd& x) {
  if (model.coeffs.size() < 1) {
    throw InvalidInputError("ivm model has an empty import set");
  }
  return predict_prob(model.expansion(), x);
}

Eigen::VectorXd predict_ivm(const IvmModel& model, const Eigen::MatrixXd& X) {
  if (model.coeffs.size() < 1) {
    throw InvalidInputError("ivm model has an empty import set");
  }
  return predict_prob(model.expansion(), X);
}

}  // namespace ivmkit
