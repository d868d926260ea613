#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ivmkit/kernel.hpp"
#include "ivmkit/traffic.hpp"

namespace ivmkit {

/// One manifest drives the whole pipeline; every stochastic component draws
/// from a child stream of `seed`, so a (config, seed) pair pins every output
/// byte except wall-clock timings.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";
  bool standardize = true;
  int threads = 0;

  // data source: a case-control CSV, or the synthetic generator when empty
  std::filesystem::path data_csv;
  SyntheticSpec synthetic = SyntheticSpec::defaults();

  // feature selection
  int ntree = 400;
  int mtry = 2;
  int k_features = 4;
  double corr_threshold = 0.8;
  std::vector<std::string> features;  // explicit model inputs; bypasses selection

  // split
  double train_fraction = 0.7;

  // ivm grid
  KernelFamily ivm_kernel = KernelFamily::Radial;
  std::vector<double> ivm_widths;  // gamma values (config may give sigmas)
  std::vector<double> ivm_lambdas;
  double ivm_conv_tol = 1e-4;
  int ivm_conv_lag = 1;
  int ivm_max_import = 40;
  std::string ivm_mode = "auto";  // auto | exact | onestep
  double validation_fraction = 0.25;

  // svm grid
  std::vector<KernelFamily> svm_kernels = {KernelFamily::Radial, KernelFamily::Linear};
  std::vector<double> svm_gammas = {0.1, 0.5, 1.0};
  std::vector<double> svm_costs = {0.1, 1.0, 10.0};
  int svm_folds = 5;

  // evaluation
  std::vector<double> fpr_targets = {0.101, 0.200, 0.301};

  void validate() const;
};

ExperimentConfig default_config();
ExperimentConfig load_config(const std::filesystem::path& path);

/// Generates the synthetic dataset and writes dataset.csv plus the
/// ground-truth effect record.
void cmd_simulate(const ExperimentConfig& config);

/// Ranks all features by permutation importance and writes importance.csv
/// and selected_features.txt.
void cmd_select(const ExperimentConfig& config);

/// Splits train/test by stratum, fits the requested models over their
/// parameter grids, and writes the serialized models plus a training report.
/// `kind` is "ivm", "svm" or "both".
void cmd_train(const ExperimentConfig& config, const std::string& kind);

/// Scores the test split with every trained model and writes the performance
/// report and ROC artifacts.
void cmd_evaluate(const ExperimentConfig& config);

/// simulate + select + train both + evaluate in one deterministic run.
void cmd_reproduce(const ExperimentConfig& config);

}  // namespace ivmkit
