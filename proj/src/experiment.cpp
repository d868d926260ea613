#include "ivmkit/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "ivmkit/evaluation.hpp"
#include "ivmkit/forest.hpp"
#include "ivmkit/io_util.hpp"
#include "ivmkit/ivm.hpp"
#include "ivmkit/model_io.hpp"
#include "ivmkit/svm.hpp"

namespace ivmkit {

namespace {

using nlohmann::json;

// Child seed streams; every stochastic stage gets its own.
constexpr std::uint64_t kStreamSynthetic = 11;
constexpr std::uint64_t kStreamForest = 12;
constexpr std::uint64_t kStreamImportance = 13;
constexpr std::uint64_t kStreamSplit = 14;
constexpr std::uint64_t kStreamSvmFolds = 15;
constexpr std::uint64_t kStreamValidation = 16;

std::uint64_t child_seed(std::uint64_t seed, std::uint64_t stream) {
  return Rng(seed).split(stream).next_u64();
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

CaseControlDataset obtain_dataset(const ExperimentConfig& config,
                                  SyntheticTruth* truth = nullptr) {
  if (!config.data_csv.empty()) {
    if (!std::filesystem::exists(config.data_csv)) {
      throw ConfigError("data csv does not exist: " + config.data_csv.string());
    }
    return load_case_control_csv(config.data_csv);
  }
  return generate_synthetic(config.synthetic,
                            child_seed(config.seed, kStreamSynthetic), truth);
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

std::vector<int> labels_of(const Dataset& data) {
  return {data.y.data(), data.y.data() + data.y.size()};
}

struct Selection {
  std::vector<int> indices;
  ImportanceResult importance;
  bool shortfall = false;
};

Selection run_selection(const ExperimentConfig& config, const Dataset& full) {
  ForestConfig fc;
  fc.ntree = config.ntree;
  fc.mtry = config.mtry;
  fc.seed = child_seed(config.seed, kStreamForest);
  fc.threads = config.threads;
  const Forest forest = fit_forest(full, fc);
  Selection sel;
  sel.importance =
      permutation_importance(forest, full, child_seed(config.seed, kStreamImportance));
  const Eigen::MatrixXd corr = pearson_correlation(full.X);
  sel.indices = select_features(sel.importance.vi, corr, config.k_features,
                                config.corr_threshold, &sel.shortfall);
  return sel;
}

std::vector<int> resolve_feature_indices(const ExperimentConfig& config,
                                         const Dataset& full) {
  if (!config.features.empty()) {
    std::vector<int> out;
    for (const std::string& name : config.features) {
      const auto it =
          std::find(full.feature_names.begin(), full.feature_names.end(), name);
      if (it == full.feature_names.end()) {
        throw ConfigError("configured feature not in dataset: " + name);
      }
      out.push_back(static_cast<int>(it - full.feature_names.begin()));
    }
    return out;
  }
  return run_selection(config, full).indices;
}

std::optional<Standardizer> maybe_scaler(const ExperimentConfig& config,
                                         const Eigen::MatrixXd& X) {
  if (!config.standardize) return std::nullopt;
  return Standardizer::fit(X);
}

Dataset scaled(const Dataset& data, const std::optional<Standardizer>& scaler) {
  if (!scaler) return data;
  Dataset out = data;
  out.X = scaler->transform(data.X);
  return out;
}

std::string model_display_name(const SavedModel& model) {
  if (model.kind == "ivm") return "IVM";
  const KernelFamily family = model.svm ? model.svm->kernel.family : KernelFamily::Radial;
  return std::string("SVM-") + kernel_family_name(family);
}

IvmSelection resolve_mode(const std::string& mode, int n) {
  if (mode == "exact") return IvmSelection::Exact;
  if (mode == "onestep") return IvmSelection::OneStep;
  if (mode == "auto") return n <= 200 ? IvmSelection::Exact : IvmSelection::OneStep;
  throw ConfigError("ivm mode must be auto, exact or onestep: " + mode);
}

struct TrainedEntry {
  std::string file;
  json report;
};

TrainedEntry train_ivm_model(const ExperimentConfig& config,
                             const CaseControlDataset& train_cc,
                             const std::vector<int>& feature_idx,
                             const std::vector<std::string>& feature_names) {
  const double t0 = now_seconds();

  // Inner stratified validation split used only to pick the grid cell.
  const auto [fit_cc, val_cc] = train_test_split(
      train_cc, 1.0 - config.validation_fraction,
      child_seed(config.seed, kStreamValidation));
  const Dataset fit_ds = fit_cc.to_dataset().select_columns(feature_idx);
  const Dataset val_ds = val_cc.to_dataset().select_columns(feature_idx);
  const auto inner_scaler = maybe_scaler(config, fit_ds.X);
  const Dataset fit_scaled = scaled(fit_ds, inner_scaler);

  const std::vector<double> widths =
      config.ivm_kernel == KernelFamily::Linear ? std::vector<double>{0.0}
                                                : config.ivm_widths;

  double best_auc = -1.0;
  double best_lambda = 0.0, best_width = 0.0;
  for (double lambda : config.ivm_lambdas) {
    for (double width : widths) {
      IvmConfig ic;
      ic.kernel = config.ivm_kernel == KernelFamily::Linear ? KernelSpec::linear()
                                                            : KernelSpec::radial(width);
      ic.lambda = lambda;
      ic.conv_tol = config.ivm_conv_tol;
      ic.conv_lag = config.ivm_conv_lag;
      ic.max_import = config.ivm_max_import;
      ic.selection = resolve_mode(config.ivm_mode, fit_scaled.n());
      ic.threads = config.threads;
      const IvmModel model = fit_ivm(fit_scaled, ic);

      SavedModel sm = SavedModel::from(model, inner_scaler);
      const std::vector<double> scores = to_std(sm.score(val_ds.X));
      const double auc = roc_curve(scores, labels_of(val_ds)).auc;
      if (auc > best_auc) {
        best_auc = auc;
        best_lambda = lambda;
        best_width = width;
      }
    }
  }

  // Refit the winning cell on the full training split.
  const Dataset train_ds = train_cc.to_dataset().select_columns(feature_idx);
  const auto scaler = maybe_scaler(config, train_ds.X);
  const Dataset train_scaled = scaled(train_ds, scaler);
  IvmConfig ic;
  ic.kernel = config.ivm_kernel == KernelFamily::Linear ? KernelSpec::linear()
                                                        : KernelSpec::radial(best_width);
  ic.lambda = best_lambda;
  ic.conv_tol = config.ivm_conv_tol;
  ic.conv_lag = config.ivm_conv_lag;
  ic.max_import = config.ivm_max_import;
  ic.selection = resolve_mode(config.ivm_mode, train_scaled.n());
  ic.threads = config.threads;
  const IvmModel model = fit_ivm(train_scaled, ic);

  SavedModel sm = SavedModel::from(model, scaler);
  sm.feature_names = feature_names;
  const std::filesystem::path file = config.out_dir / "model_ivm.txt";
  save_model(sm, file);

  const std::vector<double> train_scores = to_std(sm.score(train_ds.X));
  const double train_auc = roc_curve(train_scores, labels_of(train_ds)).auc;

  TrainedEntry entry;
  entry.file = file.string();
  entry.report = {
      {"model", "IVM"},
      {"kernel", kernel_family_name(ic.kernel.family)},
      {"gamma", ic.kernel.family == KernelFamily::Radial ? ic.kernel.gamma : 0.0},
      {"lambda", best_lambda},
      {"import_vectors", static_cast<long>(model.coeffs.size())},
      {"greedy_steps", model.history.size()},
      {"validation_auc", best_auc},
      {"train_auc", train_auc},
      {"mode", ic.selection == IvmSelection::Exact ? "exact" : "onestep"},
      {"training_seconds", now_seconds() - t0},
  };
  return entry;
}

TrainedEntry train_svm_model(const ExperimentConfig& config,
                             const CaseControlDataset& train_cc,
                             const std::vector<int>& feature_idx,
                             const std::vector<std::string>& feature_names,
                             KernelFamily family, std::string* grid_csv) {
  const double t0 = now_seconds();

  const Dataset train_ds = train_cc.to_dataset().select_columns(feature_idx);
  const auto scaler = maybe_scaler(config, train_ds.X);
  const Dataset train_scaled = scaled(train_ds, scaler);

  const GridSearchResult grid =
      grid_search(train_scaled, {family}, config.svm_gammas, config.svm_costs,
                  config.svm_folds, child_seed(config.seed, kStreamSvmFolds),
                  config.threads);
  if (grid_csv != nullptr) {
    for (const GridCell& cell : grid.table) {
      *grid_csv += std::string(kernel_family_name(cell.family)) + "," +
                   format_double(cell.gamma) + "," + format_double(cell.cost) + "," +
                   format_double(cell.cv_error) + "\n";
    }
  }

  const SvmModel model = fit_svm(train_scaled, grid.best);
  SavedModel sm = SavedModel::from(model, scaler);
  sm.feature_names = feature_names;
  const std::filesystem::path file =
      config.out_dir / (std::string("model_svm_") + kernel_family_name(family) + ".txt");
  save_model(sm, file);

  const std::vector<double> train_scores = to_std(sm.score(train_ds.X));
  const double train_auc = roc_curve(train_scores, labels_of(train_ds)).auc;

  TrainedEntry entry;
  entry.file = file.string();
  entry.report = {
      {"model", std::string("SVM-") + kernel_family_name(family)},
      {"kernel", kernel_family_name(family)},
      {"gamma", family == KernelFamily::Radial ? grid.best.kernel.gamma : 0.0},
      {"cost", grid.best.cost},
      {"support_vectors", static_cast<long>(model.dual_coeffs.size())},
      {"cv_error", grid.best_cv_error},
      {"converged", model.converged},
      {"train_auc", train_auc},
      {"training_seconds", now_seconds() - t0},
  };
  return entry;
}

std::vector<std::filesystem::path> model_files(const ExperimentConfig& config) {
  std::vector<std::filesystem::path> files;
  for (const char* name :
       {"model_ivm.txt", "model_svm_radial.txt", "model_svm_linear.txt"}) {
    const std::filesystem::path p = config.out_dir / name;
    if (std::filesystem::exists(p)) files.push_back(p);
  }
  return files;
}

Dataset columns_for_model(const Dataset& full, const SavedModel& model) {
  if (model.feature_names.empty()) return full;
  std::vector<int> idx;
  for (const std::string& name : model.feature_names) {
    const auto it =
        std::find(full.feature_names.begin(), full.feature_names.end(), name);
    if (it == full.feature_names.end()) {
      throw DataError("model input feature missing from dataset: " + name);
    }
    idx.push_back(static_cast<int>(it - full.feature_names.begin()));
  }
  return full.select_columns(idx);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1)");
  }
  if (!(validation_fraction > 0.0) || !(validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in (0, 1)");
  }
  if (ivm_lambdas.empty()) throw ConfigError("ivm lambda grid is empty");
  if (ivm_kernel == KernelFamily::Radial && ivm_widths.empty()) {
    throw ConfigError("ivm width grid is empty");
  }
  if (svm_kernels.empty() || svm_gammas.empty() || svm_costs.empty()) {
    throw ConfigError("svm grids must be non-empty");
  }
  if (svm_folds < 2) throw ConfigError("svm_folds must be >= 2");
  if (k_features < 1) throw ConfigError("k must be >= 1");
  for (double t : fpr_targets) {
    if (t < 0.0 || t > 1.0) throw ConfigError("fpr targets must lie in [0, 1]");
  }
  if (data_csv.empty()) synthetic.validate();
}

ExperimentConfig default_config() {
  ExperimentConfig config;
  config.ivm_widths = {0.125, 0.5};  // sigma 2 and sigma 1 on standardized inputs
  config.ivm_lambdas = {0.0067, 0.05};
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }

  ExperimentConfig config = default_config();
  try {
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out_dir")) config.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("standardize")) config.standardize = j.at("standardize").get<bool>();
    if (j.contains("threads")) config.threads = j.at("threads").get<int>();

    if (j.contains("data")) {
      const json& d = j.at("data");
      if (d.contains("csv")) config.data_csv = d.at("csv").get<std::string>();
      if (d.contains("synthetic")) {
        const json& s = d.at("synthetic");
        if (s.contains("n_cases")) config.synthetic.n_cases = s.at("n_cases").get<int>();
        if (s.contains("controls_per_case")) {
          config.synthetic.controls_per_case = s.at("controls_per_case").get<int>();
        }
        if (s.contains("common_corr")) {
          config.synthetic.common_corr = s.at("common_corr").get<double>();
        }
        if (s.contains("marginals")) {
          config.synthetic.marginals.clear();
          for (const json& m : s.at("marginals")) {
            config.synthetic.marginals.push_back(
                {m.at("name").get<std::string>(), m.at("mean").get<double>(),
                 m.at("std").get<double>(), m.at("min").get<double>(),
                 m.at("max").get<double>()});
          }
          config.synthetic.crash_effect =
              Eigen::VectorXd::Zero(static_cast<long>(config.synthetic.marginals.size()));
        }
        if (s.contains("crash_effect")) {
          config.synthetic.crash_effect =
              Eigen::VectorXd::Zero(static_cast<long>(config.synthetic.marginals.size()));
          for (const auto& [name, shift] : s.at("crash_effect").items()) {
            bool found = false;
            for (std::size_t k = 0; k < config.synthetic.marginals.size(); ++k) {
              if (config.synthetic.marginals[k].name == name) {
                config.synthetic.crash_effect[static_cast<long>(k)] = shift.get<double>();
                found = true;
                break;
              }
            }
            if (!found) throw ConfigError("crash_effect names unknown feature: " + name);
          }
        }
      }
    }

    if (j.contains("select")) {
      const json& s = j.at("select");
      if (s.contains("ntree")) config.ntree = s.at("ntree").get<int>();
      if (s.contains("mtry")) config.mtry = s.at("mtry").get<int>();
      if (s.contains("k")) config.k_features = s.at("k").get<int>();
      if (s.contains("corr_threshold")) {
        config.corr_threshold = s.at("corr_threshold").get<double>();
      }
    }
    if (j.contains("features")) {
      config.features = j.at("features").get<std::vector<std::string>>();
    }
    if (j.contains("split") && j.at("split").contains("train_fraction")) {
      config.train_fraction = j.at("split").at("train_fraction").get<double>();
    }

    if (j.contains("ivm")) {
      const json& s = j.at("ivm");
      if (s.contains("kernel")) {
        config.ivm_kernel = kernel_family_from_name(s.at("kernel").get<std::string>());
      }
      if (s.contains("gammas") && s.contains("sigmas")) {
        throw ConfigError("ivm config: give gammas or sigmas, not both");
      }
      if (s.contains("gammas")) {
        config.ivm_widths = s.at("gammas").get<std::vector<double>>();
      }
      if (s.contains("sigmas")) {
        config.ivm_widths.clear();
        for (double sigma : s.at("sigmas").get<std::vector<double>>()) {
          config.ivm_widths.push_back(KernelSpec::radial_sigma(sigma).gamma);
        }
      }
      if (s.contains("lambdas")) {
        config.ivm_lambdas = s.at("lambdas").get<std::vector<double>>();
      }
      if (s.contains("conv_tol")) config.ivm_conv_tol = s.at("conv_tol").get<double>();
      if (s.contains("conv_lag")) config.ivm_conv_lag = s.at("conv_lag").get<int>();
      if (s.contains("max_import")) config.ivm_max_import = s.at("max_import").get<int>();
      if (s.contains("mode")) config.ivm_mode = s.at("mode").get<std::string>();
      if (s.contains("validation_fraction")) {
        config.validation_fraction = s.at("validation_fraction").get<double>();
      }
    }

    if (j.contains("svm")) {
      const json& s = j.at("svm");
      if (s.contains("kernels")) {
        config.svm_kernels.clear();
        for (const std::string& k : s.at("kernels").get<std::vector<std::string>>()) {
          config.svm_kernels.push_back(kernel_family_from_name(k));
        }
      }
      if (s.contains("gammas")) config.svm_gammas = s.at("gammas").get<std::vector<double>>();
      if (s.contains("costs")) config.svm_costs = s.at("costs").get<std::vector<double>>();
      if (s.contains("folds")) config.svm_folds = s.at("folds").get<int>();
    }

    if (j.contains("eval") && j.at("eval").contains("fpr_targets")) {
      config.fpr_targets = j.at("eval").at("fpr_targets").get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  config.validate();
  return config;
}

void cmd_simulate(const ExperimentConfig& config) {
  config.validate();
  if (!config.data_csv.empty()) {
    throw ConfigError("simulate requires a synthetic data source");
  }
  SyntheticTruth truth;
  const CaseControlDataset data = obtain_dataset(config, &truth);
  save_case_control_csv(data, config.out_dir / "dataset.csv");

  json ground_truth = {
      {"seed", truth.seed},
      {"n_cases", config.synthetic.n_cases},
      {"controls_per_case", config.synthetic.controls_per_case},
      {"common_corr", config.synthetic.common_corr},
  };
  json effects = json::object();
  for (std::size_t k = 0; k < truth.feature_names.size(); ++k) {
    if (truth.effect[static_cast<long>(k)] != 0.0) {
      effects[truth.feature_names[k]] = truth.effect[static_cast<long>(k)];
    }
  }
  ground_truth["crash_effect"] = effects;
  write_file_atomic(config.out_dir / "ground_truth.json", ground_truth.dump(2) + "\n");

  std::cout << "simulate: " << data.observations.size() << " observations in "
            << data.stratum_count() << " strata -> "
            << (config.out_dir / "dataset.csv").string() << "\n";
}

void cmd_select(const ExperimentConfig& config) {
  config.validate();
  const Dataset full = obtain_dataset(config).to_dataset();
  const Selection sel = run_selection(config, full);

  std::vector<int> order(static_cast<std::size_t>(full.dim()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return sel.importance.vi[a] > sel.importance.vi[b];
  });

  std::string csv = "feature,importance,importance_percent\n";
  for (int j : order) {
    csv += full.feature_names[static_cast<std::size_t>(j)] + "," +
           format_double(sel.importance.vi[j]) + "," +
           format_double(sel.importance.vi_percent[j]) + "\n";
  }
  write_file_atomic(config.out_dir / "importance.csv", csv);

  std::string selected;
  for (int j : sel.indices) {
    selected += full.feature_names[static_cast<std::size_t>(j)] + "\n";
  }
  write_file_atomic(config.out_dir / "selected_features.txt", selected);

  std::cout << "select: ranked " << full.dim() << " features, selected "
            << sel.indices.size() << (sel.shortfall ? " (shortfall)" : "") << " -> "
            << (config.out_dir / "selected_features.txt").string() << "\n";
}

void cmd_train(const ExperimentConfig& config, const std::string& kind) {
  config.validate();
  if (kind != "ivm" && kind != "svm" && kind != "both") {
    throw ConfigError("train kind must be ivm, svm or both: " + kind);
  }

  const CaseControlDataset data = obtain_dataset(config);
  const auto [train_cc, test_cc] =
      train_test_split(data, config.train_fraction, child_seed(config.seed, kStreamSplit));
  save_case_control_csv(train_cc, config.out_dir / "train.csv");
  save_case_control_csv(test_cc, config.out_dir / "test.csv");

  const Dataset full = data.to_dataset();
  const std::vector<int> feature_idx = resolve_feature_indices(config, full);
  std::vector<std::string> feature_names;
  for (int j : feature_idx) {
    feature_names.push_back(full.feature_names[static_cast<std::size_t>(j)]);
  }

  json report = json::array();
  std::string grid_csv = "kernel,gamma,cost,cv_error\n";
  if (kind == "ivm" || kind == "both") {
    report.push_back(train_ivm_model(config, train_cc, feature_idx, feature_names).report);
  }
  if (kind == "svm" || kind == "both") {
    for (KernelFamily family : config.svm_kernels) {
      report.push_back(
          train_svm_model(config, train_cc, feature_idx, feature_names, family, &grid_csv)
              .report);
    }
    write_file_atomic(config.out_dir / "svm_grid.csv", grid_csv);
  }
  write_file_atomic(config.out_dir / "train_report.json", report.dump(2) + "\n");

  for (const json& entry : report) {
    std::cout << "train: " << entry.at("model").get<std::string>() << " ("
              << entry.at("training_seconds").get<double>() << " s)\n";
  }
}

void cmd_evaluate(const ExperimentConfig& config) {
  config.validate();
  const std::filesystem::path train_path = config.out_dir / "train.csv";
  const std::filesystem::path test_path = config.out_dir / "test.csv";
  if (!std::filesystem::exists(train_path) || !std::filesystem::exists(test_path)) {
    throw DataError("evaluate needs train.csv and test.csv; run the train step first");
  }
  const Dataset train_ds = load_case_control_csv(train_path).to_dataset();
  const Dataset test_ds = load_case_control_csv(test_path).to_dataset();

  const auto files = model_files(config);
  if (files.empty()) {
    throw DataError("no model files under " + config.out_dir.string());
  }

  NamedCurves test_curves;
  std::string report = "model,train_auc,test_auc,threshold_source,target_fpr,threshold,"
                       "fpr,sensitivity,accuracy\n";
  for (const auto& file : files) {
    const SavedModel model = load_model(file);
    const std::string name = model_display_name(model);

    const Dataset train_cols = columns_for_model(train_ds, model);
    const Dataset test_cols = columns_for_model(test_ds, model);
    const std::vector<double> train_scores = to_std(model.score(train_cols.X));
    const std::vector<double> test_scores = to_std(model.score(test_cols.X));
    const std::vector<int> train_labels = labels_of(train_cols);
    const std::vector<int> test_labels = labels_of(test_cols);

    const RocCurve train_roc = roc_curve(train_scores, train_labels);
    const RocCurve test_roc = roc_curve(test_scores, test_labels);
    test_curves.emplace_back(name, test_roc);

    auto add_row = [&](const char* source, double target, double threshold,
                       const ConfusionCounts& counts) {
      report += name + "," + format_double(train_roc.auc) + "," +
                format_double(test_roc.auc) + "," + source + "," +
                format_double(target) + "," + format_double(threshold) + "," +
                format_double(counts.one_minus_specificity()) + "," +
                format_double(counts.sensitivity()) + "," +
                format_double(counts.accuracy()) + "\n";
    };

    // Thresholds picked on the test curve itself, and thresholds carried
    // over from the training curve; both variants are reported.
    for (const OperatingPoint& pt : operating_points(test_roc, config.fpr_targets)) {
      add_row("test", pt.target_fpr, pt.threshold,
              confusion_at(test_scores, test_labels, pt.threshold));
    }
    for (const OperatingPoint& pt : operating_points(train_roc, config.fpr_targets)) {
      add_row("train", pt.target_fpr, pt.threshold,
              confusion_at(test_scores, test_labels, pt.threshold));
    }
  }

  write_file_atomic(config.out_dir / "report.csv", report);
  emit_roc_plot(test_curves, config.out_dir / "roc");

  for (const auto& [name, curve] : test_curves) {
    std::cout << "evaluate: " << name << " test AUC " << curve.auc << "\n";
  }
  std::cout << "evaluate: report -> " << (config.out_dir / "report.csv").string()
            << ", curves -> " << (config.out_dir / "roc.svg").string() << "\n";
}

void cmd_reproduce(const ExperimentConfig& config) {
  struct Stage {
    const char* name;
    double seconds;
  };
  std::vector<Stage> stages;
  auto timed = [&](const char* name, auto&& fn) {
    const double t0 = now_seconds();
    fn();
    stages.push_back({name, now_seconds() - t0});
  };

  timed("simulate", [&] { cmd_simulate(config); });
  timed("select", [&] { cmd_select(config); });
  timed("train", [&] { cmd_train(config, "both"); });
  timed("evaluate", [&] { cmd_evaluate(config); });

  // Wall-clock timings are the one non-reproducible artifact; they live in
  // their own file so everything else compares byte for byte across runs.
  std::string timing;
  double total = 0.0;
  for (const Stage& s : stages) {
    timing += std::string(s.name) + " " + format_double(s.seconds) + "\n";
    total += s.seconds;
  }
  timing += "total " + format_double(total) + "\n";
  write_file_atomic(config.out_dir / "timings.txt", timing);
  std::cout << "reproduce: finished in " << total << " s\n";
}

}  // namespace ivmkit
