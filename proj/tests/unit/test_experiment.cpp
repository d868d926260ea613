#include <doctest.h>

#include <filesystem>

#include "ivmkit/experiment.hpp"
#include "ivmkit/io_util.hpp"
#include "ivmkit/model_io.hpp"
#include "testutil.hpp"

using namespace ivmkit;

namespace {

std::filesystem::path fresh_dir(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / "ivmkit_exp_test" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

ExperimentConfig small_config(const char* dir_name) {
  ExperimentConfig config = default_config();
  config.out_dir = fresh_dir(dir_name);
  config.seed = 11;
  config.synthetic.n_cases = 24;
  config.ntree = 60;
  config.ivm_widths = {0.125};
  config.ivm_lambdas = {0.01};
  config.ivm_max_import = 10;
  config.svm_gammas = {0.5};
  config.svm_costs = {1.0};
  config.svm_folds = 3;
  return config;
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char ch : text) n += ch == '\n' ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("simulate writes the documented schema and stratum structure") {
  ExperimentConfig config = small_config("simulate");
  cmd_simulate(config);

  const CaseControlDataset data = load_case_control_csv(config.out_dir / "dataset.csv");
  CHECK(data.stratum_count() == 24);
  CHECK(data.observations.size() == 24u * 5u);

  const std::string csv = read_file(config.out_dir / "dataset.csv");
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(split_csv_line(header).size() == 2u + 27u + 4u);
  CHECK(header.rfind("stratum_id,label,", 0) == 0);
  CHECK(std::filesystem::exists(config.out_dir / "ground_truth.json"));
}

TEST_CASE("simulate is deterministic for a fixed seed") {
  ExperimentConfig a = small_config("sim_a");
  ExperimentConfig b = small_config("sim_b");
  cmd_simulate(a);
  cmd_simulate(b);
  CHECK(read_file(a.out_dir / "dataset.csv") == read_file(b.out_dir / "dataset.csv"));
  CHECK(read_file(a.out_dir / "ground_truth.json") ==
        read_file(b.out_dir / "ground_truth.json"));

  ExperimentConfig c = small_config("sim_c");
  c.seed = 12;
  cmd_simulate(c);
  CHECK(read_file(a.out_dir / "dataset.csv") != read_file(c.out_dir / "dataset.csv"));
}

TEST_CASE("a complete 524-case run yields 2096 control rows") {
  ExperimentConfig config = small_config("paper_counts");
  config.synthetic.n_cases = 524;
  cmd_simulate(config);
  const CaseControlDataset data = load_case_control_csv(config.out_dir / "dataset.csv");
  long cases = 0, controls = 0;
  for (const auto& obs : data.observations) (obs.label == 1 ? cases : controls)++;
  CHECK(cases == 524);
  CHECK(controls == 2096);
}

TEST_CASE("select ranks all features and keeps k of them") {
  ExperimentConfig config = small_config("select");
  cmd_select(config);

  const std::string importance = read_file(config.out_dir / "importance.csv");
  CHECK(line_count(importance) == 1u + 27u);

  const std::string selected = read_file(config.out_dir / "selected_features.txt");
  CHECK(line_count(selected) == 4u);

  cmd_select(config);
  CHECK(read_file(config.out_dir / "importance.csv") == importance);
}

TEST_CASE("train emits models, split files and a report") {
  ExperimentConfig config = small_config("train");
  config.features = {"Mean_Speed_C", "CV_Speed_U", "Mean_Flow_C", "Std_Occupancy_C"};
  cmd_train(config, "both");

  for (const char* name : {"model_ivm.txt", "model_svm_radial.txt",
                           "model_svm_linear.txt", "train.csv", "test.csv",
                           "train_report.json", "svm_grid.csv"}) {
    CAPTURE(name);
    CHECK(std::filesystem::exists(config.out_dir / name));
  }
  const SavedModel model = load_model(config.out_dir / "model_ivm.txt");
  CHECK(model.feature_names == config.features);
  CHECK(model.scaler.has_value());

  // Single-cell grid: one radial and one linear row.
  CHECK(line_count(read_file(config.out_dir / "svm_grid.csv")) == 3u);

  // A repeated run reproduces the serialized models byte for byte.
  const std::string ivm_bytes = read_file(config.out_dir / "model_ivm.txt");
  cmd_train(config, "ivm");
  CHECK(read_file(config.out_dir / "model_ivm.txt") == ivm_bytes);
}

TEST_CASE("evaluate writes the report and curves for every model") {
  ExperimentConfig config = small_config("evaluate");
  config.features = {"Mean_Speed_C", "CV_Speed_U", "Mean_Flow_C", "Std_Occupancy_C"};
  cmd_train(config, "both");
  cmd_evaluate(config);

  const std::string report = read_file(config.out_dir / "report.csv");
  // 3 models x 2 threshold sources x 3 targets plus the header.
  CHECK(line_count(report) == 1u + 3u * 2u * 3u);
  CHECK(report.find("IVM,") != std::string::npos);
  CHECK(report.find("SVM-radial,") != std::string::npos);
  CHECK(report.find("SVM-linear,") != std::string::npos);
  CHECK(std::filesystem::exists(config.out_dir / "roc.csv"));
  CHECK(std::filesystem::exists(config.out_dir / "roc.svg"));
}

TEST_CASE("evaluate without trained models fails with a data error") {
  ExperimentConfig config = small_config("evaluate_missing");
  CHECK_THROWS_AS(cmd_evaluate(config), DataError);
}

TEST_CASE("config loading overlays the manifest onto the defaults") {
  const auto dir = fresh_dir("config");
  const auto path = dir / "config.json";
  write_file_atomic(path, R"({
    "seed": 99,
    "out_dir": "somewhere",
    "data": {"synthetic": {"n_cases": 42, "crash_effect": {"Mean_Flow_C": 1.0}}},
    "select": {"ntree": 123, "k": 3},
    "ivm": {"sigmas": [2.0], "lambdas": [0.5], "mode": "exact"},
    "svm": {"kernels": ["linear"], "gammas": [1.0], "costs": [2.0]},
    "eval": {"fpr_targets": [0.2]}
  })");
  const ExperimentConfig config = load_config(path);
  CHECK(config.seed == 99);
  CHECK(config.out_dir == "somewhere");
  CHECK(config.synthetic.n_cases == 42);
  CHECK(config.ntree == 123);
  CHECK(config.k_features == 3);
  REQUIRE(config.ivm_widths.size() == 1);
  CHECK(config.ivm_widths[0] == doctest::Approx(0.125));  // sigma 2 -> gamma 1/8
  CHECK(config.ivm_lambdas == std::vector<double>{0.5});
  CHECK(config.ivm_mode == "exact");
  REQUIRE(config.svm_kernels.size() == 1);
  CHECK(config.svm_kernels[0] == KernelFamily::Linear);
  CHECK(config.fpr_targets == std::vector<double>{0.2});
  const int flow_c = traffic_feature_index("Mean_Flow_C");
  CHECK(config.synthetic.crash_effect[flow_c] == 1.0);
  CHECK(config.synthetic.crash_effect[traffic_feature_index("Mean_Speed_C")] == 0.0);

  write_file_atomic(path, "{ not json");
  CHECK_THROWS_AS(load_config(path), ConfigError);
  write_file_atomic(path, R"({"ivm": {"gammas": [1], "sigmas": [1]}})");
  CHECK_THROWS_AS(load_config(path), ConfigError);
  write_file_atomic(path, R"({"svm": {"kernels": []}})");
  CHECK_THROWS_AS(load_config(path), ConfigError);
}

TEST_CASE("missing data csv is a config error") {
  ExperimentConfig config = small_config("missing_csv");
  config.data_csv = "/nonexistent/never.csv";
  CHECK_THROWS_AS(cmd_select(config), ConfigError);
}
