// Command-line front end for the crash-risk classification pipeline:
// simulate synthetic detector data, rank features, train the sparse kernel
// models, and evaluate them on the held-out split.

#include <CLI11.hpp>
#include <iostream>

#include "ivmkit/experiment.hpp"

namespace {

enum ExitCode {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDataError = 3,
  kConvergenceError = 4,
};

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string mode;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Experiment manifest (JSON)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "Output directory (overrides the manifest)");
  cmd->add_option("--seed", args.seed, "Master seed (overrides the manifest)")
      ->each([&](const std::string&) { args.seed_set = true; });
}

ivmkit::ExperimentConfig build_config(const CommonArgs& args) {
  ivmkit::ExperimentConfig config = args.config_path.empty()
                                        ? ivmkit::default_config()
                                        : ivmkit::load_config(args.config_path);
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  if (args.seed_set) config.seed = args.seed;
  if (!args.mode.empty()) config.ivm_mode = args.mode;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse kernel classifiers for crash-risk screening on loop-detector data"};
  app.require_subcommand(1);

  CommonArgs simulate_args, select_args, train_args, evaluate_args, reproduce_args;
  std::string train_kind = "both";

  CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic case-control dataset");
  add_common(simulate, simulate_args);

  CLI::App* select = app.add_subcommand("select", "Rank features by permutation importance");
  add_common(select, select_args);

  CLI::App* train = app.add_subcommand("train", "Split, grid-search and fit the classifiers");
  add_common(train, train_args);
  train->add_option("--model", train_kind, "Which models to train")
      ->check(CLI::IsMember({"ivm", "svm", "both"}));
  train->add_option("--mode", train_args.mode, "IVM candidate scan mode")
      ->check(CLI::IsMember({"auto", "exact", "onestep"}));

  CLI::App* evaluate = app.add_subcommand("evaluate", "Score the test split and emit the report");
  add_common(evaluate, evaluate_args);

  CLI::App* reproduce = app.add_subcommand(
      "reproduce", "Run simulate, select, train and evaluate in one deterministic pass");
  add_common(reproduce, reproduce_args);
  reproduce->add_option("--mode", reproduce_args.mode, "IVM candidate scan mode")
      ->check(CLI::IsMember({"auto", "exact", "onestep"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      ivmkit::cmd_simulate(build_config(simulate_args));
    } else if (select->parsed()) {
      ivmkit::cmd_select(build_config(select_args));
    } else if (train->parsed()) {
      ivmkit::cmd_train(build_config(train_args), train_kind);
    } else if (evaluate->parsed()) {
      ivmkit::cmd_evaluate(build_config(evaluate_args));
    } else if (reproduce->parsed()) {
      ivmkit::cmd_reproduce(build_config(reproduce_args));
    }
  } catch (const ivmkit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ivmkit::ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return kConvergenceError;
  } catch (const ivmkit::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const ivmkit::InvalidInputError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
