#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "ivmkit/dataset.hpp"
#include "ivmkit/ivm.hpp"
#include "ivmkit/svm.hpp"

namespace ivmkit {

/// A trained classifier plus the feature scaling it was fitted under, in one
/// savable unit. `score` applies the scaler and returns the class-1
/// probability for IVM models or the signed margin for SVM models; both rank
/// observations for ROC purposes.
struct SavedModel {
  std::string kind;  // "ivm" | "svm"
  std::vector<std::string> feature_names;  // model inputs, in column order; may be empty
  std::optional<Standardizer> scaler;
  std::optional<IvmModel> ivm;
  std::optional<SvmModel> svm;

  static SavedModel from(IvmModel model, std::optional<Standardizer> scaler = {});
  static SavedModel from(SvmModel model, std::optional<Standardizer> scaler = {});

  double score(const Eigen::VectorXd& x) const;
  Eigen::VectorXd score(const Eigen::MatrixXd& X) const;
};

/// Versioned plain-text model format. Numeric fields use the shortest exact
/// decimal form, so save/load round-trips reproduce predictions bit for bit.
void save_model(const SavedModel& model, const std::filesystem::path& path);
SavedModel load_model(const std::filesystem::path& path);

}  // namespace ivmkit
