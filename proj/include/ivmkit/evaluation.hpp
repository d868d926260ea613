#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ivmkit/errors.hpp"

namespace ivmkit {

struct ConfusionCounts {
  long tp = 0, fp = 0, fn = 0, tn = 0;

  double sensitivity() const;            // TP / (TP + FN)
  double one_minus_specificity() const;  // FP / (FP + TN)
  double accuracy() const;               // (TP + TN) / total
};

/// Positive prediction iff score >= threshold.
ConfusionCounts confusion_at(const std::vector<double>& scores,
                             const std::vector<int>& labels, double threshold);

struct RocPoint {
  double threshold;  // +inf for the (0, 0) sentinel
  double fpr;        // 1 - specificity
  double tpr;        // sensitivity
  long tp;
  long fp;
};

/// ROC vertices from threshold +inf downward, one per distinct score. The
/// AUC is accumulated in integer arithmetic, so it equals the pairwise
/// Mann-Whitney statistic (ties counted 1/2) exactly.
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
  long num_pos = 0;
  long num_neg = 0;
};

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels);

struct OperatingPoint {
  double target_fpr;
  double threshold;
  double fpr;
  double sensitivity;
  double accuracy;
};

/// For each target, the vertex with the largest achievable false-positive
/// rate <= target (no interpolation); accuracy comes from that vertex's
/// confusion counts.
std::vector<OperatingPoint> operating_points(const RocCurve& curve,
                                             const std::vector<double>& fpr_targets);

using NamedCurves = std::vector<std::pair<std::string, RocCurve>>;

/// CSV of curve vertices: model,threshold,fpr,tpr.
void emit_roc_csv(const NamedCurves& curves, const std::filesystem::path& path);

/// Self-contained SVG: unit square, diagonal reference, one polyline per
/// model, legend with AUC values. Byte-stable for identical input.
void emit_roc_svg(const NamedCurves& curves, const std::filesystem::path& path);

/// Writes both artifacts next to each other (path stem + ".csv"/".svg").
void emit_roc_plot(const NamedCurves& curves, const std::filesystem::path& stem);

}  // namespace ivmkit
