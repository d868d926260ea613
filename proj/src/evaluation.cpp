#include "ivmkit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "ivmkit/io_util.hpp"

namespace ivmkit {

namespace {

void check_scores(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError("scores and labels differ in length",
                         static_cast<long>(scores.size()),
                         static_cast<long>(labels.size()));
  }
  if (scores.empty()) throw InvalidInputError("empty score set");
  for (double s : scores) {
    if (!std::isfinite(s)) throw InvalidInputError("scores must be finite");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw InvalidInputError("labels must be 0 or 1");
  }
}

}  // namespace

double ConfusionCounts::sensitivity() const {
  const long pos = tp + fn;
  return pos > 0 ? static_cast<double>(tp) / static_cast<double>(pos) : 0.0;
}

double ConfusionCounts::one_minus_specificity() const {
  const long neg = fp + tn;
  return neg > 0 ? static_cast<double>(fp) / static_cast<double>(neg) : 0.0;
}

double ConfusionCounts::accuracy() const {
  const long total = tp + fp + fn + tn;
  return total > 0 ? static_cast<double>(tp + tn) / static_cast<double>(total) : 0.0;
}

ConfusionCounts confusion_at(const std::vector<double>& scores,
                             const std::vector<int>& labels, double threshold) {
  check_scores(scores, labels);
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      (predicted ? c.tp : c.fn)++;
    } else {
      (predicted ? c.fp : c.tn)++;
    }
  }
  return c;
}

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_scores(scores, labels);

  RocCurve curve;
  for (int y : labels) (y == 1 ? curve.num_pos : curve.num_neg)++;
  if (curve.num_pos == 0) throw InvalidInputError("roc requires at least one positive");
  if (curve.num_neg == 0) throw InvalidInputError("roc requires at least one negative");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  const double p = static_cast<double>(curve.num_pos);
  const double n = static_cast<double>(curve.num_neg);
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0, 0, 0});

  long tp = 0, fp = 0;
  long auc_times_2pn = 0;  // sum of dfp * (tp_prev + tp_cur), all integers
  std::size_t k = 0;
  while (k < order.size()) {
    const double score = scores[order[k]];
    const long tp_prev = tp, fp_prev = fp;
    // One vertex per distinct score: absorb the whole tie group.
    while (k < order.size() && scores[order[k]] == score) {
      (labels[order[k]] == 1 ? tp : fp)++;
      ++k;
    }
    auc_times_2pn += (fp - fp_prev) * (tp_prev + tp);
    curve.points.push_back({score, static_cast<double>(fp) / n,
                            static_cast<double>(tp) / p, tp, fp});
  }
  curve.auc = static_cast<double>(auc_times_2pn) / (2.0 * p * n);
  return curve;
}

std::vector<OperatingPoint> operating_points(const RocCurve& curve,
                                             const std::vector<double>& fpr_targets) {
  if (curve.points.empty()) throw InvalidInputError("empty roc curve");
  std::vector<OperatingPoint> out;
  out.reserve(fpr_targets.size());
  for (double target : fpr_targets) {
    if (target < 0.0 || target > 1.0) {
      throw InvalidInputError("fpr target must lie in [0, 1]");
    }
    // Vertices are swept with non-decreasing fpr; keep the last one <= target.
    const RocPoint* chosen = &curve.points.front();
    for (const RocPoint& pt : curve.points) {
      if (pt.fpr <= target) chosen = &pt;
    }
    ConfusionCounts c;
    c.tp = chosen->tp;
    c.fp = chosen->fp;
    c.fn = curve.num_pos - chosen->tp;
    c.tn = curve.num_neg - chosen->fp;
    out.push_back({target, chosen->threshold, chosen->fpr, chosen->tpr, c.accuracy()});
  }
  return out;
}

void emit_roc_csv(const NamedCurves& curves, const std::filesystem::path& path) {
  if (curves.empty()) throw InvalidInputError("no curves to emit");
  std::string body = "model,threshold,fpr,tpr\n";
  for (const auto& [name, curve] : curves) {
    for (const RocPoint& pt : curve.points) {
      body += name;
      body += ',';
      body += format_double(pt.threshold);
      body += ',';
      body += format_double(pt.fpr);
      body += ',';
      body += format_double(pt.tpr);
      body += '\n';
    }
  }
  write_file_atomic(path, body);
}

void emit_roc_svg(const NamedCurves& curves, const std::filesystem::path& path) {
  if (curves.empty()) throw InvalidInputError("no curves to emit");
  static const char* kPalette[] = {"#1b6ca8", "#c0392b", "#27ae60",
                                   "#8e44ad", "#d35400", "#2c3e50"};
  const int size = 480;
  const int margin = 48;
  const double span = static_cast<double>(size - 2 * margin);
  auto px = [&](double v) { return static_cast<double>(margin) + v * span; };
  auto py = [&](double v) { return static_cast<double>(size - margin) - v * span; };

  std::string s;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n",
                size, size, size, size);
  s += buf;
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%d\" y=\"%d\" width=\"%.0f\" height=\"%.0f\" fill=\"none\" "
                "stroke=\"black\"/>\n",
                margin, margin, span, span);
  s += buf;
  for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%d\" font-size=\"11\" text-anchor=\"middle\">"
                  "%.2f</text>\n",
                  px(tick), size - margin + 16, tick);
    s += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%.1f\" font-size=\"11\" text-anchor=\"end\">"
                  "%.2f</text>\n",
                  margin - 6, py(tick) + 4, tick);
    s += buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.1f\" y=\"%d\" font-size=\"13\" text-anchor=\"middle\">"
                "1 - Specificity</text>\n",
                px(0.5), size - 8);
  s += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"14\" y=\"%.1f\" font-size=\"13\" text-anchor=\"middle\" "
                "transform=\"rotate(-90 14 %.1f)\">Sensitivity</text>\n",
                py(0.5), py(0.5));
  s += buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                "stroke=\"#999\" stroke-dasharray=\"4,3\"/>\n",
                px(0.0), py(0.0), px(1.0), py(1.0));
  s += buf;

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& [name, curve] = curves[c];
    const char* color = kPalette[c % (sizeof kPalette / sizeof kPalette[0])];
    s += "<polyline fill=\"none\" stroke=\"";
    s += color;
    s += "\" stroke-width=\"1.6\" points=\"";
    for (const RocPoint& pt : curve.points) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(pt.fpr), py(pt.tpr));
      s += buf;
    }
    s += "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%d\" y=\"%.1f\" width=\"14\" height=\"4\" fill=\"%s\"/>\n",
                  size - 210, static_cast<double>(margin + 14 + 18 * (int)c), color);
    s += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%.1f\" font-size=\"12\">%s (AUC %.3f)</text>\n",
                  size - 190, static_cast<double>(margin + 19 + 18 * (int)c),
                  name.c_str(), curve.auc);
    s += buf;
  }
  s += "</svg>\n";
  write_file_atomic(path, s);
}

void emit_roc_plot(const NamedCurves& curves, const std::filesystem::path& stem) {
  std::filesystem::path csv = stem;
  csv += ".csv";
  std::filesystem::path svg = stem;
  svg += ".svg";
  emit_roc_csv(curves, csv);
  emit_roc_svg(curves, svg);
}

}  // namespace ivmkit
