#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "ivmkit/evaluation.hpp"
#include "ivmkit/io_util.hpp"
#include "testutil.hpp"

using namespace ivmkit;

namespace {

std::pair<std::vector<double>, std::vector<int>> random_scored_set(Rng& rng, int n) {
  std::vector<double> scores(static_cast<std::size_t>(n));
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Coarse grid forces plenty of ties.
    scores[static_cast<std::size_t>(i)] =
        static_cast<double>(rng.next_below(8)) / 8.0;
    labels[static_cast<std::size_t>(i)] = rng.next_double() < 0.5 ? 0 : 1;
  }
  labels[0] = 0;
  labels[static_cast<std::size_t>(n - 1)] = 1;
  return {scores, labels};
}

}  // namespace

TEST_CASE("confusion counts at a threshold") {
  const std::vector<double> scores{0.9, 0.8, 0.2, 0.1};
  const std::vector<int> labels{1, 1, 0, 0};
  const ConfusionCounts c = confusion_at(scores, labels, 0.5);
  CHECK(c.tp == 2);
  CHECK(c.fp == 0);
  CHECK(c.fn == 0);
  CHECK(c.tn == 2);
  CHECK(c.sensitivity() == 1.0);
  CHECK(c.one_minus_specificity() == 0.0);
  CHECK(c.accuracy() == 1.0);
}

TEST_CASE("sensitivity is tp over tp plus fn") {
  ConfusionCounts c;
  c.tp = 3;
  c.fn = 1;
  CHECK(c.sensitivity() == doctest::Approx(0.75));
}

TEST_CASE("a threshold above every score predicts nothing positive") {
  const std::vector<double> scores{0.9, 0.8, 0.2, 0.1};
  const std::vector<int> labels{1, 1, 0, 0};
  const ConfusionCounts c = confusion_at(scores, labels, 2.0);
  CHECK(c.tp == 0);
  CHECK(c.fp == 0);
  CHECK(c.sensitivity() == 0.0);
  CHECK(c.one_minus_specificity() == 0.0);
}

TEST_CASE("perfect separation gives unit AUC") {
  const RocCurve curve = roc_curve({0.9, 0.8, 0.3, 0.1}, {1, 1, 0, 0});
  CHECK(curve.auc == 1.0);
}

TEST_CASE("identical scores give AUC one half") {
  const RocCurve curve = roc_curve({0.4, 0.4, 0.4, 0.4}, {1, 0, 1, 0});
  CHECK(curve.auc == 0.5);
  CHECK(curve.points.size() == 2);  // sentinel plus the single tie group
}

TEST_CASE("curve endpoints and monotonicity") {
  Rng rng(15);
  const auto [scores, labels] = random_scored_set(rng, 40);
  const RocCurve curve = roc_curve(scores, labels);
  CHECK(curve.points.front().fpr == 0.0);
  CHECK(curve.points.front().tpr == 0.0);
  CHECK(curve.points.back().fpr == 1.0);
  CHECK(curve.points.back().tpr == 1.0);
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    CHECK(curve.points[k].fpr >= curve.points[k - 1].fpr);
    CHECK(curve.points[k].tpr >= curve.points[k - 1].tpr);
    CHECK(curve.points[k].threshold < curve.points[k - 1].threshold);
  }
}

TEST_CASE("trapezoid AUC equals the pairwise oracle exactly") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5 + static_cast<int>(rng.next_below(46));
    const auto [scores, labels] = random_scored_set(rng, n);
    const RocCurve curve = roc_curve(scores, labels);
    CHECK(curve.auc == testutil::auc_pairwise(scores, labels));
  }
}

TEST_CASE("stored AUC equals the trapezoid over stored vertices") {
  Rng rng(5);
  const auto [scores, labels] = random_scored_set(rng, 30);
  const RocCurve curve = roc_curve(scores, labels);
  double trapezoid = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    trapezoid += (curve.points[k].fpr - curve.points[k - 1].fpr) *
                 (curve.points[k].tpr + curve.points[k - 1].tpr) / 2.0;
  }
  CHECK(std::abs(curve.auc - trapezoid) <= 1e-12);
}

TEST_CASE("single-class inputs are rejected by name") {
  CHECK_THROWS_WITH_AS(roc_curve({0.1, 0.2}, {1, 1}),
                       doctest::Contains("negative"), InvalidInputError);
  CHECK_THROWS_WITH_AS(roc_curve({0.1, 0.2}, {0, 0}),
                       doctest::Contains("positive"), InvalidInputError);
}

TEST_CASE("operating point at target one is the all-positive vertex") {
  Rng rng(31);
  const auto [scores, labels] = random_scored_set(rng, 25);
  const RocCurve curve = roc_curve(scores, labels);
  const auto points = operating_points(curve, {1.0});
  REQUIRE(points.size() == 1);
  CHECK(points[0].fpr == 1.0);
  CHECK(points[0].sensitivity == 1.0);
  const double prevalence =
      static_cast<double>(curve.num_pos) / static_cast<double>(curve.num_pos + curve.num_neg);
  CHECK(points[0].accuracy == doctest::Approx(prevalence));
}

TEST_CASE("sensitivity grows with the false-alarm budget") {
  Rng rng(41);
  const auto [scores, labels] = random_scored_set(rng, 50);
  const RocCurve curve = roc_curve(scores, labels);
  const auto points = operating_points(curve, {0.1, 0.3});
  CHECK(points[1].sensitivity >= points[0].sensitivity);
  CHECK(points[0].fpr <= 0.1);
  CHECK(points[1].fpr <= 0.3);
}

TEST_CASE("monotone score transforms leave the curve unchanged") {
  Rng rng(51);
  const auto [scores, labels] = random_scored_set(rng, 40);
  std::vector<double> warped ;
  for (double s : scores) warped.push_back(std::exp(2.0 * s + 1.0));
  const RocCurve a = roc_curve(scores, labels);
  const RocCurve b = roc_curve(warped, labels);
  CHECK(a.auc == b.auc);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    CHECK(a.points[k].fpr == b.points[k].fpr);
    CHECK(a.points[k].tpr == b.points[k].tpr);
  }
}

TEST_CASE("negating scores complements the AUC") {
  Rng rng(61);
  const auto [scores, labels] = random_scored_set(rng, 35);
  std::vector<double> negated;
  for (double s : scores) negated.push_back(-s);
  CHECK(roc_curve(scores, labels).auc ==
        doctest::Approx(1.0 - roc_curve(negated, labels).auc).epsilon(1e-14));
}

TEST_CASE("roc artifacts are well formed and byte stable") {
  const RocCurve one = roc_curve({0.9, 0.6, 0.6, 0.2}, {1, 1, 0, 0});
  const RocCurve two = roc_curve({0.8, 0.5, 0.4, 0.3}, {1, 0, 1, 0});
  const RocCurve three = roc_curve({0.7, 0.1, 0.9, 0.3}, {0, 0, 1, 1});
  const NamedCurves curves = {{"alpha", one}, {"beta", two}, {"gamma", three}};

  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "ivmkit_roc_test";
  std::filesystem::create_directories(dir);
  emit_roc_plot(curves, dir / "roc");

  const std::string csv = read_file(dir / "roc.csv");
  std::size_t rows = 0;
  for (char ch : csv) rows += ch == '\n' ? 1 : 0;
  CHECK(rows == 1 + one.points.size() + two.points.size() + three.points.size());

  const std::string svg = read_file(dir / "roc.svg");
  CHECK(svg.find("alpha") != std::string::npos);
  CHECK(svg.find("beta") != std::string::npos);
  CHECK(svg.find("gamma") != std::string::npos);
  std::size_t legend_aucs = 0;
  for (std::size_t pos = svg.find("AUC"); pos != std::string::npos;
       pos = svg.find("AUC", pos + 1)) {
    ++legend_aucs;
  }
  CHECK(legend_aucs == 3);

  emit_roc_plot(curves, dir / "roc_again");
  CHECK(read_file(dir / "roc_again.csv") == csv);
  CHECK(read_file(dir / "roc_again.svg") == svg);

  // Golden copy pinned when the render was first verified.
  CHECK(csv == read_file(std::filesystem::path(IVMKIT_GOLDEN_DIR) / "roc_golden.csv"));
}
