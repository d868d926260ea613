#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ivmkit/evaluation.hpp"
#include "ivmkit/io_util.hpp"
#include "ivmkit/ivm.hpp"
#include "ivmkit/traffic.hpp"
#include "testutil.hpp"

using namespace ivmkit;

namespace {

// Values frozen from an independent spreadsheet-style calculation over
// golden/detector_window.csv (window 13:50-13:55 on 2014-04-05).
constexpr double kGoldenExpected[27] = {
    5.5499999999999998, 0.67082039324993692, 0.12086853932431296,
    56.60611214893207,  2.0160808693418497,  0.03561595723157053,
    12.75,              1.1180339887498949,  0.08768894029410941,
    4.9433333333333334, 0.81763305310133461, 0.16540115706702654,
    44.913436533996531, 2.6688618853405108,  0.059422348662195042,
    20.240000000000002, 2.0424250292238391,  0.10091032753082207,
    3.3699999999999997, 0.95782491689690941, 0.28422104358958739,
    68.907656202709873, 1.2578685471693571,  0.01825440911049141,
    8.6366666666666649, 2.3070131173899995,  0.26711846206754147,
};
constexpr std::int64_t kGoldenWindowEnd = 1396705500;  // 2014-04-05T13:55:00Z

const DetectorTriplet kGoldenTriplet{"U1", "C1", "D1"};

std::filesystem::path golden(const char* name) {
  return std::filesystem::path(IVMKIT_GOLDEN_DIR) / name;
}

std::filesystem::path temp_file(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / "ivmkit_traffic_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

// Synthetic detector month: smooth daily speed/flow profiles plus a
// deterministic wobble, two lanes, every slot filled.
std::vector<DetectorRecord> make_detector_days(const DetectorTriplet& triplet,
                                               std::int64_t first_day, int days) {
  std::vector<DetectorRecord> records;
  const std::string* dets[3] = {&triplet.upstream, &triplet.crash, &triplet.downstream};
  for (int day = 0; day < days; ++day) {
    for (std::int64_t slot = 0; slot < 86400 / kSlotSeconds; ++slot) {
      const std::int64_t ts = first_day + day * 86400 + slot * kSlotSeconds;
      const double phase = 2.0 * 3.14159265358979 *
                           static_cast<double>(slot) / (86400.0 / kSlotSeconds);
      for (int seg = 0; seg < 3; ++seg) {
        for (int lane = 1; lane <= 2; ++lane) {
          DetectorRecord r;
          r.detector_id = *dets[seg];
          r.timestamp = ts;
          r.lane = lane;
          r.flow = 5.0 + 2.0 * std::sin(phase) + 0.3 * seg + 0.1 * lane;
          r.speed = 60.0 - 10.0 * std::sin(phase) + 1.5 * seg +
                    0.7 * std::sin(0.01 * static_cast<double>(slot) + day);
          r.occupancy = 12.0 + 5.0 * std::sin(phase) + 0.2 * lane;
          if (r.flow < 0.0) r.flow = 0.0;
          records.push_back(std::move(r));
        }
      }
    }
  }
  return records;
}

}  // namespace

TEST_CASE("constant speeds collapse to mean with zero spread") {
  std::vector<DetectorRecord> records;
  for (int k = 0; k < kSlotsPerWindow; ++k) {
    for (const char* det : {"U", "C", "D"}) {
      records.push_back({det, k * kSlotSeconds, 1, 4.0, 60.0, 10.0});
    }
  }
  const RecordIndex index(records);
  const auto window = aggregate_window(index, {"U", "C", "D"}, 300);
  REQUIRE(window.has_value());
  CHECK(window->values[traffic_feature_index("Mean_Speed_C")] == 60.0);
  CHECK(window->values[traffic_feature_index("Std_Speed_C")] == 0.0);
  CHECK(window->values[traffic_feature_index("CV_Speed_C")] == 0.0);
}

TEST_CASE("three-slot window matches hand arithmetic") {
  std::vector<DetectorRecord> records;
  const double speeds[3] = {50.0, 60.0, 70.0};
  for (int k = 0; k < 3; ++k) {
    for (const char* det : {"U", "C", "D"}) {
      records.push_back({det, k * kSlotSeconds, 1, 2.0, speeds[k], 8.0});
    }
  }
  const RecordIndex index(records);
  AggregationOptions options;
  options.min_records = 3;
  const auto window = aggregate_window(index, {"U", "C", "D"}, 300, options);
  REQUIRE(window.has_value());
  CHECK(window->values[traffic_feature_index("Mean_Speed_U")] == doctest::Approx(60.0));
  CHECK(window->values[traffic_feature_index("Std_Speed_U")] == doctest::Approx(10.0));
  CHECK(window->values[traffic_feature_index("CV_Speed_U")] ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("golden window reproduces the desk calculation") {
  RowErrorReport report;
  const auto records = load_detector_csv(golden("detector_window.csv"), &report);
  CHECK(report.errors.empty());
  const RecordIndex index(records);
  const auto window = aggregate_window(index, kGoldenTriplet, kGoldenWindowEnd);
  REQUIRE(window.has_value());
  for (int j = 0; j < kNumTrafficFeatures; ++j) {
    CAPTURE(traffic_feature_names()[static_cast<std::size_t>(j)]);
    CHECK(std::abs(window->values[static_cast<std::size_t>(j)] - kGoldenExpected[j]) <=
          1e-9);
  }
  CHECK_FALSE(window->degenerate_cv);
}

TEST_CASE("insufficient slots reject the window with a completeness report") {
  RowErrorReport load_report;
  const auto records = load_detector_csv(golden("detector_window.csv"), &load_report);
  const RecordIndex index(records);
  AggregationReport report;
  // Shift the window so only part of the data is covered.
  const auto window =
      aggregate_window(index, kGoldenTriplet, kGoldenWindowEnd - 200, {}, &report);
  CHECK_FALSE(window.has_value());
  CHECK(report.slots_found[0] < kSlotsPerWindow);
  CHECK_FALSE(report.reason.empty());
}

TEST_CASE("case windows end five minutes before the crash") {
  const std::int64_t day = 1396656000;  // 2014-04-05T00:00:00Z
  const auto records =
      make_detector_days(kGoldenTriplet, day, 1);
  const RecordIndex index(records);

  SUBCASE("crash at 14:00 uses 13:50 to 13:55") {
    const std::int64_t crash = parse_timestamp("2014-04-05T14:00:00");
    const auto window = extract_case_window(index, kGoldenTriplet, crash);
    REQUIRE(window.has_value());
    CHECK(window->window_end == crash - 300);
    CHECK(window->window_end == parse_timestamp("2014-04-05T13:55:00"));
  }
  SUBCASE("crash at 15:25 uses 15:15 to 15:20") {
    const std::int64_t crash = parse_timestamp("2014-04-05T15:25:00");
    const auto window = extract_case_window(index, kGoldenTriplet, crash);
    REQUIRE(window.has_value());
    CHECK(window->window_end == parse_timestamp("2014-04-05T15:20:00"));
  }
}

TEST_CASE("windows crossing midnight use absolute timestamps") {
  const std::int64_t day = 1396656000;
  const auto records = make_detector_days(kGoldenTriplet, day - 86400, 2);
  const RecordIndex index(records);
  const std::int64_t crash = parse_timestamp("2014-04-05T00:07:00");
  const auto window = extract_case_window(index, kGoldenTriplet, crash);
  REQUIRE(window.has_value());
  CHECK(window->window_end == parse_timestamp("2014-04-05T00:02:00"));
  // Window start 23:57 the previous day is covered by the earlier data.
  CHECK(window->window_end - kWindowSeconds == parse_timestamp("2014-04-04T23:57:00"));
}

TEST_CASE("control matching samples candidate days deterministically") {
  const std::int64_t day0 = 1396224000;  // 2014-03-31T00:00:00Z
  const auto records = make_detector_days(kGoldenTriplet, day0, 10);
  const RecordIndex index(records);
  std::vector<std::int64_t> candidates;
  for (int d = 0; d < 10; ++d) candidates.push_back(day0 + d * 86400);
  const std::int64_t case_end = day0 + 4 * 86400 + 50100;  // 13:55 on day 4

  Rng rng_a(99);
  const MatchResult a = match_controls(index, kGoldenTriplet, case_end, candidates, 4, rng_a);
  REQUIRE(a.controls.size() == 4);
  CHECK_FALSE(a.shortfall);
  Rng rng_b(99);
  const MatchResult b = match_controls(index, kGoldenTriplet, case_end, candidates, 4, rng_b);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(a.controls[k].window_end == b.controls[k].window_end);
    // Same clock time on the sampled day.
    const std::int64_t clock = a.controls[k].window_end % 86400;
    CHECK(clock == case_end % 86400);
  }
}

TEST_CASE("too few candidate days yields a flagged short stratum") {
  const std::int64_t day0 = 1396224000;
  const auto records = make_detector_days(kGoldenTriplet, day0, 3);
  const RecordIndex index(records);
  const std::vector<std::int64_t> candidates = {day0, day0 + 86400, day0 + 2 * 86400};
  Rng rng(5);
  const MatchResult result =
      match_controls(index, kGoldenTriplet, day0 + 50100, candidates, 4, rng);
  CHECK(result.controls.size() == 3);
  CHECK(result.shortfall);
}

TEST_CASE("a generated week assembles one stratum per case") {
  const std::int64_t day0 = 1396224000;
  const int days = 9;
  const auto records = make_detector_days(kGoldenTriplet, day0, days);
  const RecordIndex index(records);

  // Crashes on days 0..3 at varying clock times; remaining days are
  // candidate crash-free days.
  std::vector<std::int64_t> crash_times;
  for (int c = 0; c < 4; ++c) {
    crash_times.push_back(day0 + c * 86400 + 36000 + c * 1200);
  }
  std::vector<std::int64_t> free_days;
  for (int d = 4; d < days; ++d) free_days.push_back(day0 + d * 86400);

  CaseControlDataset data;
  Rng rng(7);
  int stratum = 0;
  for (std::int64_t crash : crash_times) {
    const auto case_window = extract_case_window(index, kGoldenTriplet, crash);
    REQUIRE(case_window.has_value());
    const MatchResult controls = match_controls(
        index, kGoldenTriplet, case_window->window_end, free_days, 4, rng);
    data.observations.push_back({*case_window, 1, stratum});
    for (const FeatureWindow& w : controls.controls) {
      data.observations.push_back({w, 0, stratum});
    }
    if (controls.shortfall) data.short_strata.push_back(stratum);
    ++stratum;
  }

  CHECK(data.stratum_count() == 4);
  CHECK(data.short_strata.empty());
  double controls_per_case = 0.0;
  for (const auto& obs : data.observations) controls_per_case += obs.label == 0 ? 1 : 0;
  controls_per_case /= 4.0;
  CHECK(controls_per_case <= 4.0);

  // CV consistency on every emitted window.
  for (const auto& obs : data.observations) {
    for (int seg = 0; seg < 3; ++seg) {
      for (int measure = 0; measure < 3; ++measure) {
        const double mean = obs.window.values[static_cast<std::size_t>(seg * 9 + measure * 3)];
        const double sd = obs.window.values[static_cast<std::size_t>(seg * 9 + measure * 3 + 1)];
        const double cv = obs.window.values[static_cast<std::size_t>(seg * 9 + measure * 3 + 2)];
        if (mean > 0.0) CHECK(std::abs(cv - sd / mean) <= 1e-12);
      }
    }
  }
}

TEST_CASE("train/test split keeps strata intact") {
  SyntheticSpec spec = SyntheticSpec::defaults();
  spec.n_cases = 10;
  const CaseControlDataset data = generate_synthetic(spec, 3);
  const auto [train, test] = train_test_split(data, 0.7, 17);

  CHECK(train.stratum_count() == 7);
  CHECK(test.stratum_count() == 3);
  for (const auto& obs : train.observations) {
    for (const auto& other : test.observations) {
      CHECK(obs.stratum != other.stratum);
    }
  }
  // Complete strata keep the 4:1 ratio on both sides.
  auto ratio = [](const CaseControlDataset& d) {
    double cases = 0, controls = 0;
    for (const auto& obs : d.observations) (obs.label == 1 ? cases : controls) += 1;
    return controls / cases;
  };
  CHECK(ratio(train) == doctest::Approx(4.0));
  CHECK(ratio(test) == doctest::Approx(4.0));
}

TEST_CASE("zero crash effect leaves cases and controls indistinguishable") {
  SyntheticSpec spec = SyntheticSpec::defaults();
  spec.n_cases = 500;
  spec.controls_per_case = 1;
  spec.crash_effect.setZero();
  const CaseControlDataset data = generate_synthetic(spec, 2121);

  for (const char* feature : {"Mean_Speed_C", "CV_Speed_U", "Mean_Flow_C",
                              "Std_Occupancy_C"}) {
    const int j = traffic_feature_index(feature);
    std::vector<double> cases, controls;
    for (const auto& obs : data.observations) {
      (obs.label == 1 ? cases : controls)
          .push_back(obs.window.values[static_cast<std::size_t>(j)]);
    }
    CAPTURE(feature);
    CHECK(testutil::ks_two_sample_p(cases, controls) > 0.01);
  }
}

TEST_CASE("control marginals hit the published summary statistics") {
  SyntheticSpec spec = SyntheticSpec::defaults();
  spec.n_cases = 500;
  spec.controls_per_case = 4;  // 2000 controls
  const CaseControlDataset data = generate_synthetic(spec, 808);

  const struct {
    const char* name;
    double mean, sd, lo, hi;
  } targets[] = {
      {"Mean_Speed_C", 52.40, 21.47, 7.59, 94.34},
      {"CV_Speed_U", 0.34, 0.23, 0.06, 1.98},
      {"Mean_Flow_C", 5.82, 2.78, 0.01, 11.80},
      {"Std_Occupancy_C", 9.66, 7.59, 0.13, 44.37},
  };
  for (const auto& target : targets) {
    const int j = traffic_feature_index(target.name);
    double sum = 0.0;
    long count = 0;
    double lowest = 1e300, highest = -1e300;
    for (const auto& obs : data.observations) {
      const double v = obs.window.values[static_cast<std::size_t>(j)];
      if (obs.label == 0) {
        sum += v;
        ++count;
      }
      lowest = std::min(lowest, v);
      highest = std::max(highest, v);
    }
    CAPTURE(target.name);
    CHECK(count == 2000);
    const double tolerance = 3.0 * target.sd / std::sqrt(2000.0);
    CHECK(std::abs(sum / static_cast<double>(count) - target.mean) <= tolerance);
    CHECK(lowest >= target.lo);   // truncation respects the bounds exactly
    CHECK(highest <= target.hi);
  }
}

TEST_CASE("a two-sigma single-feature effect is learnable end to end") {
  SyntheticSpec spec = SyntheticSpec::defaults();
  spec.n_cases = 300;
  spec.crash_effect.setZero();
  spec.crash_effect[traffic_feature_index("CV_Speed_U")] = 2.0 * 0.23;
  const CaseControlDataset data = generate_synthetic(spec, 606);
  const auto [train_cc, test_cc] = train_test_split(data, 0.7, 42);

  const std::vector<int> features = {
      traffic_feature_index("Mean_Speed_C"), traffic_feature_index("CV_Speed_U"),
      traffic_feature_index("Mean_Flow_C"),
      traffic_feature_index("Std_Occupancy_C")};
  Dataset train = train_cc.to_dataset().select_columns(features);
  Dataset test = test_cc.to_dataset().select_columns(features);
  const Standardizer scaler = Standardizer::fit(train.X);
  train.X = scaler.transform(train.X);
  test.X = scaler.transform(test.X);

  IvmConfig config;
  config.kernel = KernelSpec::radial(0.125);
  config.lambda = 0.01;
  config.conv_tol = 1e-3;
  config.max_import = 12;
  config.selection = IvmSelection::OneStep;
  const IvmModel model = fit_ivm(train, config);

  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < test.n(); ++i) {
    scores.push_back(predict_ivm(model, Eigen::VectorXd(test.X.row(i))));
    labels.push_back(test.y[i]);
  }
  CHECK(roc_curve(scores, labels).auc >= 0.9);
}

TEST_CASE("detector csv: empty file with a header loads cleanly") {
  const auto path = temp_file("empty.csv");
  write_file_atomic(path, "detector_id,timestamp,lane,flow,speed,occupancy\n");
  RowErrorReport report;
  const auto records = load_detector_csv(path, &report);
  CHECK(records.empty());
  CHECK(report.errors.empty());
  CHECK(report.rows_ok == 0);
}

TEST_CASE("detector csv: invalid rows are skipped with line numbers") {
  const auto path = temp_file("invalid.csv");
  write_file_atomic(path,
                    "detector_id,timestamp,lane,flow,speed,occupancy\n"
                    "D1,0,1,4.0,60.0,10.0\n"
                    "D1,20,1,4.0,60.0,105.0\n"   // occupancy out of range
                    "D1,30,1,4.0,60.0,10.0\n"    // off-grid timestamp
                    "D1,40,1,-1.0,60.0,10.0\n"); // negative flow
  RowErrorReport report;
  const auto records = load_detector_csv(path, &report);
  CHECK(records.size() == 1);
  REQUIRE(report.errors.size() == 3);
  CHECK(report.errors[0].line == 3);
  CHECK(report.errors[0].message.find("occupancy") != std::string::npos);
  CHECK(report.errors[1].line == 4);
  CHECK(report.errors[2].line == 5);

  CsvLoadOptions strict;
  strict.max_errors = 1;
  CHECK_THROWS_AS(load_detector_csv(path, nullptr, strict), DataError);
}

TEST_CASE("detector csv: missing columns are fatal") {
  const auto path = temp_file("badheader.csv");
  write_file_atomic(path, "detector_id,timestamp,lane,flow,speed\nD1,0,1,4,60\n");
  CHECK_THROWS_AS(load_detector_csv(path), DataError);
}

TEST_CASE("detector csv accepts ISO-8601 timestamps") {
  const auto path = temp_file("iso.csv");
  write_file_atomic(path,
                    "detector_id,timestamp,lane,flow,speed,occupancy\n"
                    "D1,2014-04-05T13:50:00,1,4.0,60.0,10.0\n"
                    "D1,2014-04-05 13:50:20,1,4.0,61.0,10.0\n");
  RowErrorReport report;
  const auto records = load_detector_csv(path, &report);
  REQUIRE(records.size() == 2);
  CHECK(report.errors.empty());
  CHECK(records[0].timestamp == 1396705800);
  CHECK(records[1].timestamp == 1396705820);
}

TEST_CASE("detector csv round-trips exactly") {
  RowErrorReport report;
  const auto records = load_detector_csv(golden("detector_window.csv"), &report);
  const auto path = temp_file("roundtrip.csv");
  save_detector_csv(records, path);
  const auto again = load_detector_csv(path);
  REQUIRE(again.size() == records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    CHECK(again[k].detector_id == records[k].detector_id);
    CHECK(again[k].timestamp == records[k].timestamp);
    CHECK(again[k].lane == records[k].lane);
    CHECK(again[k].flow == records[k].flow);
    CHECK(again[k].speed == records[k].speed);
    CHECK(again[k].occupancy == records[k].occupancy);
  }
}

TEST_CASE("case-control csv round-trips exactly") {
  SyntheticSpec spec = SyntheticSpec::defaults();
  spec.n_cases = 6;
  const CaseControlDataset data = generate_synthetic(spec, 12);
  const auto path = temp_file("cc_roundtrip.csv");
  save_case_control_csv(data, path);
  const CaseControlDataset again = load_case_control_csv(path);
  REQUIRE(again.observations.size() == data.observations.size());
  for (std::size_t k = 0; k < data.observations.size(); ++k) {
    CHECK(again.observations[k].stratum == data.observations[k].stratum);
    CHECK(again.observations[k].label == data.observations[k].label);
    CHECK(again.observations[k].window.window_end ==
          data.observations[k].window.window_end);
    for (int j = 0; j < kNumTrafficFeatures; ++j) {
      CHECK(again.observations[k].window.values[static_cast<std::size_t>(j)] ==
            data.observations[k].window.values[static_cast<std::size_t>(j)]);
    }
  }
}

TEST_CASE("truncated-normal calibration hits the requested mean") {
  const double mu = calibrate_truncated_mean(0.34, 0.23, 0.06, 1.98);
  CHECK(truncated_normal_mean(mu, 0.23, 0.06, 1.98) ==
        doctest::Approx(0.34).epsilon(1e-10));
  CHECK_THROWS_AS(calibrate_truncated_mean(2.5, 0.23, 0.06, 1.98), InvalidInputError);
}

TEST_CASE("synthetic spec validation") {
  SyntheticSpec spec = SyntheticSpec::defaults();
  spec.marginals[0].stddev = 0.0;
  CHECK_THROWS_AS(spec.validate(), InvalidInputError);
  spec = SyntheticSpec::defaults();
  spec.crash_effect = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(spec.validate(), DimensionError);
  spec = SyntheticSpec::defaults();
  spec.marginals[2].name = "Not_A_Feature";
  CHECK_THROWS_AS(spec.validate(), InvalidInputError);
}
