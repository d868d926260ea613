#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ivmkit/dataset.hpp"
#include "ivmkit/rng.hpp"

namespace ivmkit {

// 20-second lane records aggregate into 5-minute windows of 15 slots.
constexpr std::int64_t kSlotSeconds = 20;
constexpr std::int64_t kWindowSeconds = 300;
constexpr int kSlotsPerWindow = 15;
constexpr int kNumTrafficFeatures = 27;

/// One 20-second per-lane measurement from a dual-loop detector.
struct DetectorRecord {
  std::string detector_id;
  std::int64_t timestamp = 0;  // seconds since epoch, 20-second grid
  int lane = 0;
  double flow = 0.0;       // vehicles per lane per 20 s
  double speed = 0.0;      // km/h
  double occupancy = 0.0;  // percent
};

/// Upstream / crash / downstream detector station ids.
struct DetectorTriplet {
  std::string upstream;
  std::string crash;
  std::string downstream;
};

/// Canonical order: segment (U, C, D) outer, measure (Flow, Speed,
/// Occupancy) middle, statistic (Mean, Std, CV) inner.
const std::vector<std::string>& traffic_feature_names();
int traffic_feature_index(const std::string& name);

/// The 27 five-minute features for one (detector triplet, window) pair.
struct FeatureWindow {
  std::array<double, kNumTrafficFeatures> values{};
  std::int64_t window_end = 0;  // window covers [window_end - 300 s, window_end)
  DetectorTriplet detectors;
  bool degenerate_cv = false;  // a zero-mean series forced some CV to 0
};

struct CaseControlObservation {
  FeatureWindow window;
  int label = 0;  // 1 = crash case, 0 = matched control
  int stratum = 0;
};

/// Matched case-control data: each stratum holds one case and its controls,
/// matched on detector station and time of day.
struct CaseControlDataset {
  std::vector<CaseControlObservation> observations;
  std::vector<int> short_strata;  // strata that received fewer controls than requested

  int stratum_count() const;
  std::vector<int> stratum_ids() const;  // distinct, in first-appearance order
  Dataset to_dataset() const;
};

struct AggregationOptions {
  int min_records = 10;            // minimum filled slots per segment
  bool flow_weighted_speed = true; // equal-weight mean otherwise (and when flow sums to 0)
};

struct AggregationReport {
  std::array<int, 3> slots_found{0, 0, 0};  // U, C, D
  std::string reason;
};

/// Records grouped by detector and 20-second slot for window extraction.
class RecordIndex {
 public:
  RecordIndex() = default;
  explicit RecordIndex(const std::vector<DetectorRecord>& records);

  struct Slot {
    std::vector<double> flow;
    std::vector<double> speed;
    std::vector<double> occupancy;
  };

  const Slot* find(const std::string& detector, std::int64_t slot_time) const;

 private:
  std::map<std::string, std::map<std::int64_t, Slot>> slots_;
};

/// Aggregates [window_end - 300 s, window_end) into the 27 features. Lane
/// values are averaged per slot first (speed flow-weighted), then Mean, Std
/// (sample, n-1) and CV are taken over the slot values. Returns nullopt and
/// fills `report` when any segment has fewer than min_records slots.
std::optional<FeatureWindow> aggregate_window(const RecordIndex& index,
                                              const DetectorTriplet& triplet,
                                              std::int64_t window_end,
                                              const AggregationOptions& options = {},
                                              AggregationReport* report = nullptr);

/// Pre-crash feature window: [crash_time - 600 s, crash_time - 300 s). The
/// five minutes immediately before the crash are skipped to absorb reporting
/// inaccuracies in the crash time.
std::optional<FeatureWindow> extract_case_window(const RecordIndex& index,
                                                 const DetectorTriplet& triplet,
                                                 std::int64_t crash_time,
                                                 const AggregationOptions& options = {},
                                                 AggregationReport* report = nullptr);

struct MatchResult {
  std::vector<FeatureWindow> controls;
  bool shortfall = false;  // fewer than n valid candidate days
};

/// Samples candidate crash-free days without replacement (seeded) and
/// aggregates the control window at the same detectors and clock interval.
/// Days whose window fails aggregation are passed over; when fewer than n
/// valid days exist the result is shorter and flagged.
MatchResult match_controls(const RecordIndex& index, const DetectorTriplet& triplet,
                           std::int64_t case_window_end,
                           const std::vector<std::int64_t>& candidate_day_starts,
                           int n, Rng& rng, const AggregationOptions& options = {});

/// Splits by stratum so a case and its controls never straddle the split.
std::pair<CaseControlDataset, CaseControlDataset> train_test_split(
    const CaseControlDataset& data, double train_fraction, std::uint64_t seed);

struct FeatureMarginal {
  std::string name;
  double mean = 0.0;
  double stddev = 1.0;
  double min = 0.0;
  double max = 1.0;
};

/// Synthetic stand-in for the expressway dataset: truncated-normal marginals
/// (means calibrated so the post-truncation mean hits the target), a shared
/// latent factor for feature correlation, and a crash-effect shift applied to
/// case observations.
struct SyntheticSpec {
  std::vector<FeatureMarginal> marginals;  // one per generated feature
  Eigen::VectorXd crash_effect;            // raw-units shift of the case mean
  double common_corr = 0.25;               // variance share of the shared factor
  int n_cases = 120;
  int controls_per_case = 4;

  static SyntheticSpec defaults();  // 27 features, expressway-calibrated
  void validate() const;
};

struct SyntheticTruth {
  std::vector<std::string> feature_names;
  Eigen::VectorXd effect;
  std::uint64_t seed = 0;
};

CaseControlDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed,
                                      SyntheticTruth* truth = nullptr);

/// Mean of a normal(mu, sigma) truncated to [lo, hi].
double truncated_normal_mean(double mu, double sigma, double lo, double hi);

/// Pre-truncation mu whose truncated mean equals `target`.
double calibrate_truncated_mean(double target, double sigma, double lo, double hi);

struct RowError {
  int line = 0;  // 1-based, header is line 1
  std::string message;
};

struct RowErrorReport {
  std::vector<RowError> errors;
  std::size_t rows_ok = 0;
};

struct CsvLoadOptions {
  std::size_t max_errors = static_cast<std::size_t>(-1);  // exceed -> DataError
};

/// Schema: detector_id,timestamp,lane,flow,speed,occupancy. Timestamps are
/// epoch seconds or ISO-8601 (YYYY-MM-DDTHH:MM:SS, optional trailing Z).
/// Invalid rows are skipped and reported with their line numbers.
std::vector<DetectorRecord> load_detector_csv(const std::filesystem::path& path,
                                              RowErrorReport* report = nullptr,
                                              const CsvLoadOptions& options = {});
void save_detector_csv(const std::vector<DetectorRecord>& records,
                       const std::filesystem::path& path);

/// Schema: stratum_id,label,<27 feature columns>,window_end,detector_u,
/// detector_c,detector_d. Numeric values round-trip exactly.
CaseControlDataset load_case_control_csv(const std::filesystem::path& path,
                                         RowErrorReport* report = nullptr,
                                         const CsvLoadOptions& options = {});
void save_case_control_csv(const CaseControlDataset& data,
                           const std::filesystem::path& path);

/// ISO-8601 (or plain epoch-seconds) to epoch seconds.
std::int64_t parse_timestamp(const std::string& text);

}  // namespace ivmkit
