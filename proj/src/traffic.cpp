#include "ivmkit/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "ivmkit/errors.hpp"
#include "ivmkit/io_util.hpp"

namespace ivmkit {

namespace {

const char* kSegments[3] = {"U", "C", "D"};
const char* kMeasures[3] = {"Flow", "Speed", "Occupancy"};
const char* kStats[3] = {"Mean", "Std", "CV"};

struct SeriesStats {
  double mean = 0.0;
  double stddev = 0.0;
  double cv = 0.0;
  bool degenerate = false;
};

SeriesStats series_stats(const std::vector<double>& v) {
  SeriesStats s;
  const double n = static_cast<double>(v.size());
  for (double x : v) s.mean += x;
  s.mean /= n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) {
      const double d = x - s.mean;
      ss += d * d;
    }
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  if (s.mean > 0.0) {
    s.cv = s.stddev / s.mean;
  } else {
    s.cv = 0.0;
    s.degenerate = true;
  }
  return s;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Days from 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

}  // namespace

const std::vector<std::string>& traffic_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const char* seg : kSegments) {
      for (const char* measure : kMeasures) {
        for (const char* stat : kStats) {
          out.push_back(std::string(stat) + "_" + measure + "_" + seg);
        }
      }
    }
    return out;
  }();
  return names;
}

int traffic_feature_index(const std::string& name) {
  const auto& names = traffic_feature_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  throw InvalidInputError("unknown traffic feature: " + name);
}

int CaseControlDataset::stratum_count() const {
  return static_cast<int>(stratum_ids().size());
}

std::vector<int> CaseControlDataset::stratum_ids() const {
  std::vector<int> ids;
  for (const auto& obs : observations) {
    if (std::find(ids.begin(), ids.end(), obs.stratum) == ids.end()) {
      ids.push_back(obs.stratum);
    }
  }
  return ids;
}

Dataset CaseControlDataset::to_dataset() const {
  Dataset out;
  out.X.resize(static_cast<long>(observations.size()), kNumTrafficFeatures);
  out.y.resize(static_cast<long>(observations.size()));
  for (std::size_t i = 0; i < observations.size(); ++i) {
    for (int j = 0; j < kNumTrafficFeatures; ++j) {
      out.X(static_cast<long>(i), j) = observations[i].window.values[static_cast<std::size_t>(j)];
    }
    out.y[static_cast<long>(i)] = observations[i].label;
  }
  out.feature_names = traffic_feature_names();
  return out;
}

RecordIndex::RecordIndex(const std::vector<DetectorRecord>& records) {
  for (const DetectorRecord& r : records) {
    Slot& slot = slots_[r.detector_id][r.timestamp];
    slot.flow.push_back(r.flow);
    slot.speed.push_back(r.speed);
    slot.occupancy.push_back(r.occupancy);
  }
}

const RecordIndex::Slot* RecordIndex::find(const std::string& detector,
                                           std::int64_t slot_time) const {
  const auto det = slots_.find(detector);
  if (det == slots_.end()) return nullptr;
  const auto slot = det->second.find(slot_time);
  if (slot == det->second.end()) return nullptr;
  return &slot->second;
}

std::optional<FeatureWindow> aggregate_window(const RecordIndex& index,
                                              const DetectorTriplet& triplet,
                                              std::int64_t window_end,
                                              const AggregationOptions& options,
                                              AggregationReport* report) {
  const std::string* detectors[3] = {&triplet.upstream, &triplet.crash,
                                     &triplet.downstream};
  FeatureWindow window;
  window.window_end = window_end;
  window.detectors = triplet;

  AggregationReport local;
  for (int seg = 0; seg < 3; ++seg) {
    std::vector<double> flow_series, speed_series, occ_series;
    for (std::int64_t t = window_end - kWindowSeconds; t < window_end;
         t += kSlotSeconds) {
      const RecordIndex::Slot* slot = index.find(*detectors[seg], t);
      if (slot == nullptr || slot->flow.empty()) continue;
      const double lanes = static_cast<double>(slot->flow.size());

      double flow_sum = 0.0, occ_sum = 0.0;
      for (std::size_t l = 0; l < slot->flow.size(); ++l) {
        flow_sum += slot->flow[l];
        occ_sum += slot->occupancy[l];
      }
      flow_series.push_back(flow_sum / lanes);
      occ_series.push_back(occ_sum / lanes);

      double speed = 0.0;
      if (options.flow_weighted_speed && flow_sum > 0.0) {
        for (std::size_t l = 0; l < slot->speed.size(); ++l) {
          speed += slot->flow[l] * slot->speed[l];
        }
        speed /= flow_sum;
      } else {
        for (double v : slot->speed) speed += v;
        speed /= lanes;
      }
      speed_series.push_back(speed);
    }

    local.slots_found[static_cast<std::size_t>(seg)] =
        static_cast<int>(flow_series.size());
    if (static_cast<int>(flow_series.size()) < options.min_records) {
      local.reason = std::string("segment ") + kSegments[seg] + " (" +
                     *detectors[seg] + ") has " +
                     std::to_string(flow_series.size()) + " slots, needs " +
                     std::to_string(options.min_records);
      if (report != nullptr) *report = local;
      return std::nullopt;
    }

    const std::vector<double>* series[3] = {&flow_series, &speed_series, &occ_series};
    for (int measure = 0; measure < 3; ++measure) {
      const SeriesStats stats = series_stats(*series[measure]);
      const int base = seg * 9 + measure * 3;
      window.values[static_cast<std::size_t>(base + 0)] = stats.mean;
      window.values[static_cast<std::size_t>(base + 1)] = stats.stddev;
      window.values[static_cast<std::size_t>(base + 2)] = stats.cv;
      window.degenerate_cv = window.degenerate_cv || stats.degenerate;
    }
  }
  if (report != nullptr) *report = local;
  return window;
}

std::optional<FeatureWindow> extract_case_window(const RecordIndex& index,
                                                 const DetectorTriplet& triplet,
                                                 std::int64_t crash_time,
                                                 const AggregationOptions& options,
                                                 AggregationReport* report) {
  return aggregate_window(index, triplet, crash_time - kWindowSeconds, options, report);
}

MatchResult match_controls(const RecordIndex& index, const DetectorTriplet& triplet,
                           std::int64_t case_window_end,
                           const std::vector<std::int64_t>& candidate_day_starts,
                           int n, Rng& rng, const AggregationOptions& options) {
  if (n < 1) throw InvalidInputError("control count must be >= 1");
  const std::int64_t day = 86400;
  const std::int64_t clock = case_window_end - day * floor_div(case_window_end, day);

  std::vector<std::int64_t> days = candidate_day_starts;
  rng.shuffle(days);

  MatchResult result;
  for (std::int64_t day_start : days) {
    if (static_cast<int>(result.controls.size()) == n) break;
    auto window = aggregate_window(index, triplet, day_start + clock, options);
    if (window) result.controls.push_back(std::move(*window));
  }
  result.shortfall = static_cast<int>(result.controls.size()) < n;
  return result;
}

std::pair<CaseControlDataset, CaseControlDataset> train_test_split(
    const CaseControlDataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
    throw InvalidInputError("train fraction must lie in (0, 1)");
  }
  std::vector<int> ids = data.stratum_ids();
  if (ids.size() < 2) {
    throw InvalidInputError("split requires at least two strata");
  }
  Rng rng(seed);
  rng.shuffle(ids);
  std::size_t n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(ids.size())));
  n_train = std::min(std::max<std::size_t>(n_train, 1), ids.size() - 1);

  std::vector<char> in_train_by_id;
  int max_id = 0;
  for (int id : ids) max_id = std::max(max_id, id);
  in_train_by_id.assign(static_cast<std::size_t>(max_id) + 1, 0);
  for (std::size_t k = 0; k < n_train; ++k) {
    in_train_by_id[static_cast<std::size_t>(ids[k])] = 1;
  }

  std::pair<CaseControlDataset, CaseControlDataset> out;
  for (const auto& obs : data.observations) {
    (in_train_by_id[static_cast<std::size_t>(obs.stratum)] ? out.first : out.second)
        .observations.push_back(obs);
  }
  for (int s : data.short_strata) {
    (in_train_by_id[static_cast<std::size_t>(s)] ? out.first : out.second)
        .short_strata.push_back(s);
  }
  return out;
}

double truncated_normal_mean(double mu, double sigma, double lo, double hi) {
  const double alpha = (lo - mu) / sigma;
  const double beta = (hi - mu) / sigma;
  const double z = normal_cdf(beta) - normal_cdf(alpha);
  if (z <= 0.0) {
    // Degenerate truncation; the mass sits at the nearer bound.
    return mu < lo ? lo : hi;
  }
  return mu + sigma * (normal_pdf(alpha) - normal_pdf(beta)) / z;
}

double calibrate_truncated_mean(double target, double sigma, double lo, double hi) {
  if (!(target > lo) || !(target < hi)) {
    throw InvalidInputError("target mean must lie strictly inside the bounds");
  }
  // truncated mean is increasing in mu; bisection is plenty.
  double low = lo - 10.0 * sigma;
  double high = hi + 10.0 * sigma;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (low + high);
    (truncated_normal_mean(mid, sigma, lo, hi) < target ? low : high) = mid;
  }
  return 0.5 * (low + high);
}

void SyntheticSpec::validate() const {
  if (marginals.empty()) throw InvalidInputError("synthetic spec has no marginals");
  std::vector<int> seen;
  for (const FeatureMarginal& m : marginals) {
    const int slot = traffic_feature_index(m.name);  // throws for unknown names
    if (std::find(seen.begin(), seen.end(), slot) != seen.end()) {
      throw InvalidInputError("duplicate marginal: " + m.name);
    }
    seen.push_back(slot);
    if (!(m.stddev > 0.0)) {
      throw InvalidInputError("marginal stddev must be positive: " + m.name);
    }
    if (!(m.min < m.max)) {
      throw InvalidInputError("marginal bounds must satisfy min < max: " + m.name);
    }
    if (!(m.mean > m.min) || !(m.mean < m.max)) {
      throw InvalidInputError("marginal mean must lie inside the bounds: " + m.name);
    }
  }
  if (crash_effect.size() != static_cast<long>(marginals.size())) {
    throw DimensionError("crash effect length must match marginal count",
                         static_cast<long>(marginals.size()), crash_effect.size());
  }
  if (!(common_corr >= 0.0) || !(common_corr < 1.0)) {
    throw InvalidInputError("common_corr must lie in [0, 1)");
  }
  if (n_cases < 1) throw InvalidInputError("n_cases must be >= 1");
  if (controls_per_case < 1) throw InvalidInputError("controls_per_case must be >= 1");
}

SyntheticSpec SyntheticSpec::defaults() {
  SyntheticSpec spec;
  auto add = [&](const std::string& name, double mean, double sd, double lo, double hi) {
    spec.marginals.push_back({name, mean, sd, lo, hi});
  };
  // Plausible urban-expressway scales; the four model inputs below override
  // these with the published summary statistics.
  for (const char* seg : {"U", "C", "D"}) {
    add(std::string("Mean_Flow_") + seg, 5.7, 2.7, 0.01, 11.6);
    add(std::string("Std_Flow_") + seg, 1.9, 0.85, 0.05, 5.5);
    add(std::string("CV_Flow_") + seg, 0.35, 0.16, 0.03, 1.5);
    add(std::string("Mean_Speed_") + seg, 53.5, 20.8, 8.2, 95.1);
    add(std::string("Std_Speed_") + seg, 6.8, 3.9, 0.15, 24.0);
    add(std::string("CV_Speed_") + seg, 0.16, 0.12, 0.01, 1.1);
    add(std::string("Mean_Occupancy_") + seg, 14.5, 9.8, 0.2, 58.0);
    add(std::string("Std_Occupancy_") + seg, 9.2, 7.1, 0.1, 42.0);
    add(std::string("CV_Occupancy_") + seg, 0.6, 0.32, 0.02, 2.4);
  }
  auto set = [&](const std::string& name, double mean, double sd, double lo, double hi) {
    FeatureMarginal& m = spec.marginals[static_cast<std::size_t>(traffic_feature_index(name))];
    m.mean = mean;
    m.stddev = sd;
    m.min = lo;
    m.max = hi;
  };
  set("Mean_Speed_C", 52.40, 21.47, 7.59, 94.34);
  set("CV_Speed_U", 0.34, 0.23, 0.06, 1.98);
  set("Mean_Flow_C", 5.82, 2.78, 0.01, 11.80);
  set("Std_Occupancy_C", 9.66, 7.59, 0.13, 44.37);

  // Congestion-onset signature (model assumption): slower crash segment,
  // choppier upstream speeds, denser flow, more volatile occupancy.
  spec.crash_effect = Eigen::VectorXd::Zero(kNumTrafficFeatures);
  spec.crash_effect[traffic_feature_index("Mean_Speed_C")] = -1.0 * 21.47;
  spec.crash_effect[traffic_feature_index("CV_Speed_U")] = 0.8 * 0.23;
  spec.crash_effect[traffic_feature_index("Mean_Flow_C")] = 0.5 * 2.78;
  spec.crash_effect[traffic_feature_index("Std_Occupancy_C")] = 0.8 * 7.59;
  return spec;
}

CaseControlDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed,
                                      SyntheticTruth* truth) {
  spec.validate();
  const std::size_t d = spec.marginals.size();

  std::vector<double> mu(d);
  std::vector<std::size_t> slot(d);  // canonical feature index per marginal
  for (std::size_t j = 0; j < d; ++j) {
    mu[j] = calibrate_truncated_mean(spec.marginals[j].mean, spec.marginals[j].stddev,
                                     spec.marginals[j].min, spec.marginals[j].max);
    slot[j] = static_cast<std::size_t>(traffic_feature_index(spec.marginals[j].name));
  }

  const double shared = std::sqrt(spec.common_corr);
  const double own = std::sqrt(1.0 - spec.common_corr);

  Rng root(seed);
  CaseControlDataset out;

  // 2014-04-02T00:00:00Z; strata step through the month 10 minutes apart.
  const std::int64_t base_time = 1396396800;

  for (int s = 0; s < spec.n_cases; ++s) {
    Rng stratum_rng = root.split(static_cast<std::uint64_t>(s));
    const int station = s % 40;
    DetectorTriplet triplet{"LD" + std::to_string(3 * station + 1),
                            "LD" + std::to_string(3 * station + 2),
                            "LD" + std::to_string(3 * station + 3)};
    const std::int64_t case_end = base_time + 600LL * s;

    for (int member = 0; member <= spec.controls_per_case; ++member) {
      const bool is_case = member == 0;
      Rng obs_rng = stratum_rng.split(static_cast<std::uint64_t>(member));
      const double g = obs_rng.next_normal();

      CaseControlObservation obs;
      obs.label = is_case ? 1 : 0;
      obs.stratum = s;
      obs.window.window_end = is_case ? case_end : case_end + 86400LL * member;
      obs.window.detectors = triplet;
      for (std::size_t j = 0; j < d; ++j) {
        const FeatureMarginal& m = spec.marginals[j];
        const double center = mu[j] + (is_case ? spec.crash_effect[static_cast<long>(j)] : 0.0);
        double x = 0.0;
        bool accepted = false;
        for (int attempt = 0; attempt < 1000; ++attempt) {
          const double z = own * obs_rng.next_normal() + shared * g;
          x = center + m.stddev * z;
          if (x >= m.min && x <= m.max) {
            accepted = true;
            break;
          }
        }
        if (!accepted) x = std::min(std::max(x, m.min), m.max);
        obs.window.values[slot[j]] = x;
      }
      out.observations.push_back(std::move(obs));
    }
  }

  if (truth != nullptr) {
    truth->feature_names.clear();
    for (const FeatureMarginal& m : spec.marginals) truth->feature_names.push_back(m.name);
    truth->effect = spec.crash_effect;
    truth->seed = seed;
  }
  return out;
}

std::int64_t parse_timestamp(const std::string& text) {
  if (text.empty()) throw DataError("empty timestamp");
  if (text.find('-') == std::string::npos || text.find('-') == 0) {
    // plain integer epoch seconds (possibly negative)
    bool ok = false;
    const double v = parse_double(text, &ok);
    if (!ok || v != std::floor(v)) throw DataError("bad timestamp: '" + text + "'");
    return static_cast<std::int64_t>(v);
  }
  int y = 0, mo = 0, da = 0, h = 0, mi = 0, se = 0;
  char sep = 0;
  const int got = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &da, &sep,
                              &h, &mi, &se);
  if (got != 7 || (sep != 'T' && sep != ' ')) {
    throw DataError("bad timestamp: '" + text + "'");
  }
  if (mo < 1 || mo > 12 || da < 1 || da > 31 || h < 0 || h > 23 || mi < 0 ||
      mi > 59 || se < 0 || se > 60) {
    throw DataError("timestamp fields out of range: '" + text + "'");
  }
  return days_from_civil(y, mo, da) * 86400 + h * 3600 + mi * 60 + se;
}

std::vector<DetectorRecord> load_detector_csv(const std::filesystem::path& path,
                                              RowErrorReport* report,
                                              const CsvLoadOptions& options) {
  const std::string content = read_file(path);
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    const auto header = split_csv_line(line);
    const std::vector<std::string> expected = {"detector_id", "timestamp", "lane",
                                               "flow",        "speed",     "occupancy"};
    if (header != expected) {
      throw DataError("detector csv header mismatch in " + path.string());
    }
  }

  std::vector<DetectorRecord> records;
  RowErrorReport local;
  int line_no = 1;
  auto reject = [&](int ln, const std::string& why) {
    local.errors.push_back({ln, why});
    if (local.errors.size() > options.max_errors) {
      throw DataError("too many invalid rows in " + path.string() + "; first: line " +
                      std::to_string(local.errors.front().line) + ": " +
                      local.errors.front().message);
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 6) {
      reject(line_no, "expected 6 fields, got " + std::to_string(fields.size()));
      continue;
    }
    DetectorRecord r;
    r.detector_id = fields[0];
    try {
      r.timestamp = parse_timestamp(fields[1]);
    } catch (const DataError& e) {
      reject(line_no, e.what());
      continue;
    }
    bool ok_lane = false, ok_flow = false, ok_speed = false, ok_occ = false;
    const double lane = parse_double(fields[2], &ok_lane);
    r.flow = parse_double(fields[3], &ok_flow);
    r.speed = parse_double(fields[4], &ok_speed);
    r.occupancy = parse_double(fields[5], &ok_occ);
    if (!ok_lane || !ok_flow || !ok_speed || !ok_occ) {
      reject(line_no, "unparsable numeric field");
      continue;
    }
    r.lane = static_cast<int>(lane);
    if (r.detector_id.empty()) {
      reject(line_no, "empty detector id");
    } else if (r.timestamp % kSlotSeconds != 0) {
      reject(line_no, "timestamp not aligned to the 20-second grid");
    } else if (lane != std::floor(lane) || r.lane < 0) {
      reject(line_no, "lane must be a non-negative integer");
    } else if (!(r.flow >= 0.0) || !std::isfinite(r.flow)) {
      reject(line_no, "flow must be >= 0");
    } else if (!(r.speed >= 0.0) || !std::isfinite(r.speed)) {
      reject(line_no, "speed must be >= 0");
    } else if (!(r.occupancy >= 0.0) || !(r.occupancy <= 100.0)) {
      reject(line_no, "occupancy must lie in [0, 100]");
    } else {
      records.push_back(std::move(r));
      ++local.rows_ok;
    }
  }
  if (report != nullptr) *report = std::move(local);
  return records;
}

void save_detector_csv(const std::vector<DetectorRecord>& records,
                       const std::filesystem::path& path) {
  std::string body = "detector_id,timestamp,lane,flow,speed,occupancy\n";
  for (const DetectorRecord& r : records) {
    body += r.detector_id;
    body += ',';
    body += std::to_string(r.timestamp);
    body += ',';
    body += std::to_string(r.lane);
    body += ',';
    body += format_double(r.flow);
    body += ',';
    body += format_double(r.speed);
    body += ',';
    body += format_double(r.occupancy);
    body += '\n';
  }
  write_file_atomic(path, body);
}

CaseControlDataset load_case_control_csv(const std::filesystem::path& path,
                                         RowErrorReport* report,
                                         const CsvLoadOptions& options) {
  const std::string content = read_file(path);
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    const auto header = split_csv_line(line);
    std::vector<std::string> expected = {"stratum_id", "label"};
    for (const std::string& n : traffic_feature_names()) expected.push_back(n);
    for (const char* n : {"window_end", "detector_u", "detector_c", "detector_d"}) {
      expected.push_back(n);
    }
    if (header != expected) {
      throw DataError("case-control csv header mismatch in " + path.string());
    }
  }

  CaseControlDataset data;
  RowErrorReport local;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::size_t expected_fields = 2 + kNumTrafficFeatures + 4;
    if (fields.size() != expected_fields) {
      local.errors.push_back({line_no, "expected " + std::to_string(expected_fields) +
                                           " fields, got " +
                                           std::to_string(fields.size())});
      if (local.errors.size() > options.max_errors) {
        throw DataError("too many invalid rows in " + path.string());
      }
      continue;
    }
    CaseControlObservation obs;
    bool ok = true;
    bool field_ok = false;
    const double stratum = parse_double(fields[0], &field_ok);
    ok = ok && field_ok && stratum == std::floor(stratum);
    const double label = parse_double(fields[1], &field_ok);
    ok = ok && field_ok && (label == 0.0 || label == 1.0);
    for (int j = 0; ok && j < kNumTrafficFeatures; ++j) {
      obs.window.values[static_cast<std::size_t>(j)] =
          parse_double(fields[static_cast<std::size_t>(2 + j)], &field_ok);
      ok = ok && field_ok;
    }
    if (ok) {
      const double end = parse_double(fields[2 + kNumTrafficFeatures], &field_ok);
      ok = ok && field_ok && end == std::floor(end);
      obs.window.window_end = static_cast<std::int64_t>(end);
    }
    if (!ok) {
      local.errors.push_back({line_no, "malformed row"});
      if (local.errors.size() > options.max_errors) {
        throw DataError("too many invalid rows in " + path.string());
      }
      continue;
    }
    obs.stratum = static_cast<int>(stratum);
    obs.label = static_cast<int>(label);
    obs.window.detectors.upstream = fields[2 + kNumTrafficFeatures + 1];
    obs.window.detectors.crash = fields[2 + kNumTrafficFeatures + 2];
    obs.window.detectors.downstream = fields[2 + kNumTrafficFeatures + 3];
    data.observations.push_back(std::move(obs));
    ++local.rows_ok;
  }
  if (report != nullptr) *report = std::move(local);
  return data;
}

void save_case_control_csv(const CaseControlDataset& data,
                           const std::filesystem::path& path) {
  std::string body = "stratum_id,label";
  for (const std::string& n : traffic_feature_names()) {
    body += ',';
    body += n;
  }
  body += ",window_end,detector_u,detector_c,detector_d\n";
  for (const auto& obs : data.observations) {
    body += std::to_string(obs.stratum);
    body += ',';
    body += std::to_string(obs.label);
    for (int j = 0; j < kNumTrafficFeatures; ++j) {
      body += ',';
      body += format_double(obs.window.values[static_cast<std::size_t>(j)]);
    }
    body += ',';
    body += std::to_string(obs.window.window_end);
    body += ',';
    body += obs.window.detectors.upstream;
    body += ',';
    body += obs.window.detectors.crash;
    body += ',';
    body += obs.window.detectors.downstream;
    body += '\n';
  }
  write_file_atomic(path, body);
}

}  // namespace ivmkit
