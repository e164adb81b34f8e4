#include "aqnn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>
#include <string_view>

#include "aqnn/errors.hpp"
#include "aqnn/rng.hpp"

namespace aqnn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

bool parse_float(std::string_view field, float& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !field.empty() && std::isfinite(out);
}

bool parse_label(std::string_view field, int& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !field.empty();
}

// A header line is one whose first field is not a number.
bool looks_like_header(std::string_view line) {
  const auto fields = split_fields(line);
  float dummy;
  return !fields.empty() && !parse_float(fields[0], dummy);
}

std::array<float, kNumSensors> parse_readings(const std::vector<std::string_view>& fields,
                                              std::size_t line_no) {
  std::array<float, kNumSensors> readings{};
  for (int i = 0; i < kNumSensors; ++i) {
    if (!parse_float(fields[static_cast<std::size_t>(i)], readings[static_cast<std::size_t>(i)]))
      throw parse_error("non-numeric field '" + std::string(fields[static_cast<std::size_t>(i)]) +
                            "' in column " + std::to_string(i + 1),
                        line_no);
  }
  return readings;
}

}  // namespace

void SplitSpec::validate() const {
  auto in_unit = [](double r) { return r > 0.0 && r < 1.0; };
  if (!in_unit(train_ratio) || !in_unit(val_ratio) || !in_unit(test_ratio))
    throw std::invalid_argument("split ratios must each lie in (0,1)");
  const double sum = train_ratio + val_ratio + test_ratio;
  if (std::fabs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("split ratios sum to " + std::to_string(sum) + ", expected 1");
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());

  Dataset ds;
  ds.provenance = Provenance::file;
  std::string line;
  std::size_t line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    if (first_content_line) {
      first_content_line = false;
      if (looks_like_header(view)) continue;
    }
    const auto fields = split_fields(view);
    if (fields.size() != kNumSensors + 1)
      throw parse_error("expected 7 values, got " + std::to_string(fields.size()), line_no);
    SensorSample sample;
    sample.readings = parse_readings(fields, line_no);
    int label = -1;
    if (!parse_label(fields.back(), label))
      throw parse_error("non-integer label '" + std::string(fields.back()) + "'", line_no);
    if (label < 0 || label >= kNumClasses)
      throw parse_error("label " + std::to_string(label) + " outside 0..3", line_no);
    sample.label = label;
    ds.samples.push_back(sample);
  }
  if (ds.samples.empty()) throw parse_error("file contains no data rows", line_no);
  return ds;
}

std::vector<SensorSample> load_unlabeled_csv(const std::filesystem::path& path,
                                             bool ignore_labels) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());

  std::vector<SensorSample> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    if (first_content_line) {
      first_content_line = false;
      if (looks_like_header(view)) continue;
    }
    const auto fields = split_fields(view);
    if (fields.size() == kNumSensors + 1 && !ignore_labels)
      throw parse_error("labeled data passed to predict; rerun with --ignore-labels to drop the "
                        "label column",
                        line_no);
    if (fields.size() != kNumSensors &&
        !(fields.size() == kNumSensors + 1 && ignore_labels))
      throw parse_error("expected 6 values, got " + std::to_string(fields.size()), line_no);
    SensorSample sample;
    sample.readings = parse_readings(fields, line_no);
    rows.push_back(sample);
  }
  if (rows.empty()) throw parse_error("file contains no data rows", line_no);
  return rows;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << "MQ2,MQ9,MQ135,MQ137,MQ138,MG811,label\n";
  char buf[64];
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const SensorSample& s = ds.samples[i];
    if (!s.label)
      throw std::invalid_argument("save_csv: unlabeled sample at index " + std::to_string(i));
    for (float r : s.readings) {
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(r));
      out << buf << ',';
    }
    out << *s.label << '\n';
  }
  if (!out) throw io_error("write failed for " + path.string());
}

NormStats fit_normalizer(const Dataset& train) {
  if (train.empty()) throw std::invalid_argument("fit_normalizer: empty dataset");
  const double n = static_cast<double>(train.size());

  NormStats stats;
  for (int c = 0; c < kNumSensors; ++c) {
    double sum = 0.0;
    for (const SensorSample& s : train.samples) sum += s.readings[static_cast<std::size_t>(c)];
    const double mean = sum / n;
    double sq = 0.0;
    for (const SensorSample& s : train.samples) {
      const double d = s.readings[static_cast<std::size_t>(c)] - mean;
      sq += d * d;
    }
    double std_dev = std::sqrt(sq / n);  // population
    if (std_dev < 1e-9) std_dev = 1.0;   // degenerate column
    stats.mean[static_cast<std::size_t>(c)] = static_cast<float>(mean);
    stats.std[static_cast<std::size_t>(c)] = static_cast<float>(std_dev);
  }
  return stats;
}

FeatureMap apply_normalizer(const SensorSample& sample, const NormStats& stats) {
  FeatureMap out(kNumSensors, 1);
  for (int c = 0; c < kNumSensors; ++c)
    out.values[static_cast<std::size_t>(c)] =
        (sample.readings[static_cast<std::size_t>(c)] - stats.mean[static_cast<std::size_t>(c)]) /
        stats.std[static_cast<std::size_t>(c)];
  return out;
}

Split shuffle_split(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  if (ds.empty()) throw std::invalid_argument("shuffle_split: empty dataset");

  const std::size_t n = ds.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(spec.seed);
  rng.shuffle(order);

  const std::size_t n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * spec.train_ratio));
  const std::size_t n_val = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * spec.val_ratio));

  Split split;
  split.train.provenance = ds.provenance;
  split.val.provenance = ds.provenance;
  split.test.provenance = ds.provenance;
  for (std::size_t i = 0; i < n; ++i) {
    const SensorSample& s = ds.samples[order[i]];
    if (i < n_train)
      split.train.samples.push_back(s);
    else if (i < n_train + n_val)
      split.val.samples.push_back(s);
    else
      split.test.samples.push_back(s);
  }
  return split;
}

ClassCounts class_distribution(const Dataset& ds) {
  ClassCounts result;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& label = ds.samples[i].label;
    if (!label)
      throw std::invalid_argument("class_distribution: unlabeled sample at index " +
                                  std::to_string(i));
    ++result.counts[static_cast<std::size_t>(*label)];
  }
  for (long c : result.counts)
    if (c == 0) result.has_empty_class = true;
  return result;
}

Dataset synth_generate(int n_per_class, std::uint32_t seed) {
  if (n_per_class < 1) throw std::invalid_argument("synth_generate: n_per_class must be >= 1");

  // Raw-reading scale per sensor, with per-class mean offsets in units of the
  // within-class standard deviation. Every activity pair is separated by at
  // least 3 sigma on its discriminating channels.
  constexpr std::array<double, kNumSensors> base = {120.0, 90.0, 240.0, 95.0, 110.0, 410.0};
  constexpr std::array<double, kNumSensors> sigma = {8.0, 6.0, 12.0, 7.0, 9.0, 20.0};
  constexpr std::array<std::array<double, kNumSensors>, kNumClasses> offset = {{
      {0.0, 0.0, 0.0, 0.0, 0.0, 0.0},  // Normal Situation: baseline
      {4.0, 4.0, 4.0, 4.0, 4.0, 4.0},  // Preparing Meals: moderate rise everywhere
      {9.0, 9.0, 1.0, 1.0, 1.0, 2.0},  // Presence of Smoke: MQ2/MQ9 dominate
      {1.0, 1.0, 9.0, 9.0, 9.0, 0.0},  // Cleaning: MQ135/MQ137/MQ138 dominate
  }};

  Rng rng(seed);
  Dataset ds;
  ds.provenance = Provenance::synthetic;
  ds.samples.reserve(static_cast<std::size_t>(n_per_class) * kNumClasses);
  for (int cls = 0; cls < kNumClasses; ++cls) {
    for (int i = 0; i < n_per_class; ++i) {
      SensorSample s;
      for (int c = 0; c < kNumSensors; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        s.readings[ci] = static_cast<float>(
            base[ci] + sigma[ci] * (offset[static_cast<std::size_t>(cls)][ci] + rng.normal()));
      }
      s.label = cls;
      ds.samples.push_back(s);
    }
  }
  return ds;
}

}  // namespace aqnn
