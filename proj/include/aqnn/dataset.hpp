#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aqnn/tensor.hpp"

namespace aqnn {

inline constexpr int kNumSensors = 6;
inline constexpr int kNumClasses = 4;

inline constexpr std::array<const char*, kNumSensors> kSensorNames = {
    "MQ2", "MQ9", "MQ135", "MQ137", "MQ138", "MG811"};

inline constexpr std::array<const char*, kNumClasses> kActivityNames = {
    "Normal Situation", "Preparing Meals", "Presence of Smoke", "Cleaning"};

// One observation: six raw sensor readings plus an optional activity label.
struct SensorSample {
  std::array<float, kNumSensors> readings{};
  std::optional<int> label;
};

enum class Provenance { file, synthetic };

struct Dataset {
  std::vector<SensorSample> samples;
  Provenance provenance = Provenance::file;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

// Per-sensor z-score statistics, fit on the training split only.
struct NormStats {
  std::array<float, kNumSensors> mean{};
  std::array<float, kNumSensors> std{};
};

struct SplitSpec {
  double train_ratio = 0.7;
  double val_ratio = 0.2;
  double test_ratio = 0.1;
  std::uint32_t seed = 42;

  // Each ratio in (0,1), sum within 1e-9 of 1.
  void validate() const;
};

struct Split {
  Dataset train;
  Dataset val;
  Dataset test;
};

struct ClassCounts {
  std::array<long, kNumClasses> counts{};
  bool has_empty_class = false;

  long total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
};

// 7-column CSV: six readings then an integer label 0..3. A single header
// line is auto-detected (non-numeric first field) and skipped.
Dataset load_csv(const std::filesystem::path& path);

// 6-column CSV of unlabeled readings for prediction. A 7-column file is
// rejected unless ignore_labels is set, in which case the label column is
// dropped.
std::vector<SensorSample> load_unlabeled_csv(const std::filesystem::path& path,
                                             bool ignore_labels = false);

void save_csv(const Dataset& ds, const std::filesystem::path& path);

// Per-column mean and population standard deviation over the training split.
// Degenerate columns (std < 1e-9) get std = 1 so normalization stays finite.
NormStats fit_normalizer(const Dataset& train);

// z = (x - mean) / std, reshaped to a 6x1 FeatureMap.
FeatureMap apply_normalizer(const SensorSample& sample, const NormStats& stats);

// Seeded Fisher-Yates shuffle, then sizes floor(n*train), floor(n*val),
// remainder to test. Partitions are disjoint and cover the input.
Split shuffle_split(const Dataset& ds, const SplitSpec& spec);

ClassCounts class_distribution(const Dataset& ds);

// Labeled stand-in dataset: 4 * n_per_class samples from per-class Gaussians
// whose means are separated by at least 3 within-class standard deviations on
// the channels that distinguish each pair of activities. Smoke is elevated on
// MQ2/MQ9, cleaning on MQ135/MQ137/MQ138, meal preparation moderately on all.
Dataset synth_generate(int n_per_class, std::uint32_t seed);

}  // namespace aqnn
