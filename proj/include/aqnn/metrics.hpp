#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aqnn/dataset.hpp"
#include "aqnn/network.hpp"

namespace aqnn {

// 4x4 count table: rows = true class, columns = predicted class.
struct ConfusionMatrix {
  std::array<std::array<long, kNumClasses>, kNumClasses> counts{};

  long total() const;
  long trace() const;
  long row_sum(int t) const;
  long col_sum(int p) const;
};

ConfusionMatrix confusion_matrix(std::span<const int> truths, std::span<const int> preds);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;
};

struct ClassificationReport {
  std::array<ClassMetrics, kNumClasses> per_class{};
  double accuracy = 0.0;
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
  double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
  long total_support = 0;
  // Set when any precision/recall/f1 had a zero denominator and was reported
  // as 0.0.
  bool zero_division_flagged = false;
};

ClassificationReport classification_report(const ConfusionMatrix& cm);

// Unweighted mean.
double macro_average(std::span<const double> values);
// Support-weighted mean.
double weighted_average(std::span<const double> values, std::span<const long> supports);

struct EvalResult {
  ConfusionMatrix cm;
  ClassificationReport report;
  double mean_loss = 0.0;
};

// Argmax prediction per sample; mean cross-entropy accumulated in double.
EvalResult evaluate(const Network& net, const Dataset& ds, const NormStats& norm);

// Aligned plain-text report: per-class rows then accuracy / macro avg /
// weighted avg, two decimals.
std::string format_report_text(const ClassificationReport& report);

// Flat machine-readable JSON document.
std::string report_to_json(const ClassificationReport& report);

// CSV grid with class-name header row and column.
std::string confusion_to_csv(const ConfusionMatrix& cm);

struct LatencyStats {
  double mean_s = 0.0;
  double p50_s = 0.0;
  double p99_s = 0.0;
  double max_s = 0.0;
  std::size_t count = 0;
};

// Wall-clock single-sample inference timing; the first 10 runs are warm-up
// and excluded. iterations is the measured count and must be >= 100.
LatencyStats latency_benchmark(const Network& net, std::span<const FeatureMap> samples,
                               int iterations);

}  // namespace aqnn
