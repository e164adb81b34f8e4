#include "aqnn/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace aqnn {

long ConfusionMatrix::total() const {
  long sum = 0;
  for (const auto& row : counts)
    for (long c : row) sum += c;
  return sum;
}

long ConfusionMatrix::trace() const {
  long sum = 0;
  for (int i = 0; i < kNumClasses; ++i)
    sum += counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
  return sum;
}

long ConfusionMatrix::row_sum(int t) const {
  long sum = 0;
  for (long c : counts[static_cast<std::size_t>(t)]) sum += c;
  return sum;
}

long ConfusionMatrix::col_sum(int p) const {
  long sum = 0;
  for (const auto& row : counts) sum += row[static_cast<std::size_t>(p)];
  return sum;
}

ConfusionMatrix confusion_matrix(std::span<const int> truths, std::span<const int> preds) {
  if (truths.size() != preds.size())
    throw std::invalid_argument("confusion_matrix: " + std::to_string(truths.size()) +
                                " truths vs " + std::to_string(preds.size()) + " predictions");
  if (truths.empty()) throw std::invalid_argument("confusion_matrix: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int t = truths[i];
    const int p = preds[i];
    if (t < 0 || t >= kNumClasses || p < 0 || p >= kNumClasses)
      throw std::invalid_argument("confusion_matrix: class outside 0..3 at index " +
                                  std::to_string(i));
    ++cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }
  return cm;
}

double macro_average(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("macro_average: empty input");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double weighted_average(std::span<const double> values, std::span<const long> supports) {
  if (values.size() != supports.size() || values.empty())
    throw std::invalid_argument("weighted_average: size mismatch or empty input");
  double weighted = 0.0;
  long total = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    weighted += values[i] * static_cast<double>(supports[i]);
    total += supports[i];
  }
  if (total <= 0) throw std::invalid_argument("weighted_average: supports sum to zero");
  return weighted / static_cast<double>(total);
}

ClassificationReport classification_report(const ConfusionMatrix& cm) {
  const long total = cm.total();
  if (total <= 0) throw std::invalid_argument("classification_report: empty confusion matrix");

  ClassificationReport report;
  report.total_support = total;

  std::array<double, kNumClasses> precisions{}, recalls{}, f1s{};
  std::array<long, kNumClasses> supports{};
  for (int c = 0; c < kNumClasses; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    const long diag = cm.counts[ci][ci];
    const long col = cm.col_sum(c);
    const long row = cm.row_sum(c);
    supports[ci] = row;

    if (col > 0)
      precisions[ci] = static_cast<double>(diag) / static_cast<double>(col);
    else
      report.zero_division_flagged = true;
    if (row > 0)
      recalls[ci] = static_cast<double>(diag) / static_cast<double>(row);
    else
      report.zero_division_flagged = true;
    if (precisions[ci] + recalls[ci] > 0.0)
      f1s[ci] = 2.0 * precisions[ci] * recalls[ci] / (precisions[ci] + recalls[ci]);
    else
      report.zero_division_flagged = true;

    report.per_class[ci] = {precisions[ci], recalls[ci], f1s[ci], row};
  }

  report.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  report.macro_precision = macro_average(precisions);
  report.macro_recall = macro_average(recalls);
  report.macro_f1 = macro_average(f1s);
  report.weighted_precision = weighted_average(precisions, supports);
  report.weighted_f1 = weighted_average(f1s, supports);
  // recall_c * support_c collapses to the diagonal count, so the weighted
  // recall IS trace/total; computing it that way keeps the identity
  // weighted_recall == accuracy exact in floating point.
  report.weighted_recall = report.accuracy;
  return report;
}

EvalResult evaluate(const Network& net, const Dataset& ds, const NormStats& norm) {
  if (ds.empty()) throw std::invalid_argument("evaluate: empty dataset");
  std::vector<int> truths, preds;
  truths.reserve(ds.size());
  preds.reserve(ds.size());
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const SensorSample& s = ds.samples[i];
    if (!s.label)
      throw std::invalid_argument("evaluate: unlabeled sample at index " + std::to_string(i));
    const std::vector<float> probs = infer(net, apply_normalizer(s, norm));
    loss_sum += cross_entropy(probs, *s.label);
    truths.push_back(*s.label);
    preds.push_back(predict_class(probs));
  }
  EvalResult result;
  result.cm = confusion_matrix(truths, preds);
  result.report = classification_report(result.cm);
  result.mean_loss = loss_sum / static_cast<double>(ds.size());
  return result;
}

std::string format_report_text(const ClassificationReport& report) {
  constexpr int kNameWidth = 17;  // longest class name
  char buf[160];
  std::string out;

  std::snprintf(buf, sizeof(buf), "%*s  %9s %9s %9s %9s\n", kNameWidth, "", "precision", "recall",
                "f1-score", "support");
  out += buf;
  out += '\n';
  for (int c = 0; c < kNumClasses; ++c) {
    const ClassMetrics& m = report.per_class[static_cast<std::size_t>(c)];
    std::snprintf(buf, sizeof(buf), "%*s  %9.2f %9.2f %9.2f %9ld\n", kNameWidth,
                  kActivityNames[static_cast<std::size_t>(c)], m.precision, m.recall, m.f1,
                  m.support);
    out += buf;
  }
  out += '\n';
  std::snprintf(buf, sizeof(buf), "%*s  %9s %9s %9.2f %9ld\n", kNameWidth, "accuracy", "", "",
                report.accuracy, report.total_support);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%*s  %9.2f %9.2f %9.2f %9ld\n", kNameWidth, "macro avg",
                report.macro_precision, report.macro_recall, report.macro_f1,
                report.total_support);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%*s  %9.2f %9.2f %9.2f %9ld\n", kNameWidth, "weighted avg",
                report.weighted_precision, report.weighted_recall, report.weighted_f1,
                report.total_support);
  out += buf;
  return out;
}

std::string report_to_json(const ClassificationReport& report) {
  nlohmann::ordered_json j;
  j["accuracy"] = report.accuracy;
  j["classes"] = nlohmann::ordered_json::array();
  for (int c = 0; c < kNumClasses; ++c) {
    const ClassMetrics& m = report.per_class[static_cast<std::size_t>(c)];
    j["classes"].push_back({{"name", kActivityNames[static_cast<std::size_t>(c)]},
                            {"precision", m.precision},
                            {"recall", m.recall},
                            {"f1", m.f1},
                            {"support", m.support}});
  }
  j["macro"] = {{"precision", report.macro_precision},
                {"recall", report.macro_recall},
                {"f1", report.macro_f1}};
  j["weighted"] = {{"precision", report.weighted_precision},
                   {"recall", report.weighted_recall},
                   {"f1", report.weighted_f1}};
  j["total_support"] = report.total_support;
  j["zero_division_flagged"] = report.zero_division_flagged;
  return j.dump();
}

std::string confusion_to_csv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "true\\pred";
  for (int p = 0; p < kNumClasses; ++p) out << ',' << kActivityNames[static_cast<std::size_t>(p)];
  out << '\n';
  for (int t = 0; t < kNumClasses; ++t) {
    out << kActivityNames[static_cast<std::size_t>(t)];
    for (int p = 0; p < kNumClasses; ++p)
      out << ',' << cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    out << '\n';
  }
  return out.str();
}

LatencyStats latency_benchmark(const Network& net, std::span<const FeatureMap> samples,
                               int iterations) {
  if (samples.empty()) throw std::invalid_argument("latency_benchmark: empty sample set");
  if (iterations < 100) throw std::invalid_argument("latency_benchmark: iterations must be >= 100");

  constexpr int kWarmup = 10;
  std::vector<double> secs;
  secs.reserve(static_cast<std::size_t>(iterations));
  volatile float sink = 0.0f;
  for (int i = 0; i < iterations + kWarmup; ++i) {
    const FeatureMap& sample = samples[static_cast<std::size_t>(i) % samples.size()];
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<float> probs = infer(net, sample);
    const auto t1 = std::chrono::steady_clock::now();
    sink = sink + probs[0];
    if (i >= kWarmup) secs.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  (void)sink;

  std::sort(secs.begin(), secs.end());
  const std::size_t n = secs.size();
  auto percentile = [&](double q) {
    const std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    return secs[std::min(n - 1, rank == 0 ? 0 : rank - 1)];
  };

  LatencyStats stats;
  stats.count = n;
  stats.mean_s = std::accumulate(secs.begin(), secs.end(), 0.0) / static_cast<double>(n);
  stats.p50_s = percentile(0.50);
  stats.p99_s = percentile(0.99);
  stats.max_s = secs.back();
  return stats;
}

}  // namespace aqnn
