#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "aqnn/dataset.hpp"
#include "aqnn/network.hpp"

namespace aqnn {

struct AlertRule {
  int trigger_class = 2;    // Presence of Smoke
  double threshold = 0.8;   // probability
  int consecutive = 3;      // hits required

  void validate() const;
};

// Fires once per run of consecutive high-confidence trigger predictions and
// re-arms only after a non-trigger prediction. A trigger prediction below
// threshold breaks the run without re-arming.
class AlertAutomaton {
 public:
  explicit AlertAutomaton(AlertRule rule) : rule_(rule) { rule_.validate(); }

  // Returns true when this prediction should emit an alert.
  bool observe(int predicted, double prob);

  int streak() const { return streak_; }

 private:
  AlertRule rule_;
  int streak_ = 0;
  bool armed_ = true;
};

struct StreamMetrics {
  long lines = 0;
  long errors = 0;
  long alerts = 0;
  std::array<long, kNumClasses> class_counts{};
  std::vector<double> latencies_us;

  void print_summary(std::ostream& err) const;
};

// One prediction as a single-line JSON object with keys
// ts, readings, class_index, class_name, probs, latency_us.
std::string prediction_record_json(const Network& net, const NormStats& norm,
                                   std::span<const float> readings, double* prob_out = nullptr,
                                   int* class_out = nullptr, double* latency_us_out = nullptr);

// Per-stream state: line counter, alert automaton, metrics. One session per
// connection; the network itself is shared read-only.
class ServeSession {
 public:
  ServeSession(const Network& net, const NormStats& norm, AlertRule rule)
      : net_(&net), norm_(norm), automaton_(rule), rule_(rule) {}

  // Emits exactly one prediction-or-error line per input line, plus an alert
  // line when the rule fires. Accepts "r1,...,r6" or {"readings":[...]}.
  void process_line(std::string_view line, std::ostream& out);

  const StreamMetrics& metrics() const { return metrics_; }
  void print_summary(std::ostream& err) const { metrics_.print_summary(err); }

 private:
  const Network* net_;
  NormStats norm_;
  AlertAutomaton automaton_;
  AlertRule rule_;
  StreamMetrics metrics_;
  long line_no_ = 0;
};

// Sequential line-delimited service over the given streams; returns 0 at
// end of input after printing the session summary to err.
int serve_stdio(const Network& net, const NormStats& norm, const AlertRule& rule,
                std::istream& in, std::ostream& out, std::ostream& err);

// Line-delimited TCP service; one session per connection, model shared
// read-only. Binds the given port (0 picks an ephemeral one, reported via
// bound_port). Runs until stop becomes true. Returns nonzero when the port
// cannot be bound.
int serve_tcp(const Network& net, const NormStats& norm, const AlertRule& rule,
              std::uint16_t port, std::atomic<bool>& stop, std::ostream& err,
              std::uint16_t* bound_port = nullptr);

}  // namespace aqnn
