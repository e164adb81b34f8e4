#include "aqnn/serve.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include <json.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace aqnn {

namespace {

using ordered_json = nlohmann::ordered_json;

std::int64_t now_epoch_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

const char* alert_slug(int cls) {
  switch (cls) {
    case 0: return "normal";
    case 1: return "meals";
    case 2: return "smoke";
    case 3: return "cleaning";
  }
  return "unknown";
}

bool parse_csv_readings(std::string_view line, std::array<float, kNumSensors>& out) {
  int field = 0;
  std::size_t start = 0;
  while (field < kNumSensors) {
    const std::size_t comma = line.find(',', start);
    std::string_view token = comma == std::string_view::npos ? line.substr(start)
                                                             : line.substr(start, comma - start);
    while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
    while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r'))
      token.remove_suffix(1);
    float value = 0.0f;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (token.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) return false;
    out[static_cast<std::size_t>(field)] = value;
    ++field;
    if (comma == std::string_view::npos) return field == kNumSensors;
    start = comma + 1;
  }
  return false;  // more than 6 fields
}

bool parse_json_readings(std::string_view line, std::array<float, kNumSensors>& out) {
  const ordered_json j = ordered_json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("readings")) return false;
  const auto& arr = j["readings"];
  if (!arr.is_array() || arr.size() != kNumSensors) return false;
  for (int i = 0; i < kNumSensors; ++i) {
    const auto& v = arr[static_cast<std::size_t>(i)];
    if (!v.is_number()) return false;
    const double d = v.get<double>();
    if (!std::isfinite(d)) return false;
    out[static_cast<std::size_t>(i)] = static_cast<float>(d);
  }
  return true;
}

}  // namespace

void AlertRule::validate() const {
  if (trigger_class < 0 || trigger_class >= kNumClasses)
    throw std::invalid_argument("alert rule: trigger class " + std::to_string(trigger_class) +
                                " outside 0..3");
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw std::invalid_argument("alert rule: threshold must lie in (0,1]");
  if (consecutive < 1) throw std::invalid_argument("alert rule: consecutive count must be >= 1");
}

bool AlertAutomaton::observe(int predicted, double prob) {
  if (predicted != rule_.trigger_class) {
    streak_ = 0;
    armed_ = true;
    return false;
  }
  if (prob < rule_.threshold) {
    // Breaks the high-confidence run but does not re-arm: only a
    // non-trigger prediction does.
    streak_ = 0;
    return false;
  }
  ++streak_;
  if (armed_ && streak_ >= rule_.consecutive) {
    armed_ = false;
    return true;
  }
  return false;
}

std::string prediction_record_json(const Network& net, const NormStats& norm,
                                   std::span<const float> readings, double* prob_out,
                                   int* class_out, double* latency_us_out) {
  SensorSample sample;
  std::copy_n(readings.begin(), kNumSensors, sample.readings.begin());
  const FeatureMap z = apply_normalizer(sample, norm);

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<float> probs = infer(net, z);
  const auto t1 = std::chrono::steady_clock::now();
  const double us =
      std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count() / 1000.0;

  const int cls = predict_class(probs);
  ordered_json record;
  record["ts"] = now_epoch_ms();
  record["readings"] = std::vector<float>(readings.begin(), readings.end());
  record["class_index"] = cls;
  record["class_name"] = kActivityNames[static_cast<std::size_t>(cls)];
  record["probs"] = probs;
  record["latency_us"] = std::max<std::int64_t>(1, static_cast<std::int64_t>(us));

  if (prob_out) *prob_out = probs[static_cast<std::size_t>(cls)];
  if (class_out) *class_out = cls;
  if (latency_us_out) *latency_us_out = std::max(us, 0.001);
  return record.dump();
}

void ServeSession::process_line(std::string_view line, std::ostream& out) {
  ++line_no_;
  ++metrics_.lines;

  std::string_view trimmed = line;
  while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == '\n'))
    trimmed.remove_suffix(1);
  while (!trimmed.empty() && (trimmed.front() == ' ' || trimmed.front() == '\t'))
    trimmed.remove_prefix(1);

  std::array<float, kNumSensors> readings{};
  bool ok = false;
  if (!trimmed.empty()) {
    if (trimmed.front() == '{')
      ok = parse_json_readings(trimmed, readings);
    else
      ok = parse_csv_readings(trimmed, readings);
  }
  if (!ok) {
    ordered_json err;
    err["error"] = "parse";
    err["line"] = line_no_;
    out << err.dump() << '\n';
    ++metrics_.errors;
    return;
  }

  double prob = 0.0;
  int cls = 0;
  double latency_us = 0.0;
  out << prediction_record_json(*net_, norm_, readings, &prob, &cls, &latency_us) << '\n';
  ++metrics_.class_counts[static_cast<std::size_t>(cls)];
  metrics_.latencies_us.push_back(latency_us);

  if (automaton_.observe(cls, prob)) {
    ordered_json alert;
    alert["ts"] = now_epoch_ms();
    alert["alert"] = alert_slug(rule_.trigger_class);
    alert["consecutive"] = automaton_.streak();
    alert["prob"] = prob;
    out << alert.dump() << '\n';
    ++metrics_.alerts;
  }
}

void StreamMetrics::print_summary(std::ostream& err) const {
  err << "serve summary: lines=" << lines << " errors=" << errors << " alerts=" << alerts << '\n';
  for (int c = 0; c < kNumClasses; ++c)
    err << "  " << kActivityNames[static_cast<std::size_t>(c)] << ": "
        << class_counts[static_cast<std::size_t>(c)] << '\n';
  if (latencies_us.empty()) {
    err << "  latency_us mean=0 p99=0\n";
    return;
  }
  std::vector<double> sorted = latencies_us;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  const std::size_t n = sorted.size();
  const std::size_t rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n)));
  const double p99 = sorted[std::min(n - 1, rank == 0 ? 0 : rank - 1)];
  char buf[96];
  std::snprintf(buf, sizeof(buf), "  latency_us mean=%.1f p99=%.1f\n",
                sum / static_cast<double>(n), p99);
  err << buf;
}

int serve_stdio(const Network& net, const NormStats& norm, const AlertRule& rule,
                std::istream& in, std::ostream& out, std::ostream& err) {
  ServeSession session(net, norm, rule);
  std::string line;
  while (std::getline(in, line)) {
    session.process_line(line, out);
    out.flush();
  }
  session.print_summary(err);
  return 0;
}

namespace {

void handle_connection(int fd, const Network& net, const NormStats& norm, const AlertRule& rule,
                       std::atomic<bool>& stop, std::ostream& err, std::mutex& err_mutex) {
  ServeSession session(net, norm, rule);
  std::string pending;
  char buf[4096];
  while (!stop.load()) {
    const ssize_t got = ::recv(fd, buf, sizeof(buf), 0);
    if (got == 0) break;  // peer closed
    if (got < 0) {
      if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
      break;
    }
    pending.append(buf, static_cast<std::size_t>(got));
    std::size_t start = 0;
    while (true) {
      const std::size_t nl = pending.find('\n', start);
      if (nl == std::string::npos) break;
      std::ostringstream reply;
      session.process_line(std::string_view(pending).substr(start, nl - start), reply);
      const std::string text = reply.str();
      if (!text.empty()) ::send(fd, text.data(), text.size(), MSG_NOSIGNAL);
      start = nl + 1;
    }
    pending.erase(0, start);
  }
  if (!pending.empty() && !stop.load()) {
    std::ostringstream reply;
    session.process_line(pending, reply);
    const std::string text = reply.str();
    if (!text.empty()) ::send(fd, text.data(), text.size(), MSG_NOSIGNAL);
  }
  ::close(fd);
  std::lock_guard<std::mutex> lock(err_mutex);
  session.print_summary(err);
}

}  // namespace

int serve_tcp(const Network& net, const NormStats& norm, const AlertRule& rule,
              std::uint16_t port, std::atomic<bool>& stop, std::ostream& err,
              std::uint16_t* bound_port) {
  const int listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd < 0) {
    err << "serve: cannot create socket: " << std::strerror(errno) << '\n';
    return 2;
  }
  const int one = 1;
  ::setsockopt(listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(port);
  if (::bind(listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    err << "serve: cannot bind port " << port << ": " << std::strerror(errno) << '\n';
    ::close(listen_fd);
    return 2;
  }
  if (::listen(listen_fd, 16) < 0) {
    err << "serve: listen failed: " << std::strerror(errno) << '\n';
    ::close(listen_fd);
    return 2;
  }

  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(listen_fd, reinterpret_cast<sockaddr*>(&bound), &len);
  if (bound_port) *bound_port = ntohs(bound.sin_port);
  err << "serve: listening on port " << ntohs(bound.sin_port) << '\n';

  std::mutex err_mutex;
  std::vector<std::thread> workers;
  while (!stop.load()) {
    pollfd pfd{listen_fd, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, 100);
    if (ready <= 0) continue;
    const int conn_fd = ::accept(listen_fd, nullptr, nullptr);
    if (conn_fd < 0) continue;
    timeval tv{0, 200 * 1000};  // let handlers notice the stop flag
    ::setsockopt(conn_fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    workers.emplace_back(
        [conn_fd, &net, &norm, &rule, &stop, &err, &err_mutex] {
          handle_connection(conn_fd, net, norm, rule, stop, err, err_mutex);
        });
  }
  for (std::thread& t : workers) t.join();
  ::close(listen_fd);
  return 0;
}

}  // namespace aqnn
