#include "aqnn/train.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "aqnn/adam.hpp"
#include "aqnn/errors.hpp"
#include "aqnn/rng.hpp"

namespace aqnn {

TrainingSet normalize_dataset(const Dataset& ds, const NormStats& stats) {
  TrainingSet set;
  set.inputs.reserve(ds.size());
  set.labels.reserve(ds.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const SensorSample& s = ds.samples[i];
    if (!s.label)
      throw std::invalid_argument("normalize_dataset: unlabeled sample at index " +
                                  std::to_string(i));
    set.inputs.push_back(apply_normalizer(s, stats));
    set.labels.push_back(*s.label);
  }
  return set;
}

EvalPass eval_pass(const Network& net, const TrainingSet& set) {
  if (set.empty()) throw std::invalid_argument("eval_pass: empty dataset");
  double loss_sum = 0.0;
  long correct = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const std::vector<float> probs = infer(net, set.inputs[i]);
    loss_sum += cross_entropy(probs, set.labels[i]);
    if (predict_class(probs) == set.labels[i]) ++correct;
  }
  EvalPass out;
  out.loss = loss_sum / static_cast<double>(set.size());
  out.acc = static_cast<double>(correct) / static_cast<double>(set.size());
  return out;
}

TrainResult train(Network& net, const TrainingSet& train_set, const TrainingSet& val_set,
                  const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (train_set.empty()) throw std::invalid_argument("train: empty training split");
  if (val_set.empty()) throw std::invalid_argument("train: empty validation split");

  const std::size_t n = train_set.size();
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

  std::vector<float> params = get_params(net);
  AdamState adam = AdamState::for_params(params.size(), cfg.lr, cfg.beta1, cfg.beta2, cfg.epsilon);
  Rng rng(cfg.seed);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  result.best.val_acc = -1.0;  // first epoch always captures
  result.history.reserve(static_cast<std::size_t>(cfg.epochs));
  std::vector<float> grad_accum(params.size(), 0.0f);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle_each_epoch) rng.shuffle(order);

    double loss_sum = 0.0;
    long correct = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += batch, ++batch_index) {
      const std::size_t count = std::min(batch, n - start);
      std::fill(grad_accum.begin(), grad_accum.end(), 0.0f);
      for (std::size_t k = start; k < start + count; ++k) {
        const std::size_t idx = order[k];
        const std::vector<float> probs = network_forward(net, train_set.inputs[idx]);
        const int label = train_set.labels[idx];
        const double sample_loss = cross_entropy(probs, label);
        if (!std::isfinite(sample_loss))
          throw numeric_error("non-finite loss at epoch " + std::to_string(epoch) + " batch " +
                              std::to_string(batch_index));
        loss_sum += sample_loss;
        if (predict_class(probs) == label) ++correct;
        const std::vector<float> grads = network_backward(net, label);
        for (std::size_t i = 0; i < grads.size(); ++i) grad_accum[i] += grads[i];
      }
      const float inv = 1.0f / static_cast<float>(count);
      for (float& g : grad_accum) g *= inv;
      adam_step(params, grad_accum, adam);
      set_params(net, params);
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(n);
    m.train_acc = static_cast<double>(correct) / static_cast<double>(n);
    const EvalPass vp = eval_pass(net, val_set);
    m.val_loss = vp.loss;
    m.val_acc = vp.acc;
    result.history.push_back(m);

    if (cfg.verbose)
      std::fprintf(stderr, "epoch=%d train_loss=%.6f train_acc=%.6f val_loss=%.6f val_acc=%.6f\n",
                   epoch, m.train_loss, m.train_acc, m.val_loss, m.val_acc);

    if (m.val_acc > result.best.val_acc) {
      result.best.params = params;
      result.best.epoch = epoch;
      result.best.val_acc = m.val_acc;
    }
  }
  return result;
}

void export_history(std::span<const EpochMetrics> history, const std::filesystem::path& path) {
  if (history.empty()) throw std::invalid_argument("export_history: empty history");
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  char buf[160];
  for (const EpochMetrics& m : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g\n", m.epoch, m.train_loss,
                  m.train_acc, m.val_loss, m.val_acc);
    out << buf;
  }
  if (!out) throw io_error("write failed for " + path.string());
}

std::vector<EpochMetrics> load_history(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  std::vector<EpochMetrics> history;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) continue;  // header
    if (line.empty()) continue;
    EpochMetrics m;
    std::istringstream ss(line);
    char comma;
    if (!(ss >> m.epoch >> comma >> m.train_loss >> comma >> m.train_acc >> comma >> m.val_loss >>
          comma >> m.val_acc))
      throw parse_error("malformed history row", line_no);
    history.push_back(m);
  }
  return history;
}

Checkpoint resolve_best(std::span<const EpochMetrics> history,
                        std::span<const Checkpoint> checkpoints) {
  if (history.empty()) throw std::invalid_argument("resolve_best: empty history");
  int best_epoch = history.front().epoch;
  double best_acc = history.front().val_acc;
  for (const EpochMetrics& m : history) {
    if (m.val_acc > best_acc) {  // strict: plateaus keep the earlier epoch
      best_acc = m.val_acc;
      best_epoch = m.epoch;
    }
  }
  for (const Checkpoint& c : checkpoints)
    if (c.epoch == best_epoch) return c;
  throw std::invalid_argument("resolve_best: no checkpoint captured for epoch " +
                              std::to_string(best_epoch));
}

}  // namespace aqnn
