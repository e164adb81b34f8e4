#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "aqnn/dataset.hpp"
#include "aqnn/network.hpp"

namespace aqnn {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 64;
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-7f;
  std::uint32_t seed = 42;
  bool shuffle_each_epoch = true;
  // Emit "epoch=<i> train_loss=... " lines to stderr.
  bool verbose = false;
};

struct EpochMetrics {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

// Parameter snapshot at the epoch with the best validation accuracy so far.
struct Checkpoint {
  std::vector<float> params;
  int epoch = 0;
  double val_acc = 0.0;
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochMetrics> history;
};

// A normalized, labeled dataset ready for the training loop.
struct TrainingSet {
  std::vector<FeatureMap> inputs;
  std::vector<int> labels;

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }
};

TrainingSet normalize_dataset(const Dataset& ds, const NormStats& stats);

// Mini-batch Adam training. Per epoch: seeded shuffle, batches of
// cfg.batch_size (final partial batch included), gradients averaged over the
// batch, one adam_step per batch, then a validation pass. The checkpoint is
// replaced only on strictly greater validation accuracy. History has exactly
// cfg.epochs entries. Throws numeric_error if the loss goes non-finite.
TrainResult train(Network& net, const TrainingSet& train_set, const TrainingSet& val_set,
                  const TrainConfig& cfg);

// Forward-only pass: mean cross-entropy and accuracy.
struct EvalPass {
  double loss = 0.0;
  double acc = 0.0;
};
EvalPass eval_pass(const Network& net, const TrainingSet& set);

// CSV with header epoch,train_loss,train_acc,val_loss,val_acc.
void export_history(std::span<const EpochMetrics> history, const std::filesystem::path& path);
std::vector<EpochMetrics> load_history(const std::filesystem::path& path);

// Picks the checkpoint at the first epoch achieving the maximum validation
// accuracy (the strict-improvement rule keeps the earliest on plateaus).
Checkpoint resolve_best(std::span<const EpochMetrics> history,
                        std::span<const Checkpoint> checkpoints);

}  // namespace aqnn
