#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "aqnn/dataset.hpp"
#include "aqnn/network.hpp"

namespace aqnn {

// Brute-force k-nearest-neighbors over normalized training samples.
struct KNNModel {
  std::vector<std::array<float, kNumSensors>> points;
  std::vector<int> labels;
  int k = 5;
};

// Stores the normalized training split. k must be a positive odd number no
// larger than the training-set size.
KNNModel knn_fit(const Dataset& train, const NormStats& norm, int k = 5);

// Majority label among the k nearest by Euclidean distance. Vote ties break
// toward the smaller summed distance, then the lower class index.
int knn_predict(const KNNModel& model, std::span<const float> query);

struct KnnEval {
  double accuracy = 0.0;
  std::vector<int> predictions;
};
KnnEval knn_evaluate(const KNNModel& model, const Dataset& ds, const NormStats& norm);

// Dense 6-128-64-4 MLP head-to-head baseline; 9,412 parameters. Trains and
// evaluates through the same code paths as the CNN.
Architecture reference_mlp_arch();
Network build_mlp(std::uint32_t seed);

}  // namespace aqnn
