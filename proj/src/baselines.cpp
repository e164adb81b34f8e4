#include "aqnn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace aqnn {

KNNModel knn_fit(const Dataset& train, const NormStats& norm, int k) {
  if (train.empty()) throw std::invalid_argument("knn_fit: empty training set");
  if (k < 1) throw std::invalid_argument("knn_fit: k must be positive");
  if (k % 2 == 0) throw std::invalid_argument("knn_fit: k must be odd, got " + std::to_string(k));
  if (static_cast<std::size_t>(k) > train.size())
    throw std::invalid_argument("knn_fit: k=" + std::to_string(k) + " exceeds training size " +
                                std::to_string(train.size()));

  KNNModel model;
  model.k = k;
  model.points.reserve(train.size());
  model.labels.reserve(train.size());
  for (std::size_t i = 0; i < train.samples.size(); ++i) {
    const SensorSample& s = train.samples[i];
    if (!s.label)
      throw std::invalid_argument("knn_fit: unlabeled sample at index " + std::to_string(i));
    const FeatureMap z = apply_normalizer(s, norm);
    std::array<float, kNumSensors> point{};
    std::copy_n(z.values.begin(), kNumSensors, point.begin());
    model.points.push_back(point);
    model.labels.push_back(*s.label);
  }
  return model;
}

int knn_predict(const KNNModel& model, std::span<const float> query) {
  if (model.points.empty()) throw std::invalid_argument("knn_predict: empty model");
  if (query.size() != kNumSensors)
    throw std::invalid_argument("knn_predict: query length " + std::to_string(query.size()) +
                                " != " + std::to_string(kNumSensors));
  if (model.k < 1 || static_cast<std::size_t>(model.k) > model.points.size())
    throw std::invalid_argument("knn_predict: k=" + std::to_string(model.k) +
                                " exceeds training size " + std::to_string(model.points.size()));

  // (distance, index) pairs ordered lexicographically so the selected k-set
  // is unique even with duplicate points.
  std::vector<std::pair<double, std::size_t>> dists;
  dists.reserve(model.points.size());
  for (std::size_t i = 0; i < model.points.size(); ++i) {
    double sq = 0.0;
    for (int c = 0; c < kNumSensors; ++c) {
      const double d = static_cast<double>(query[static_cast<std::size_t>(c)]) -
                       static_cast<double>(model.points[i][static_cast<std::size_t>(c)]);
      sq += d * d;
    }
    dists.emplace_back(std::sqrt(sq), i);
  }
  const auto first_k = dists.begin() + model.k;
  std::partial_sort(dists.begin(), first_k, dists.end());

  std::array<int, kNumClasses> votes{};
  std::array<double, kNumClasses> summed{};
  for (auto it = dists.begin(); it != first_k; ++it) {
    const int label = model.labels[it->second];
    ++votes[static_cast<std::size_t>(label)];
    summed[static_cast<std::size_t>(label)] += it->first;
  }

  int best = 0;
  for (int c = 1; c < kNumClasses; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    const auto bi = static_cast<std::size_t>(best);
    if (votes[ci] > votes[bi] || (votes[ci] == votes[bi] && votes[ci] > 0 &&
                                  summed[ci] < summed[bi]))
      best = c;
  }
  return best;
}

KnnEval knn_evaluate(const KNNModel& model, const Dataset& ds, const NormStats& norm) {
  if (ds.empty()) throw std::invalid_argument("knn_evaluate: empty dataset");
  KnnEval eval;
  eval.predictions.reserve(ds.size());
  long correct = 0;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const SensorSample& s = ds.samples[i];
    if (!s.label)
      throw std::invalid_argument("knn_evaluate: unlabeled sample at index " + std::to_string(i));
    const FeatureMap z = apply_normalizer(s, norm);
    const int pred = knn_predict(model, z.values);
    eval.predictions.push_back(pred);
    if (pred == *s.label) ++correct;
  }
  eval.accuracy = static_cast<double>(correct) / static_cast<double>(ds.size());
  return eval;
}

Architecture reference_mlp_arch() {
  Architecture a;
  a.input_length = 6;
  a.input_channels = 1;
  a.layers = {LayerDesc::dense(6, 128), LayerDesc::relu(),    LayerDesc::dense(128, 64),
              LayerDesc::relu(),        LayerDesc::dense(64, 4), LayerDesc::softmax()};
  return a;
}

Network build_mlp(std::uint32_t seed) { return init_network(reference_mlp_arch(), seed); }

}  // namespace aqnn
