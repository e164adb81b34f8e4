#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aqnn/tensor.hpp"

namespace aqnn {

// 1D convolution with same-zero padding: output length equals input length,
// positions outside the input read as zero. Weights are stored row-major as
// [filter][kernel tap][input channel].
struct Conv1DLayer {
  int filters = 0;
  int kernel_size = 0;
  int in_channels = 0;
  std::vector<float> weights;  // filters * kernel_size * in_channels
  std::vector<float> bias;     // filters

  Conv1DLayer() = default;
  Conv1DLayer(int filters_, int kernel_size_, int in_channels_);

  float w(int f, int k, int c) const {
    return weights[(static_cast<std::size_t>(f) * kernel_size + k) * in_channels + c];
  }
  float& w(int f, int k, int c) {
    return weights[(static_cast<std::size_t>(f) * kernel_size + k) * in_channels + c];
  }

  long param_count() const {
    return static_cast<long>(filters) * kernel_size * in_channels + filters;
  }
};

// Fully connected layer; weights stored row-major as [input][output].
struct DenseLayer {
  int in_dim = 0;
  int out_dim = 0;
  std::vector<float> weights;  // in_dim * out_dim
  std::vector<float> bias;     // out_dim

  DenseLayer() = default;
  DenseLayer(int in_dim_, int out_dim_);

  float w(int i, int j) const { return weights[static_cast<std::size_t>(i) * out_dim + j]; }
  float& w(int i, int j) { return weights[static_cast<std::size_t>(i) * out_dim + j]; }

  long param_count() const { return static_cast<long>(in_dim) * out_dim + out_dim; }
};

FeatureMap conv1d_forward(const FeatureMap& input, const Conv1DLayer& layer);

struct ConvGrads {
  FeatureMap input;
  std::vector<float> weights;
  std::vector<float> bias;
};
ConvGrads conv1d_backward(const FeatureMap& grad_out, const FeatureMap& cached_input,
                          const Conv1DLayer& layer);

std::vector<float> dense_forward(std::span<const float> input, const DenseLayer& layer);

struct DenseGrads {
  std::vector<float> input;
  std::vector<float> weights;
  std::vector<float> bias;
};
DenseGrads dense_backward(std::span<const float> grad_out, std::span<const float> cached_input,
                          const DenseLayer& layer);

FeatureMap relu_forward(const FeatureMap& input);
// Upstream gradient masked by indicator(cached_input > 0).
FeatureMap relu_backward(const FeatureMap& grad_out, const FeatureMap& cached_input);

// Numerically stabilized softmax (max subtraction).
std::vector<float> softmax(std::span<const float> logits);

struct SoftmaxLoss {
  std::vector<float> probs;
  double loss = 0.0;  // -ln(probs[target])
  std::vector<float> grad_logits;
};
// Fused softmax + categorical cross-entropy with the exact gradient
// probs - onehot(target).
SoftmaxLoss softmax_cross_entropy(std::span<const float> logits, int target);

// -ln(probs[target]) accumulated in double.
double cross_entropy(std::span<const float> probs, int target);

// Index of the first strict maximum.
int predict_class(std::span<const float> probs);

}  // namespace aqnn
