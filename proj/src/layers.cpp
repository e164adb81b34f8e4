#include "aqnn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aqnn {

namespace {

void require_positive(int value, const char* name) {
  if (value <= 0)
    throw std::invalid_argument(std::string(name) + " must be positive, got " +
                                std::to_string(value));
}

}  // namespace

Conv1DLayer::Conv1DLayer(int filters_, int kernel_size_, int in_channels_)
    : filters(filters_), kernel_size(kernel_size_), in_channels(in_channels_) {
  require_positive(filters_, "conv1d: filters");
  require_positive(kernel_size_, "conv1d: kernel_size");
  require_positive(in_channels_, "conv1d: in_channels");
  weights.assign(static_cast<std::size_t>(filters_) * kernel_size_ * in_channels_, 0.0f);
  bias.assign(static_cast<std::size_t>(filters_), 0.0f);
}

DenseLayer::DenseLayer(int in_dim_, int out_dim_) : in_dim(in_dim_), out_dim(out_dim_) {
  require_positive(in_dim_, "dense: in_dim");
  require_positive(out_dim_, "dense: out_dim");
  weights.assign(static_cast<std::size_t>(in_dim_) * out_dim_, 0.0f);
  bias.assign(static_cast<std::size_t>(out_dim_), 0.0f);
}

// out[i][f] = bias[f] + sum_{k,c} w[f][k][c] * x[i+k-K/2][c], zero outside.
// Summation runs index-ascending in k then c so results are reproducible
// bit-for-bit against the reference loop.
FeatureMap conv1d_forward(const FeatureMap& input, const Conv1DLayer& layer) {
  if (input.channels != layer.in_channels)
    throw std::invalid_argument("conv1d: input channels " + std::to_string(input.channels) +
                                " != layer in_channels " + std::to_string(layer.in_channels));
  const int offset = layer.kernel_size / 2;
  FeatureMap out(input.length, layer.filters);
  for (int i = 0; i < input.length; ++i) {
    for (int f = 0; f < layer.filters; ++f) {
      float acc = layer.bias[f];
      for (int k = 0; k < layer.kernel_size; ++k) {
        const int src = i + k - offset;
        if (src < 0 || src >= input.length) continue;
        for (int c = 0; c < layer.in_channels; ++c) acc += layer.w(f, k, c) * input.at(src, c);
      }
      out.at(i, f) = acc;
    }
  }
  return out;
}

ConvGrads conv1d_backward(const FeatureMap& grad_out, const FeatureMap& cached_input,
                          const Conv1DLayer& layer) {
  if (cached_input.channels != layer.in_channels)
    throw std::invalid_argument("conv1d backward: input channels " +
                                std::to_string(cached_input.channels) + " != layer in_channels " +
                                std::to_string(layer.in_channels));
  if (grad_out.length != cached_input.length || grad_out.channels != layer.filters)
    throw std::invalid_argument("conv1d backward: grad_out shape " +
                                std::to_string(grad_out.length) + "x" +
                                std::to_string(grad_out.channels) + " != expected " +
                                std::to_string(cached_input.length) + "x" +
                                std::to_string(layer.filters));

  const int offset = layer.kernel_size / 2;
  ConvGrads g;
  g.input = FeatureMap(cached_input.length, cached_input.channels);
  g.weights.assign(layer.weights.size(), 0.0f);
  g.bias.assign(layer.bias.size(), 0.0f);

  for (int f = 0; f < layer.filters; ++f) {
    float acc = 0.0f;
    for (int i = 0; i < grad_out.length; ++i) acc += grad_out.at(i, f);
    g.bias[f] = acc;
  }

  for (int f = 0; f < layer.filters; ++f) {
    for (int k = 0; k < layer.kernel_size; ++k) {
      for (int c = 0; c < layer.in_channels; ++c) {
        float acc = 0.0f;
        for (int i = 0; i < grad_out.length; ++i) {
          const int src = i + k - offset;
          if (src < 0 || src >= cached_input.length) continue;
          acc += grad_out.at(i, f) * cached_input.at(src, c);
        }
        g.weights[(static_cast<std::size_t>(f) * layer.kernel_size + k) * layer.in_channels + c] =
            acc;
      }
    }
  }

  for (int j = 0; j < cached_input.length; ++j) {
    for (int c = 0; c < cached_input.channels; ++c) {
      float acc = 0.0f;
      for (int f = 0; f < layer.filters; ++f) {
        for (int k = 0; k < layer.kernel_size; ++k) {
          const int i = j - k + offset;  // position whose window covers j at tap k
          if (i < 0 || i >= grad_out.length) continue;
          acc += grad_out.at(i, f) * layer.w(f, k, c);
        }
      }
      g.input.at(j, c) = acc;
    }
  }
  return g;
}

std::vector<float> dense_forward(std::span<const float> input, const DenseLayer& layer) {
  if (static_cast<int>(input.size()) != layer.in_dim)
    throw std::invalid_argument("dense: input length " + std::to_string(input.size()) +
                                " != in_dim " + std::to_string(layer.in_dim));
  std::vector<float> out(static_cast<std::size_t>(layer.out_dim));
  for (int j = 0; j < layer.out_dim; ++j) {
    float acc = layer.bias[j];
    for (int i = 0; i < layer.in_dim; ++i) acc += layer.w(i, j) * input[i];
    out[j] = acc;
  }
  return out;
}

DenseGrads dense_backward(std::span<const float> grad_out, std::span<const float> cached_input,
                          const DenseLayer& layer) {
  if (static_cast<int>(grad_out.size()) != layer.out_dim)
    throw std::invalid_argument("dense backward: grad_out length " +
                                std::to_string(grad_out.size()) + " != out_dim " +
                                std::to_string(layer.out_dim));
  if (static_cast<int>(cached_input.size()) != layer.in_dim)
    throw std::invalid_argument("dense backward: input length " +
                                std::to_string(cached_input.size()) + " != in_dim " +
                                std::to_string(layer.in_dim));

  DenseGrads g;
  g.input.assign(cached_input.size(), 0.0f);
  g.weights.assign(layer.weights.size(), 0.0f);
  g.bias.assign(grad_out.begin(), grad_out.end());

  for (int i = 0; i < layer.in_dim; ++i) {
    for (int j = 0; j < layer.out_dim; ++j)
      g.weights[static_cast<std::size_t>(i) * layer.out_dim + j] = cached_input[i] * grad_out[j];
  }
  for (int i = 0; i < layer.in_dim; ++i) {
    float acc = 0.0f;
    for (int j = 0; j < layer.out_dim; ++j) acc += layer.w(i, j) * grad_out[j];
    g.input[i] = acc;
  }
  return g;
}

FeatureMap relu_forward(const FeatureMap& input) {
  FeatureMap out = input;
  for (float& x : out.values) x = x > 0.0f ? x : 0.0f;
  return out;
}

FeatureMap relu_backward(const FeatureMap& grad_out, const FeatureMap& cached_input) {
  if (!grad_out.same_shape(cached_input))
    throw std::invalid_argument("relu backward: gradient shape " + std::to_string(grad_out.length) +
                                "x" + std::to_string(grad_out.channels) + " != input shape " +
                                std::to_string(cached_input.length) + "x" +
                                std::to_string(cached_input.channels));
  FeatureMap out = grad_out;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    if (cached_input.values[i] <= 0.0f) out.values[i] = 0.0f;
  return out;
}

std::vector<float> softmax(std::span<const float> logits) {
  float max_logit = logits[0];
  for (float x : logits) max_logit = std::max(max_logit, x);
  std::vector<float> probs(logits.size());
  float sum = 0.0f;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - max_logit);
    sum += probs[i];
  }
  for (float& p : probs) p /= sum;
  return probs;
}

SoftmaxLoss softmax_cross_entropy(std::span<const float> logits, int target) {
  if (target < 0 || target >= static_cast<int>(logits.size()))
    throw std::invalid_argument("softmax_cross_entropy: target " + std::to_string(target) +
                                " outside 0.." + std::to_string(logits.size() - 1));
  SoftmaxLoss result;
  result.probs = softmax(logits);
  result.loss = cross_entropy(result.probs, target);
  result.grad_logits = result.probs;
  result.grad_logits[static_cast<std::size_t>(target)] -= 1.0f;
  return result;
}

double cross_entropy(std::span<const float> probs, int target) {
  if (target < 0 || target >= static_cast<int>(probs.size()))
    throw std::invalid_argument("cross_entropy: target " + std::to_string(target) + " outside 0.." +
                                std::to_string(probs.size() - 1));
  return -std::log(static_cast<double>(probs[static_cast<std::size_t>(target)]));
}

int predict_class(std::span<const float> probs) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(probs.size()); ++i)
    if (probs[static_cast<std::size_t>(i)] > probs[static_cast<std::size_t>(best)]) best = i;
  return best;
}

}  // namespace aqnn
