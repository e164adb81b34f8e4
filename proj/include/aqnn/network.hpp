#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "aqnn/layers.hpp"
#include "aqnn/tensor.hpp"

namespace aqnn {

enum class LayerKind : std::uint8_t { conv1d = 0, dense = 1, relu = 2, flatten = 3, softmax = 4 };

// Shape-only description of one layer, as stored in model files.
struct LayerDesc {
  LayerKind kind = LayerKind::relu;
  std::uint32_t filters = 0, kernel_size = 0, in_channels = 0;  // conv1d
  std::uint32_t in_dim = 0, out_dim = 0;                        // dense

  static LayerDesc conv1d(std::uint32_t filters, std::uint32_t kernel_size,
                          std::uint32_t in_channels) {
    LayerDesc d;
    d.kind = LayerKind::conv1d;
    d.filters = filters;
    d.kernel_size = kernel_size;
    d.in_channels = in_channels;
    return d;
  }
  static LayerDesc dense(std::uint32_t in_dim, std::uint32_t out_dim) {
    LayerDesc d;
    d.kind = LayerKind::dense;
    d.in_dim = in_dim;
    d.out_dim = out_dim;
    return d;
  }
  static LayerDesc relu() { return LayerDesc{LayerKind::relu}; }
  static LayerDesc flatten() { return LayerDesc{LayerKind::flatten}; }
  static LayerDesc softmax() { return LayerDesc{LayerKind::softmax}; }

  bool operator==(const LayerDesc&) const = default;
};

struct Architecture {
  int input_length = 0;
  int input_channels = 0;
  std::vector<LayerDesc> layers;

  bool operator==(const Architecture&) const = default;
};

// The 6-sensor, 4-class CNN: Conv1D(16,k3) - ReLU - Conv1D(24,k3) - ReLU -
// Flatten - Dense(28) - ReLU - Dense(4) - Softmax. 5,416 parameters.
Architecture reference_cnn_arch();

// Checks adjacent shape compatibility and the 4-way softmax head.
// Throws std::invalid_argument naming the offending layer/dimension.
void validate_architecture(const Architecture& arch);

// Reconstructs the input shape implied by a bare layer list (model files
// store only the records). Throws std::invalid_argument when the list is
// inconsistent or does not determine the input shape.
Architecture resolve_input_shape(std::vector<LayerDesc> layers);

struct ReLULayer {};
struct FlattenLayer {};
struct SoftmaxLayer {};

using Layer = std::variant<Conv1DLayer, DenseLayer, ReLULayer, FlattenLayer, SoftmaxLayer>;

// Ordered layer stack plus the per-layer input cache a backward pass needs.
// A Network being trained is single-owner; once training is done (cache
// cleared) it is immutable and safe to share across threads via infer().
struct Network {
  int input_length = 0;
  int input_channels = 0;
  std::vector<Layer> layers;

  std::vector<FeatureMap> cached_inputs;
  std::vector<float> cached_probs;
  bool cache_valid = false;

  void clear_cache() {
    cached_inputs.clear();
    cached_probs.clear();
    cache_valid = false;
  }
};

// Zero-initialized network with validated shapes.
Network build_network(const Architecture& arch);

// He-uniform for layers feeding a ReLU, Glorot-uniform for the output layer,
// zero biases. Deterministic given the seed.
Network init_network(const Architecture& arch, std::uint32_t seed);

long count_params(const Network& net);

Architecture describe(const Network& net);

// Forward pass that records per-layer inputs for network_backward.
// Returns the 4-class probability vector.
std::vector<float> network_forward(Network& net, const FeatureMap& sample);

// Cache-free forward pass; safe on a shared const network.
std::vector<float> infer(const Network& net, const FeatureMap& sample);

// Gradient of -ln(p[target]) w.r.t. every parameter, flattened in canonical
// order: layer order, weights (row-major) before bias. Requires a prior
// network_forward on this instance.
std::vector<float> network_backward(Network& net, int target);

// Canonical flat parameter vector (same ordering as network_backward).
std::vector<float> get_params(const Network& net);
void set_params(Network& net, std::span<const float> params);

}  // namespace aqnn
