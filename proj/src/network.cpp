#include "aqnn/network.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>

#include "aqnn/rng.hpp"

namespace aqnn {

namespace {

constexpr int kOutputClasses = 4;
constexpr std::uint32_t kMaxDim = 1u << 20;

std::string kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv1d: return "conv1d";
    case LayerKind::dense: return "dense";
    case LayerKind::relu: return "relu";
    case LayerKind::flatten: return "flatten";
    case LayerKind::softmax: return "softmax";
  }
  return "unknown";
}

void check_desc_fields(const LayerDesc& d, std::size_t index) {
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("layer " + std::to_string(index) + " (" + kind_name(d.kind) +
                                "): " + msg);
  };
  switch (d.kind) {
    case LayerKind::conv1d:
      if (d.filters == 0 || d.kernel_size == 0 || d.in_channels == 0)
        fail("filters, kernel_size and in_channels must be positive");
      if (d.filters > kMaxDim || d.kernel_size > kMaxDim || d.in_channels > kMaxDim)
        fail("dimension exceeds sanity bound");
      break;
    case LayerKind::dense:
      if (d.in_dim == 0 || d.out_dim == 0) fail("in_dim and out_dim must be positive");
      if (d.in_dim > kMaxDim || d.out_dim > kMaxDim) fail("dimension exceeds sanity bound");
      break;
    default:
      break;
  }
}

}  // namespace

Architecture reference_cnn_arch() {
  Architecture a;
  a.input_length = 6;
  a.input_channels = 1;
  a.layers = {LayerDesc::conv1d(16, 3, 1), LayerDesc::relu(), LayerDesc::conv1d(24, 3, 16),
              LayerDesc::relu(),           LayerDesc::flatten(), LayerDesc::dense(144, 28),
              LayerDesc::relu(),           LayerDesc::dense(28, 4), LayerDesc::softmax()};
  return a;
}

void validate_architecture(const Architecture& arch) {
  if (arch.input_length <= 0 || arch.input_channels <= 0)
    throw std::invalid_argument("architecture: input shape must be positive, got " +
                                std::to_string(arch.input_length) + "x" +
                                std::to_string(arch.input_channels));
  if (arch.layers.empty()) throw std::invalid_argument("architecture: no layers");

  long length = arch.input_length;
  long channels = arch.input_channels;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const LayerDesc& d = arch.layers[i];
    check_desc_fields(d, i);
    auto fail = [&](const std::string& msg) {
      throw std::invalid_argument("layer " + std::to_string(i) + " (" + kind_name(d.kind) +
                                  "): " + msg);
    };
    if (d.kind == LayerKind::softmax && i + 1 != arch.layers.size())
      fail("softmax must be the final layer");
    switch (d.kind) {
      case LayerKind::conv1d:
        if (channels != static_cast<long>(d.in_channels))
          fail("expects " + std::to_string(d.in_channels) + " input channels, got " +
               std::to_string(channels));
        channels = d.filters;
        break;
      case LayerKind::dense:
        if (channels != 1) fail("expects a flat input, got " + std::to_string(channels) + " channels");
        if (length != static_cast<long>(d.in_dim))
          fail("expects input length " + std::to_string(d.in_dim) + ", got " +
               std::to_string(length));
        length = d.out_dim;
        break;
      case LayerKind::relu:
        break;
      case LayerKind::flatten:
        length *= channels;
        channels = 1;
        break;
      case LayerKind::softmax:
        if (channels != 1)
          fail("expects a flat input, got " + std::to_string(channels) + " channels");
        break;
    }
    if (length > static_cast<long>(kMaxDim) || channels > static_cast<long>(kMaxDim))
      fail("intermediate shape exceeds sanity bound");
  }
  if (arch.layers.back().kind != LayerKind::softmax)
    throw std::invalid_argument("architecture: final layer must be softmax");
  if (length != kOutputClasses || channels != 1)
    throw std::invalid_argument("architecture: final output dimension is " +
                                std::to_string(length * channels) + ", expected " +
                                std::to_string(kOutputClasses));
}

Architecture resolve_input_shape(std::vector<LayerDesc> layers) {
  if (layers.empty()) throw std::invalid_argument("descriptor: no layers");

  // Input channel count comes from the first parameterized layer.
  int input_channels = 0;
  for (const LayerDesc& d : layers) {
    if (d.kind == LayerKind::conv1d) {
      input_channels = static_cast<int>(d.in_channels);
      break;
    }
    if (d.kind == LayerKind::dense) {
      input_channels = 1;
      break;
    }
    if (d.kind == LayerKind::flatten) {
      // A flatten before any parameterized layer forces flat input.
      input_channels = 1;
      break;
    }
  }
  if (input_channels == 0)
    throw std::invalid_argument("descriptor: no parameterized layers, input shape undetermined");

  // Walk with a symbolic input length until a dense layer pins it down.
  bool known = false;
  long length = 0;       // valid once known
  long factor = 1;       // current length = input_length * factor while unknown
  long channels = input_channels;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerDesc& d = layers[i];
    check_desc_fields(d, i);
    auto fail = [&](const std::string& msg) {
      throw std::invalid_argument("descriptor layer " + std::to_string(i) + " (" +
                                  kind_name(d.kind) + "): " + msg);
    };
    switch (d.kind) {
      case LayerKind::conv1d:
        if (channels != static_cast<long>(d.in_channels))
          fail("expects " + std::to_string(d.in_channels) + " input channels, got " +
               std::to_string(channels));
        channels = d.filters;
        break;
      case LayerKind::dense: {
        if (channels != 1) fail("expects a flat input");
        if (known) {
          if (length != static_cast<long>(d.in_dim))
            fail("expects input length " + std::to_string(d.in_dim) + ", got " +
                 std::to_string(length));
        } else {
          if (d.in_dim % factor != 0)
            fail("in_dim " + std::to_string(d.in_dim) + " not divisible by accumulated channels " +
                 std::to_string(factor));
          known = true;
        }
        length = d.out_dim;
        factor = 1;
        break;
      }
      case LayerKind::relu:
        break;
      case LayerKind::flatten:
        if (known)
          length *= channels;
        else
          factor *= channels;
        channels = 1;
        break;
      case LayerKind::softmax:
        break;
    }
    if (channels > static_cast<long>(kMaxDim) || factor > static_cast<long>(kMaxDim))
      fail("shape exceeds sanity bound");
  }
  if (!known) throw std::invalid_argument("descriptor does not determine the input length");

  // Retrace to the first dense layer to recover the input length from its
  // in_dim and the channels folded in by flatten along the way.
  long f = 1;
  long in_len = 0;
  {
    long chan = input_channels;
    for (const LayerDesc& d : layers) {
      if (d.kind == LayerKind::conv1d) chan = d.filters;
      if (d.kind == LayerKind::flatten) {
        f *= chan;
        chan = 1;
      }
      if (d.kind == LayerKind::dense) {
        in_len = static_cast<long>(d.in_dim) / f;
        break;
      }
    }
  }
  Architecture arch;
  arch.input_length = static_cast<int>(in_len);
  arch.input_channels = input_channels;
  arch.layers = std::move(layers);
  validate_architecture(arch);
  return arch;
}

Network build_network(const Architecture& arch) {
  validate_architecture(arch);
  Network net;
  net.input_length = arch.input_length;
  net.input_channels = arch.input_channels;
  net.layers.reserve(arch.layers.size());
  for (const LayerDesc& d : arch.layers) {
    switch (d.kind) {
      case LayerKind::conv1d:
        net.layers.emplace_back(Conv1DLayer(static_cast<int>(d.filters),
                                            static_cast<int>(d.kernel_size),
                                            static_cast<int>(d.in_channels)));
        break;
      case LayerKind::dense:
        net.layers.emplace_back(
            DenseLayer(static_cast<int>(d.in_dim), static_cast<int>(d.out_dim)));
        break;
      case LayerKind::relu:
        net.layers.emplace_back(ReLULayer{});
        break;
      case LayerKind::flatten:
        net.layers.emplace_back(FlattenLayer{});
        break;
      case LayerKind::softmax:
        net.layers.emplace_back(SoftmaxLayer{});
        break;
    }
  }
  return net;
}

Network init_network(const Architecture& arch, std::uint32_t seed) {
  Network net = build_network(arch);
  Rng rng(seed);

  // He-uniform when the layer feeds a ReLU, Glorot-uniform otherwise
  // (the softmax head). Flatten is transparent for this scan.
  auto feeds_relu = [&](std::size_t i) {
    for (std::size_t j = i + 1; j < arch.layers.size(); ++j) {
      switch (arch.layers[j].kind) {
        case LayerKind::flatten: continue;
        case LayerKind::relu: return true;
        default: return false;
      }
    }
    return false;
  };

  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const bool relu_next = feeds_relu(i);
    if (auto* conv = std::get_if<Conv1DLayer>(&net.layers[i])) {
      const double fan_in = static_cast<double>(conv->kernel_size) * conv->in_channels;
      const double fan_out = static_cast<double>(conv->kernel_size) * conv->filters;
      const float limit = static_cast<float>(
          relu_next ? std::sqrt(6.0 / fan_in) : std::sqrt(6.0 / (fan_in + fan_out)));
      for (float& w : conv->weights) w = rng.uniform(-limit, limit);
    } else if (auto* dense = std::get_if<DenseLayer>(&net.layers[i])) {
      const double fan_in = dense->in_dim;
      const double fan_out = dense->out_dim;
      const float limit = static_cast<float>(
          relu_next ? std::sqrt(6.0 / fan_in) : std::sqrt(6.0 / (fan_in + fan_out)));
      for (float& w : dense->weights) w = rng.uniform(-limit, limit);
    }
  }
  return net;
}

long count_params(const Network& net) {
  long total = 0;
  for (const Layer& layer : net.layers) {
    if (const auto* conv = std::get_if<Conv1DLayer>(&layer))
      total += conv->param_count();
    else if (const auto* dense = std::get_if<DenseLayer>(&layer))
      total += dense->param_count();
  }
  return total;
}

Architecture describe(const Network& net) {
  Architecture arch;
  arch.input_length = net.input_length;
  arch.input_channels = net.input_channels;
  for (const Layer& layer : net.layers) {
    if (const auto* conv = std::get_if<Conv1DLayer>(&layer))
      arch.layers.push_back(LayerDesc::conv1d(static_cast<std::uint32_t>(conv->filters),
                                              static_cast<std::uint32_t>(conv->kernel_size),
                                              static_cast<std::uint32_t>(conv->in_channels)));
    else if (const auto* dense = std::get_if<DenseLayer>(&layer))
      arch.layers.push_back(LayerDesc::dense(static_cast<std::uint32_t>(dense->in_dim),
                                             static_cast<std::uint32_t>(dense->out_dim)));
    else if (std::holds_alternative<ReLULayer>(layer))
      arch.layers.push_back(LayerDesc::relu());
    else if (std::holds_alternative<FlattenLayer>(layer))
      arch.layers.push_back(LayerDesc::flatten());
    else
      arch.layers.push_back(LayerDesc::softmax());
  }
  return arch;
}

namespace {

std::vector<float> forward_impl(const Network& net, const FeatureMap& sample,
                                std::vector<FeatureMap>* cache) {
  if (net.layers.empty()) throw std::invalid_argument("network has no layers");
  if (sample.length != net.input_length || sample.channels != net.input_channels)
    throw std::invalid_argument("network input shape " + std::to_string(sample.length) + "x" +
                                std::to_string(sample.channels) + " != expected " +
                                std::to_string(net.input_length) + "x" +
                                std::to_string(net.input_channels));
  if (!all_finite(sample)) throw std::invalid_argument("network input contains non-finite values");

  FeatureMap cur = sample;
  for (const Layer& layer : net.layers) {
    if (cache) cache->push_back(cur);
    if (const auto* conv = std::get_if<Conv1DLayer>(&layer)) {
      cur = conv1d_forward(cur, *conv);
    } else if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      if (cur.channels != 1)
        throw std::invalid_argument("dense layer expects a flat input, got " +
                                    std::to_string(cur.channels) + " channels");
      cur = FeatureMap(dense->out_dim, 1, dense_forward(cur.values, *dense));
    } else if (std::holds_alternative<ReLULayer>(layer)) {
      cur = relu_forward(cur);
    } else if (std::holds_alternative<FlattenLayer>(layer)) {
      cur = FeatureMap(cur.length * cur.channels, 1, std::move(cur.values));
    } else {
      if (cur.channels != 1)
        throw std::invalid_argument("softmax expects a flat input, got " +
                                    std::to_string(cur.channels) + " channels");
      cur = FeatureMap(cur.length, 1, softmax(cur.values));
    }
  }
  return std::move(cur.values);
}

}  // namespace

std::vector<float> network_forward(Network& net, const FeatureMap& sample) {
  net.clear_cache();
  std::vector<FeatureMap> cache;
  cache.reserve(net.layers.size());
  std::vector<float> probs = forward_impl(net, sample, &cache);
  net.cached_inputs = std::move(cache);
  net.cached_probs = probs;
  net.cache_valid = true;
  return probs;
}

std::vector<float> infer(const Network& net, const FeatureMap& sample) {
  return forward_impl(net, sample, nullptr);
}

std::vector<float> network_backward(Network& net, int target) {
  if (!net.cache_valid)
    throw std::logic_error("network_backward requires a prior network_forward on this instance");
  if (target < 0 || target >= static_cast<int>(net.cached_probs.size()))
    throw std::invalid_argument("network_backward: target " + std::to_string(target) +
                                " outside 0.." + std::to_string(net.cached_probs.size() - 1));
  if (!std::holds_alternative<SoftmaxLayer>(net.layers.back()))
    throw std::logic_error("network_backward requires a softmax output layer");

  // Per-layer flat offsets in canonical order.
  const long total = count_params(net);
  std::vector<float> flat(static_cast<std::size_t>(total), 0.0f);
  std::vector<std::size_t> offsets(net.layers.size(), 0);
  {
    std::size_t off = 0;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      offsets[i] = off;
      if (const auto* conv = std::get_if<Conv1DLayer>(&net.layers[i]))
        off += static_cast<std::size_t>(conv->param_count());
      else if (const auto* dense = std::get_if<DenseLayer>(&net.layers[i]))
        off += static_cast<std::size_t>(dense->param_count());
    }
  }

  // Fused softmax/cross-entropy gradient w.r.t. the logits.
  FeatureMap grad(static_cast<int>(net.cached_probs.size()), 1, net.cached_probs);
  grad.values[static_cast<std::size_t>(target)] -= 1.0f;

  for (std::size_t idx = net.layers.size(); idx-- > 0;) {
    const Layer& layer = net.layers[idx];
    const FeatureMap& cached = net.cached_inputs[idx];
    if (std::holds_alternative<SoftmaxLayer>(layer)) {
      if (idx + 1 != net.layers.size())
        throw std::logic_error("softmax must be the final layer");
      continue;  // folded into the cross-entropy gradient above
    } else if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      DenseGrads g = dense_backward(grad.values, cached.values, *dense);
      std::copy(g.weights.begin(), g.weights.end(), flat.begin() + offsets[idx]);
      std::copy(g.bias.begin(), g.bias.end(),
                flat.begin() + offsets[idx] + static_cast<std::ptrdiff_t>(g.weights.size()));
      grad = FeatureMap(dense->in_dim, 1, std::move(g.input));
    } else if (std::holds_alternative<ReLULayer>(layer)) {
      grad = relu_backward(grad, cached);
    } else if (std::holds_alternative<FlattenLayer>(layer)) {
      grad = FeatureMap(cached.length, cached.channels, std::move(grad.values));
    } else if (const auto* conv = std::get_if<Conv1DLayer>(&layer)) {
      ConvGrads g = conv1d_backward(grad, cached, *conv);
      std::copy(g.weights.begin(), g.weights.end(), flat.begin() + offsets[idx]);
      std::copy(g.bias.begin(), g.bias.end(),
                flat.begin() + offsets[idx] + static_cast<std::ptrdiff_t>(g.weights.size()));
      grad = std::move(g.input);
    }
  }
  return flat;
}

std::vector<float> get_params(const Network& net) {
  std::vector<float> flat;
  flat.reserve(static_cast<std::size_t>(count_params(net)));
  for (const Layer& layer : net.layers) {
    if (const auto* conv = std::get_if<Conv1DLayer>(&layer)) {
      flat.insert(flat.end(), conv->weights.begin(), conv->weights.end());
      flat.insert(flat.end(), conv->bias.begin(), conv->bias.end());
    } else if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      flat.insert(flat.end(), dense->weights.begin(), dense->weights.end());
      flat.insert(flat.end(), dense->bias.begin(), dense->bias.end());
    }
  }
  return flat;
}

void set_params(Network& net, std::span<const float> params) {
  if (static_cast<long>(params.size()) != count_params(net))
    throw std::invalid_argument("set_params: got " + std::to_string(params.size()) +
                                " values, network has " + std::to_string(count_params(net)));
  std::size_t off = 0;
  for (Layer& layer : net.layers) {
    if (auto* conv = std::get_if<Conv1DLayer>(&layer)) {
      std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(off), conv->weights.size(),
                  conv->weights.begin());
      off += conv->weights.size();
      std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(off), conv->bias.size(),
                  conv->bias.begin());
      off += conv->bias.size();
    } else if (auto* dense = std::get_if<DenseLayer>(&layer)) {
      std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(off), dense->weights.size(),
                  dense->weights.begin());
      off += dense->weights.size();
      std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(off), dense->bias.size(),
                  dense->bias.begin());
      off += dense->bias.size();
    }
  }
}

}  // namespace aqnn
