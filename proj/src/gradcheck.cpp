#include "aqnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

namespace aqnn {

namespace {

// Near-zero gradients are compared absolutely rather than amplifying
// float-precision noise into the relative error.
constexpr double kDenomFloor = 0.1;

}  // namespace

// Forward pass and cross-entropy evaluated entirely in double, reading the
// weights from the supplied flat vector. Differentiating this function with
// central differences gives the reference the f32 backward pass is checked
// against; the difference quotient itself is then accurate to ~1e-6, far
// below the 1e-3 gate.
double network_loss_f64(const Network& net, std::span<const double> params,
                        const FeatureMap& sample, int target) {
  if (static_cast<long>(params.size()) != count_params(net))
    throw std::invalid_argument("network_loss_f64: parameter count mismatch");
  if (net.layers.empty() || !std::holds_alternative<SoftmaxLayer>(net.layers.back()))
    throw std::logic_error("network_loss_f64 requires a softmax output layer");

  std::vector<double> cur(sample.values.begin(), sample.values.end());
  int length = sample.length;
  int channels = sample.channels;
  std::size_t off = 0;

  for (const Layer& layer : net.layers) {
    if (const auto* conv = std::get_if<Conv1DLayer>(&layer)) {
      const double* w = params.data() + off;
      const double* b = w + static_cast<std::size_t>(conv->filters) * conv->kernel_size *
                                conv->in_channels;
      const int offset = conv->kernel_size / 2;
      std::vector<double> out(static_cast<std::size_t>(length) * conv->filters);
      for (int i = 0; i < length; ++i) {
        for (int f = 0; f < conv->filters; ++f) {
          double acc = b[f];
          for (int k = 0; k < conv->kernel_size; ++k) {
            const int src = i + k - offset;
            if (src < 0 || src >= length) continue;
            for (int c = 0; c < conv->in_channels; ++c)
              acc += w[(static_cast<std::size_t>(f) * conv->kernel_size + k) * conv->in_channels +
                       c] *
                     cur[static_cast<std::size_t>(src) * channels + c];
          }
          out[static_cast<std::size_t>(i) * conv->filters + f] = acc;
        }
      }
      cur = std::move(out);
      channels = conv->filters;
      off += static_cast<std::size_t>(conv->param_count());
    } else if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      const double* w = params.data() + off;
      const double* b = w + static_cast<std::size_t>(dense->in_dim) * dense->out_dim;
      std::vector<double> out(static_cast<std::size_t>(dense->out_dim));
      for (int j = 0; j < dense->out_dim; ++j) {
        double acc = b[j];
        for (int i = 0; i < dense->in_dim; ++i)
          acc += w[static_cast<std::size_t>(i) * dense->out_dim + j] * cur[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(j)] = acc;
      }
      cur = std::move(out);
      length = dense->out_dim;
      channels = 1;
      off += static_cast<std::size_t>(dense->param_count());
    } else if (std::holds_alternative<ReLULayer>(layer)) {
      for (double& x : cur) x = x > 0.0 ? x : 0.0;
    } else if (std::holds_alternative<FlattenLayer>(layer)) {
      length *= channels;
      channels = 1;
    } else {
      double max_logit = cur[0];
      for (double x : cur) max_logit = std::max(max_logit, x);
      double sum = 0.0;
      for (double x : cur) sum += std::exp(x - max_logit);
      return -(cur[static_cast<std::size_t>(target)] - max_logit - std::log(sum));
    }
  }
  throw std::logic_error("network_loss_f64: unreachable");
}

double grad_check_against(Network& net, const FeatureMap& sample, int target,
                          std::span<const float> analytic, double eps, std::size_t max_params) {
  if (eps <= 0.0) throw std::invalid_argument("grad_check: eps must be positive");
  const std::vector<float> flat = get_params(net);
  if (analytic.size() != flat.size())
    throw std::invalid_argument("grad_check: analytic gradient length mismatch");

  std::vector<double> params(flat.begin(), flat.end());
  const std::size_t n = params.size();

  std::vector<std::size_t> picks;
  if (max_params > 0 && n > max_params) {
    const std::size_t m = std::max<std::size_t>(max_params, 200);
    picks.reserve(m);
    for (std::size_t i = 0; i < m; ++i) picks.push_back(i * n / m);
  } else {
    picks.resize(n);
    for (std::size_t i = 0; i < n; ++i) picks[i] = i;
  }

  double worst = 0.0;
  for (std::size_t i : picks) {
    const double saved = params[i];
    params[i] = saved + eps;
    const double up = network_loss_f64(net, params, sample, target);
    params[i] = saved - eps;
    const double down = network_loss_f64(net, params, sample, target);
    params[i] = saved;

    const double numeric = (up - down) / (2.0 * eps);
    const double a = analytic[i];
    const double denom = std::max({std::fabs(a), std::fabs(numeric), kDenomFloor});
    worst = std::max(worst, std::fabs(a - numeric) / denom);
  }
  return worst;
}

double grad_check(Network& net, const FeatureMap& sample, int target, double eps,
                  std::size_t max_params) {
  network_forward(net, sample);
  const std::vector<float> analytic = network_backward(net, target);
  return grad_check_against(net, sample, target, analytic, eps, max_params);
}

}  // namespace aqnn
