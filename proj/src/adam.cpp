#include "aqnn/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace aqnn {

AdamState AdamState::for_params(std::size_t n, float lr_, float beta1_, float beta2_,
                                float epsilon_) {
  if (lr_ <= 0.0f) throw std::invalid_argument("adam: lr must be positive");
  if (beta1_ <= 0.0f || beta1_ >= 1.0f || beta2_ <= 0.0f || beta2_ >= 1.0f)
    throw std::invalid_argument("adam: betas must lie in (0,1)");
  if (epsilon_ <= 0.0f) throw std::invalid_argument("adam: epsilon must be positive");
  AdamState s;
  s.m.assign(n, 0.0f);
  s.v.assign(n, 0.0f);
  s.t = 0;
  s.lr = lr_;
  s.beta1 = beta1_;
  s.beta2 = beta2_;
  s.epsilon = epsilon_;
  return s;
}

void adam_step(std::span<float> params, std::span<const float> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size())
    throw std::invalid_argument("adam_step: length mismatch (params " +
                                std::to_string(params.size()) + ", grads " +
                                std::to_string(grads.size()) + ", moments " +
                                std::to_string(state.m.size()) + ")");

  ++state.t;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double lr = state.lr;
  const double eps = state.epsilon;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));

  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    const double m = b1 * state.m[i] + (1.0 - b1) * g;
    const double v = b2 * state.v[i] + (1.0 - b2) * g * g;
    state.m[i] = static_cast<float>(m);
    state.v[i] = static_cast<float>(v);
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    params[i] = static_cast<float>(params[i] - lr * m_hat / (std::sqrt(v_hat) + eps));
  }
}

}  // namespace aqnn
