#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace aqnn {

// Adam optimizer state: one first/second moment per parameter.
// Moments are stored as 32-bit floats; the per-element update is evaluated
// in double before rounding back to storage precision.
struct AdamState {
  std::vector<float> m;
  std::vector<float> v;
  long t = 0;
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-7f;

  static AdamState for_params(std::size_t n, float lr = 1e-3f, float beta1 = 0.9f,
                              float beta2 = 0.999f, float epsilon = 1e-7f);
};

// In-place bias-corrected Adam update; increments state.t by one.
void adam_step(std::span<float> params, std::span<const float> grads, AdamState& state);

}  // namespace aqnn
