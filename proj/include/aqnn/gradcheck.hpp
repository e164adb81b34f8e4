#pragma once

#include <cstddef>
#include <span>

#include "aqnn/network.hpp"
#include "aqnn/tensor.hpp"

namespace aqnn {

// Sample loss evaluated in double precision with the given flat parameter
// vector substituted for the network's own weights. This is the reference
// function the finite-difference check differentiates.
double network_loss_f64(const Network& net, std::span<const double> params,
                        const FeatureMap& sample, int target);

// Central finite differences (step eps) against network_backward over every
// parameter, or a deterministic subsample of max_params (>= 200) when
// max_params > 0. Returns the worst relative error, where the denominator is
// floored at 0.1 so near-zero gradients are compared absolutely.
double grad_check(Network& net, const FeatureMap& sample, int target, double eps = 1e-3,
                  std::size_t max_params = 0);

// Same comparison but against a caller-supplied analytic gradient; lets the
// harness itself be tested against deliberately corrupted gradients.
double grad_check_against(Network& net, const FeatureMap& sample, int target,
                          std::span<const float> analytic, double eps = 1e-3,
                          std::size_t max_params = 0);

}  // namespace aqnn
