#pragma once

#include <span>

#include "snakesynth/tensor.hpp"

namespace snakesynth {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-7;
};

/// One bias-corrected Adam update of every parameter from its current grad.
template <typename T>
void adam_step(std::span<Parameter<T>* const> params, const AdamConfig& config);

}  // namespace snakesynth
