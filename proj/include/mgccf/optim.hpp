#pragma once

#include <cstdint>
#include <string>

#include "mgccf/matrix.hpp"

namespace mgccf {

// A learnable tensor with its gradient buffer and Adam state. All four
// matrices share one shape; grad is zeroed by each optimizer step.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;
  std::int64_t step_count = 0;
  bool frozen = false;  // excluded from optimizer updates

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)),
        value(std::move(v)),
        grad(value.rows, value.cols),
        adam_m(value.rows, value.cols),
        adam_v(value.rows, value.cols) {}

  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard Adam with bias correction. Throws NumericsError on a non-finite
// gradient, naming the parameter. Frozen parameters only have their grad
// cleared. grad is zeroed afterwards and step_count incremented.
void adam_step(Parameter& p, const AdamConfig& cfg);

}  // namespace mgccf
