#include "mgccf/optim.hpp"

#include <cassert>
#include <cmath>

#include "mgccf/errors.hpp"

namespace mgccf {

void adam_step(Parameter& p, const AdamConfig& cfg) {
  if (has_nonfinite(p.grad)) {
    throw NumericsError("non-finite gradient in parameter '" + p.name + "'");
  }
  if (p.frozen) {
    p.zero_grad();
    return;
  }
  p.step_count += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p.step_count));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p.step_count));
  for (std::size_t i = 0; i < p.value.size(); ++i) {
    const double g = p.grad.data[i];
    double& m = p.adam_m.data[i];
    double& v = p.adam_v.data[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    p.value.data[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
  p.zero_grad();
#ifndef NDEBUG
  assert(!has_nonfinite(p.value));
#endif
}

}  // namespace mgccf
