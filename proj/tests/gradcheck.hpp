#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "mgccf/optim.hpp"

namespace mgccf::testing {

// Central-difference check of d(loss)/d(param) for every entry of every listed
// parameter. loss_fn(true) must rebuild the computation, run backward and
// accumulate into the parameters' grad buffers; loss_fn(false) only returns
// the loss value. The loss must be a deterministic function of the parameter
// values (fix any RNG inside the closure).
inline double max_rel_grad_error(const std::vector<Parameter*>& params,
                                 const std::function<double(bool)>& loss_fn, double h = 1e-5) {
  for (Parameter* p : params) p->zero_grad();
  loss_fn(true);
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) {
    analytic.push_back(p->grad);
    p->zero_grad();
  }

  double max_err = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter* p = params[pi];
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double orig = p->value.data[i];
      p->value.data[i] = orig + h;
      const double fp = loss_fn(false);
      p->value.data[i] = orig - h;
      const double fm = loss_fn(false);
      p->value.data[i] = orig;
      const double fd = (fp - fm) / (2.0 * h);
      const double a = analytic[pi].data[i];
      const double denom = std::max({std::abs(a), std::abs(fd), 1e-5});
      max_err = std::max(max_err, std::abs(a - fd) / denom);
    }
  }
  return max_err;
}

}  // namespace mgccf::testing
