#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "mgccf/matrix.hpp"
#include "mgccf/optim.hpp"

namespace mgccf {

using ValueId = std::int32_t;

// Reverse-mode tape over Matrix values. Forward calls compute eagerly with the
// shared kernels and record one node per op; backward() replays the recorded
// ops once in reverse order, so every adjoint is propagated after all of its
// consumers. A tape belongs to a single thread.
class Tape {
 public:
  ValueId leaf(Matrix m);
  // Leaf backed by a Parameter; backward() accumulates into p.grad. Re-using
  // the same Parameter returns the already-recorded leaf.
  ValueId param(Parameter& p);

  ValueId matmul(ValueId a, ValueId b);
  ValueId concat_cols(ValueId a, ValueId b);
  ValueId add(ValueId a, ValueId b);
  ValueId sub(ValueId a, ValueId b);
  ValueId scale(ValueId a, double c);
  ValueId mul_elem(ValueId a, ValueId b);
  ValueId tanh(ValueId a);
  ValueId sigmoid(ValueId a);
  ValueId softplus(ValueId a);
  ValueId softmax_rows(ValueId a);
  ValueId row_mean(ValueId a);
  ValueId row_sum(ValueId a);
  ValueId gather_rows(ValueId a, std::vector<int> idx);
  ValueId segment_sum(ValueId a, std::vector<int> offsets);
  ValueId segment_mean(ValueId a, std::vector<int> offsets);
  ValueId rows_dot(ValueId a, ValueId b);
  ValueId rowwise_scale(ValueId a, ValueId w);
  ValueId slice_cols(ValueId a, int begin, int end);
  ValueId sum_all(ValueId a);
  ValueId sum_sq(ValueId a);
  ValueId dropout(ValueId a, double rate, Rng& rng, bool training);

  const Matrix& value(ValueId id) const { return nodes_[id].value; }
  const Matrix& grad(ValueId id) const { return nodes_[id].grad; }
  double scalar(ValueId id) const;

  // Seeds d(loss)/d(loss) = 1 (loss must be 1x1), propagates all adjoints, and
  // accumulates into the grad buffer of every Parameter seen by param().
  void backward(ValueId loss);

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void(Tape&)> back;  // null for leaves
  };

  ValueId push(Matrix value, std::function<void(Tape&)> back);
  Matrix& grad_ref(ValueId id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
  std::vector<std::pair<ValueId, Parameter*>> params_;
  std::unordered_map<const Parameter*, ValueId> param_ids_;
};

}  // namespace mgccf
