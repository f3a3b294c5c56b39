#include "mgccf/tape.hpp"

#include <cmath>
#include <utility>

#include "mgccf/errors.hpp"

namespace mgccf {

namespace {

void add_into(Matrix& dst, const Matrix& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += src.data[i];
}

}  // namespace

ValueId Tape::push(Matrix value, std::function<void(Tape&)> back) {
  nodes_.push_back(Node{std::move(value), Matrix(), std::move(back)});
  return static_cast<ValueId>(nodes_.size() - 1);
}

ValueId Tape::leaf(Matrix m) { return push(std::move(m), nullptr); }

ValueId Tape::param(Parameter& p) {
  auto it = param_ids_.find(&p);
  if (it != param_ids_.end()) return it->second;
  const ValueId id = push(p.value, nullptr);
  params_.emplace_back(id, &p);
  param_ids_.emplace(&p, id);
  return id;
}

double Tape::scalar(ValueId id) const {
  const Matrix& v = nodes_[id].value;
  if (v.rows != 1 || v.cols != 1) {
    throw DimensionError("scalar: value is " + v.shape_str() + ", expected 1x1");
  }
  return v.data[0];
}

ValueId Tape::matmul(ValueId a, ValueId b) {
  Matrix c = mgccf::matmul(value(a), value(b));
  return push(std::move(c), [a, b, out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    const Matrix& dc = t.grad_ref(out);
    add_into(t.grad_ref(a), mgccf::matmul(dc, transpose(t.value(b))));
    add_into(t.grad_ref(b), mgccf::matmul(transpose(t.value(a)), dc));
  });
}

ValueId Tape::concat_cols(ValueId a, ValueId b) {
  Matrix c = mgccf::concat_cols(value(a), value(b));
  return push(std::move(c), [a, b, out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    const Matrix& dc = t.grad_ref(out);
    const int ca = t.value(a).cols;
    add_into(t.grad_ref(a), mgccf::slice_cols(dc, 0, ca));
    add_into(t.grad_ref(b), mgccf::slice_cols(dc, ca, dc.cols));
  });
}

ValueId Tape::add(ValueId a, ValueId b) {
  Matrix c = mgccf::add(value(a), value(b));
  return push(std::move(c), [a, b, out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    add_into(t.grad_ref(a), t.grad_ref(out));
    add_into(t.grad_ref(b), t.grad_ref(out));
  });
}

ValueId Tape::sub(ValueId a, ValueId b) {
  Matrix c = mgccf::sub(value(a), value(b));
  return push(std::move(c), [a, b, out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    const Matrix& dc = t.grad_ref(out);
    add_into(t.grad_ref(a), dc);
    Matrix& db = t.grad_ref(b);
    for (std::size_t i = 0; i < db.size(); ++i) db.data[i] -= dc.data[i];
  });
}

ValueId Tape::scale(ValueId a, double c) {
  Matrix out = mgccf::scale(value(a), c);
  return push(std::move(out), [a, c, out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    add_into(t.grad_ref(a), mgccf::scale(t.grad_ref(out), c));
  });
}

ValueId Tape::mul_elem(ValueId a, ValueId b) {
  Matrix c = mgccf::mul_elem(value(a), value(b));
  return push(std::move(c), [a, b, out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    const Matrix& dc = t.grad_ref(out);
    add_into(t.grad_ref(a), mgccf::mul_elem(dc, t.value(b)));
    add_into(t.grad_ref(b), mgccf::mul_elem(dc, t.value(a)));
  });
}

ValueId Tape::tanh(ValueId a) {
  Matrix c = tanh_mat(value(a));
  return push(std::move(c), [a, out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    const Matrix& y = t.value(out);
    const Matrix& dc = t.grad_ref(out);
    Matrix& da = t.grad_ref(a);
    for (std::size_t i = 0; i < da.size(); ++i) {
      da.data[i] += dc.data[i] * (1.0 - y.data[i] * y.data[i]);
    }
  });
}

ValueId Tape::sigmoid(ValueId a) {
  Matrix c = sigmoid_mat(value(a));
  return push(std::move(c), [a, out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    const Matrix& y = t.value(out);
    const Matrix& dc = t.grad_ref(out);
    Matrix& da = t.grad_ref(a);
    for (std::size_t i = 0; i < da.size(); ++i) {
      da.data[i] += dc.data[i] * y.data[i] * (1.0 - y.data[i]);
    }
  });
}

ValueId Tape::softplus(ValueId a) {
  Matrix c = softplus_mat(value(a));
  return push(std::move(c), [a, out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    const Matrix s = sigmoid_mat(t.value(a));
    const Matrix& dc = t.grad_ref(out);
    Matrix& da = t.grad_ref(a);
    for (std::size_t i = 0; i < da.size(); ++i) da.data[i] += dc.data[i] * s.data[i];
  });
}

ValueId Tape::softmax_rows(ValueId a) {
  Matrix c = mgccf::softmax_rows(value(a));
  return push(std::move(c), [a, out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    const Matrix& y = t.value(out);
    const Matrix& dc = t.grad_ref(out);
    Matrix& da = t.grad_ref(a);
    for (int i = 0; i < y.rows; ++i) {
      const double* yrow = y.row(i);
      const double* dcrow = dc.row(i);
      double dot = 0.0;
      for (int j = 0; j < y.cols; ++j) dot += dcrow[j] * yrow[j];
      double* darow = da.row(i);
      for (int j = 0; j < y.cols; ++j) darow[j] += yrow[j] * (dcrow[j] - dot);
    }
  });
}

ValueId Tape::row_mean(ValueId a) {
  Matrix c = mgccf::row_mean(value(a));
  return push(std::move(c), [a, out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    const Matrix& dc = t.grad_ref(out);
    Matrix& da = t.grad_ref(a);
    const double inv = da.rows > 0 ? 1.0 / da.rows : 0.0;
    for (int i = 0; i < da.rows; ++i) {
      double* darow = da.row(i);
      for (int j = 0; j < da.cols; ++j) darow[j] += dc.data[j] * inv;
    }
  });
}

ValueId Tape::row_sum(ValueId a) {
  Matrix c = mgccf::row_sum(value(a));
  return push(std::move(c), [a, out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    const Matrix& dc = t.grad_ref(out);
    Matrix& da = t.grad_ref(a);
    for (int i = 0; i < da.rows; ++i) {
      double* darow = da.row(i);
      for (int j = 0; j < da.cols; ++j) darow[j] += dc.data[j];
    }
  });
}

ValueId Tape::gather_rows(ValueId a, std::vector<int> idx) {
  Matrix c = mgccf::gather_rows(value(a), idx);
  return push(std::move(c),
              [a, idx = std::move(idx), out = static_cast<ValueId>(nodes_.size())](Tape& t) {
                const Matrix& dc = t.grad_ref(out);
                Matrix& da = t.grad_ref(a);
                for (std::size_t i = 0; i < idx.size(); ++i) {
                  const double* src = dc.row(static_cast<int>(i));
                  double* dst = da.row(idx[i]);
                  for (int j = 0; j < da.cols; ++j) dst[j] += src[j];
                }
              });
}

ValueId Tape::segment_sum(ValueId a, std::vector<int> offsets) {
  Matrix c = mgccf::segment_sum(value(a), offsets);
  return push(std::move(c),
              [a, offs = std::move(offsets), out = static_cast<ValueId>(nodes_.size())](Tape& t) {
                const Matrix& dc = t.grad_ref(out);
                Matrix& da = t.grad_ref(a);
                for (int s = 0; s + 1 < static_cast<int>(offs.size()); ++s) {
                  const double* src = dc.row(s);
                  for (int r = offs[s]; r < offs[s + 1]; ++r) {
                    double* dst = da.row(r);
                    for (int j = 0; j < da.cols; ++j) dst[j] += src[j];
                  }
                }
              });
}

ValueId Tape::segment_mean(ValueId a, std::vector<int> offsets) {
  Matrix c = mgccf::segment_mean(value(a), offsets);
  return push(std::move(c),
              [a, offs = std::move(offsets), out = static_cast<ValueId>(nodes_.size())](Tape& t) {
                const Matrix& dc = t.grad_ref(out);
                Matrix& da = t.grad_ref(a);
                for (int s = 0; s + 1 < static_cast<int>(offs.size()); ++s) {
                  const int len = offs[s + 1] - offs[s];
                  if (len == 0) continue;
                  const double inv = 1.0 / len;
                  const double* src = dc.row(s);
                  for (int r = offs[s]; r < offs[s + 1]; ++r) {
                    double* dst = da.row(r);
                    for (int j = 0; j < da.cols; ++j) dst[j] += src[j] * inv;
                  }
                }
              });
}

ValueId Tape::rows_dot(ValueId a, ValueId b) {
  Matrix c = mgccf::rows_dot(value(a), value(b));
  return push(std::move(c), [a, b, out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    const Matrix& dc = t.grad_ref(out);
    const Matrix& va = t.value(a);
    const Matrix& vb = t.value(b);
    Matrix& da = t.grad_ref(a);
    Matrix& db = t.grad_ref(b);
    for (int i = 0; i < va.rows; ++i) {
      const double g = dc.data[i];
      const double* arow = va.row(i);
      const double* brow = vb.row(i);
      double* darow = da.row(i);
      double* dbrow = db.row(i);
      for (int j = 0; j < va.cols; ++j) {
        darow[j] += g * brow[j];
        dbrow[j] += g * arow[j];
      }
    }
  });
}

ValueId Tape::rowwise_scale(ValueId a, ValueId w) {
  Matrix c = mgccf::rowwise_scale(value(a), value(w));
  return push(std::move(c), [a, w, out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    const Matrix& dc = t.grad_ref(out);
    const Matrix& va = t.value(a);
    const Matrix& vw = t.value(w);
    Matrix& da = t.grad_ref(a);
    Matrix& dw = t.grad_ref(w);
    for (int i = 0; i < va.rows; ++i) {
      const double wi = vw.data[i];
      const double* dcrow = dc.row(i);
      const double* arow = va.row(i);
      double* darow = da.row(i);
      double acc = 0.0;
      for (int j = 0; j < va.cols; ++j) {
        darow[j] += dcrow[j] * wi;
        acc += dcrow[j] * arow[j];
      }
      dw.data[i] += acc;
    }
  });
}

ValueId Tape::slice_cols(ValueId a, int begin, int end) {
  Matrix c = mgccf::slice_cols(value(a), begin, end);
  return push(std::move(c), [a, begin, end, out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    const Matrix& dc = t.grad_ref(out);
    Matrix& da = t.grad_ref(a);
    for (int i = 0; i < da.rows; ++i) {
      const double* src = dc.row(i);
      double* dst = da.row(i);
      for (int j = begin; j < end; ++j) dst[j] += src[j - begin];
    }
  });
}

ValueId Tape::sum_all(ValueId a) {
  Matrix c(1, 1);
  c.data[0] = mgccf::sum_all(value(a));
  return push(std::move(c), [a, out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    const double g = t.grad_ref(out).data[0];
    Matrix& da = t.grad_ref(a);
    for (double& v : da.data) v += g;
  });
}

ValueId Tape::sum_sq(ValueId a) {
  Matrix c(1, 1);
  c.data[0] = mgccf::sum_sq(value(a));
  return push(std::move(c), [a, out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    const double g = t.grad_ref(out).data[0];
    const Matrix& va = t.value(a);
    Matrix& da = t.grad_ref(a);
    for (std::size_t i = 0; i < da.size(); ++i) da.data[i] += 2.0 * g * va.data[i];
  });
}

ValueId Tape::dropout(ValueId a, double rate, Rng& rng, bool training) {
  Matrix mask;
  Matrix c = mgccf::dropout(value(a), rate, rng, training, &mask);
  const bool identity = mask.size() == 0;
  return push(std::move(c), [a, identity, mask = std::move(mask),
                             out = static_cast<ValueId>(nodes_.size())](Tape& t) {
    const Matrix& dc = t.grad_ref(out);
    Matrix& da = t.grad_ref(a);
    if (identity) {
      add_into(da, dc);
      return;
    }
    for (std::size_t i = 0; i < da.size(); ++i) da.data[i] += dc.data[i] * mask.data[i];
  });
}

void Tape::backward(ValueId loss) {
  const Matrix& lv = nodes_[loss].value;
  if (lv.rows != 1 || lv.cols != 1) {
    throw DimensionError("backward: loss must be 1x1, got " + lv.shape_str());
  }
  for (Node& n : nodes_) n.grad = Matrix(n.value.rows, n.value.cols);
  nodes_[loss].grad.data[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->back) it->back(*this);
  }
  for (auto& [id, p] : params_) add_into(p->grad, nodes_[id].grad);
}

}  // namespace mgccf
