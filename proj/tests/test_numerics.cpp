#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "mgccf/errors.hpp"
#include "mgccf/matrix.hpp"
#include "mgccf/optim.hpp"
#include "mgccf/tape.hpp"
#include "oracles.hpp"

using namespace mgccf;
using mgccf::testing::max_rel_grad_error;

namespace {

Matrix random_matrix(int r, int c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

TEST_CASE("elementwise forward values") {
  Matrix z(1, 3);
  CHECK(tanh_mat(z).data == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(sigmoid_mat(z).data[0] == doctest::Approx(0.5));
  const Matrix sm = softmax_rows(z);
  for (double v : sm.data) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("tanh derivative at zero is one") {
  Tape tape;
  Parameter x("x", Matrix(1, 1));
  const ValueId y = tape.sum_all(tape.tanh(tape.param(x)));
  tape.backward(y);
  CHECK(x.grad.data[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("softmax rows sum to one within 1e-12") {
  const Matrix a = random_matrix(40, 7, 99);
  const Matrix s = softmax_rows(a);
  for (int i = 0; i < s.rows; ++i) {
    double acc = 0.0;
    for (int j = 0; j < s.cols; ++j) acc += s.at(i, j);
    CHECK(std::abs(acc - 1.0) < 1e-12);
  }
}

TEST_CASE("shape mismatch names both shapes") {
  const Matrix a(2, 3), b(4, 5);
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("2x3"), DimensionError);
  CHECK_THROWS_WITH_AS(add(a, b), doctest::Contains("4x5"), DimensionError);
}

TEST_CASE("matmul serial and openmp kernels agree bitwise") {
  for (auto [r, k, c] : {std::tuple{5, 4, 3}, std::tuple{64, 128, 32}, std::tuple{257, 65, 129}}) {
    const Matrix a = random_matrix(r, k, 7 * r + c);
    const Matrix b = random_matrix(k, c, 13 * r + k);
    CHECK(matmul_serial(a, b).data == matmul(a, b).data);
  }
}

TEST_CASE("matmul gradient vs central finite differences (rel < 1e-6)") {
  Parameter a("a", random_matrix(5, 4, 1));
  Parameter b("b", random_matrix(4, 3, 2));
  const auto loss_fn = [&](bool grads) {
    Tape tape;
    const ValueId loss = tape.sum_sq(tape.matmul(tape.param(a), tape.param(b)));
    if (grads) tape.backward(loss);
    return tape.scalar(loss);
  };
  CHECK(max_rel_grad_error({&a, &b}, loss_fn) < 1e-6);
}

TEST_CASE("gradients of every tape op vs finite differences") {
  Parameter a("a", random_matrix(6, 4, 3));
  Parameter b("b", random_matrix(6, 4, 4));
  Parameter w("w", random_matrix(6, 1, 5));

  SUBCASE("add/sub/scale/mul_elem/sigmoid/softplus") {
    const auto fn = [&](bool grads) {
      Tape t;
      const ValueId x =
          t.mul_elem(t.sub(t.add(t.param(a), t.param(b)), t.scale(t.param(a), 0.3)), t.param(b));
      const ValueId loss = t.sum_all(t.softplus(t.sigmoid(x)));
      if (grads) t.backward(loss);
      return t.scalar(loss);
    };
    CHECK(max_rel_grad_error({&a, &b}, fn) < 1e-6);
  }
  SUBCASE("concat/slice/rowwise_scale/rows_dot") {
    const auto fn = [&](bool grads) {
      Tape t;
      const ValueId cat = t.concat_cols(t.param(a), t.param(b));
      const ValueId sl = t.slice_cols(cat, 2, 6);
      const ValueId scaled = t.rowwise_scale(sl, t.param(w));
      const ValueId loss = t.sum_all(t.rows_dot(scaled, t.param(a)));
      if (grads) t.backward(loss);
      return t.scalar(loss);
    };
    CHECK(max_rel_grad_error({&a, &b, &w}, fn) < 1e-6);
  }
  SUBCASE("row_mean/row_sum/softmax/tanh") {
    const auto fn = [&](bool grads) {
      Tape t;
      const ValueId sm = t.softmax_rows(t.tanh(t.param(a)));
      const ValueId loss =
          t.sum_all(t.mul_elem(t.row_mean(sm), t.row_sum(t.param(b))));
      if (grads) t.backward(loss);
      return t.scalar(loss);
    };
    CHECK(max_rel_grad_error({&a, &b}, fn) < 1e-6);
  }
  SUBCASE("gather/segment_mean/segment_sum with an empty segment") {
    const std::vector<int> idx{5, 0, 0, 3, 2, 2, 1};
    const std::vector<int> offsets{0, 3, 3, 5, 7};
    const auto fn = [&](bool grads) {
      Tape t;
      const ValueId g = t.gather_rows(t.param(a), idx);
      const ValueId sm = t.segment_mean(g, offsets);
      const ValueId ss = t.segment_sum(g, offsets);
      const ValueId loss = t.add(t.sum_sq(sm), t.sum_all(t.tanh(ss)));
      if (grads) t.backward(loss);
      return t.scalar(loss);
    };
    CHECK(max_rel_grad_error({&a}, fn) < 1e-6);
  }
  SUBCASE("dropout with a fixed mask") {
    const auto fn = [&](bool grads) {
      Tape t;
      Rng rng(12345);
      const ValueId d = t.dropout(t.param(a), 0.3, rng, true);
      const ValueId loss = t.sum_sq(d);
      if (grads) t.backward(loss);
      return t.scalar(loss);
    };
    CHECK(max_rel_grad_error({&a}, fn) < 1e-6);
  }
}

TEST_CASE("unused tape outputs contribute zero adjoint") {
  Parameter a("a", random_matrix(3, 3, 11));
  Tape t;
  const ValueId x = t.param(a);
  const ValueId loss = t.sum_sq(t.tanh(x));
  (void)t.softmax_rows(t.matmul(x, x));  // never feeds the loss
  t.backward(loss);
  const Matrix with_extra = a.grad;

  Parameter b("b", a.value);
  Tape t2;
  const ValueId loss2 = t2.sum_sq(t2.tanh(t2.param(b)));
  t2.backward(loss2);
  CHECK(with_extra.data == b.grad.data);
}

TEST_CASE("xavier bound for square 3x3 is 1.0") {
  Rng rng(5);
  const Matrix m = xavier_init(3, 3, rng);
  for (double v : m.data) CHECK(std::abs(v) <= 1.0);
}

TEST_CASE("xavier sample moments (64x64, 1e5 entries)") {
  Rng rng(6);
  // ~1.05e5 entries across 26 draws of 64x64
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  for (int rep = 0; rep < 26; ++rep) {
    const Matrix m = xavier_init(64, 64, rng);
    for (double v : m.data) {
      sum += v;
      sum_sq += v * v;
      ++n;
    }
  }
  const double bound = std::sqrt(6.0 / 128.0);
  const double var_expected = bound * bound / 3.0;
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  const double mean_sigma = std::sqrt(var_expected / static_cast<double>(n));
  CHECK(std::abs(mean) < 3.0 * mean_sigma);
  CHECK(std::abs(var - var_expected) < 0.05 * var_expected);
}

TEST_CASE("xavier is deterministic under a fixed seed") {
  Rng r1(77), r2(77);
  CHECK(xavier_init(8, 9, r1).data == xavier_init(8, 9, r2).data);
}

TEST_CASE("adam first step has magnitude ~lr") {
  Parameter p("p", Matrix(1, 1));
  p.value.data[0] = 0.7;
  p.grad.data[0] = 3.21;
  adam_step(p, AdamConfig{0.01});
  CHECK(p.value.data[0] == doctest::Approx(0.7 - 0.01).epsilon(1e-6));
  CHECK(p.step_count == 1);
  CHECK(p.grad.data[0] == 0.0);
}

TEST_CASE("adam with zero gradients leaves values unchanged") {
  Parameter p("p", random_matrix(3, 2, 8));
  const Matrix before = p.value;
  for (int s = 0; s < 10; ++s) adam_step(p, AdamConfig{});
  CHECK(p.value.data == before.data);
}

TEST_CASE("adam matches an independent scalar reference on (x-3)^2") {
  Parameter p("x", Matrix(1, 1));
  mgccf::testing::ScalarAdam ref;
  double x_ref = 0.0;
  for (int s = 0; s < 100; ++s) {
    p.grad.data[0] = 2.0 * (p.value.data[0] - 3.0);
    adam_step(p, AdamConfig{0.1});
    x_ref = ref.step(x_ref, 2.0 * (x_ref - 3.0), 0.1);
    CHECK(p.value.data[0] == doctest::Approx(x_ref).epsilon(1e-12));
  }
  CHECK(std::abs(p.value.data[0] - 3.0) < 0.1);
}

TEST_CASE("adam rejects non-finite gradients naming the parameter") {
  Parameter p("W_u1", Matrix(1, 1));
  p.grad.data[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(adam_step(p, AdamConfig{}), doctest::Contains("W_u1"), NumericsError);
}

TEST_CASE("frozen parameters are skipped by the optimizer") {
  Parameter p("p", random_matrix(2, 2, 9));
  p.frozen = true;
  const Matrix before = p.value;
  p.grad = random_matrix(2, 2, 10);
  adam_step(p, AdamConfig{0.1});
  CHECK(p.value.data == before.data);
  CHECK(p.step_count == 0);
  for (double g : p.grad.data) CHECK(g == 0.0);
}

TEST_CASE("dropout rate 0 and inference mode are identity") {
  const Matrix a = random_matrix(10, 10, 20);
  Rng rng(1);
  CHECK(dropout(a, 0.0, rng, true).data == a.data);
  CHECK(dropout(a, 0.7, rng, false).data == a.data);
}

TEST_CASE("dropout zero fraction and mean preservation at rate 0.2") {
  Matrix ones(1000, 1000);
  for (double& v : ones.data) v = 1.0;
  Rng rng(33);
  const Matrix d = dropout(ones, 0.2, rng, true);
  std::size_t zeros = 0;
  double sum = 0.0;
  for (double v : d.data) {
    if (v == 0.0) ++zeros;
    sum += v;
  }
  const double zero_frac = static_cast<double>(zeros) / d.size();
  CHECK(zero_frac > 0.195);
  CHECK(zero_frac < 0.205);
  CHECK(std::abs(sum / d.size() - 1.0) < 0.01);
}

TEST_CASE("matrix round trips through gather and segments") {
  // segment_mean over single-element segments is the identity
  const Matrix a = random_matrix(5, 3, 41);
  std::vector<int> idx{0, 1, 2, 3, 4};
  std::vector<int> offs{0, 1, 2, 3, 4, 5};
  CHECK(segment_mean(gather_rows(a, idx), offs).data == a.data);
}
