#include <gtest/gtest.h>

#include <cmath>

#include "disco/random.hpp"
#include "disco/tensor.hpp"

namespace disco::ad {
namespace {

Tensor random_param(Shape shape, Rng& rng) {
  std::vector<double> v(numel(shape));
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor::from(std::move(shape), std::move(v), true);
}

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

TEST(Tensor, ShapeChecks) {
  EXPECT_THROW(Tensor::from({2, 2}, {1, 2, 3}), DimensionError);
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({4});
  try {
    matmul(a, b);
    FAIL();
  } catch (const DimensionError& e) {
    std::string what = e.what();
    EXPECT_NE(what.find("[2,3]"), std::string::npos);
    EXPECT_NE(what.find("[4]"), std::string::npos);
  }
  EXPECT_THROW(add(a, Tensor::zeros({3, 2})), DimensionError);
  EXPECT_THROW(add_broadcast(a, Tensor::zeros({2})), DimensionError);
  EXPECT_NO_THROW(add_broadcast(a, Tensor::zeros({3})));
  EXPECT_NO_THROW(add_broadcast(a, Tensor::zeros({1})));
}

TEST(Tensor, SoftmaxOfUniformScores) {
  Tensor p = softmax(Tensor::vector({0, 0, 0}));
  for (double x : p.data()) EXPECT_DOUBLE_EQ(x, 1.0 / 3.0);
}

TEST(Tensor, SoftmaxIsADistribution) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + rng.index(30));
    for (double& x : v) x = rng.uniform(-50, 50);
    Tensor p = softmax(Tensor::vector(v));
    double total = 0.0;
    for (double x : p.data()) {
      EXPECT_GE(x, 0.0);
      total += x;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    Tensor lp = log_softmax(Tensor::vector(v));
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(std::exp(lp[i]), p[i], 1e-12);
  }
}

TEST(Tensor, MatmulWithIdentity) {
  Tensor eye = Tensor::from({2, 2}, {1, 0, 0, 1});
  Tensor x = Tensor::vector({3.5, -2});
  EXPECT_EQ(values(matmul(eye, x)), values(x));
  Tensor m = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(values(matmul(eye, m)), values(m));
  EXPECT_EQ(matmul(x, eye).shape(), Shape{2});
  EXPECT_EQ(values(matmul(x, x)), std::vector<double>{3.5 * 3.5 + 4});
}

TEST(Tensor, LstmCellWithZeroWeights) {
  LstmWeights w{Tensor::zeros({8, 5}), Tensor::zeros({8})};
  LstmState s = lstm_cell(Tensor::zeros({3}), {Tensor::zeros({2}), Tensor::zeros({2})}, w);
  EXPECT_EQ(values(s.h), (std::vector<double>{0, 0}));
  EXPECT_EQ(values(s.c), (std::vector<double>{0, 0}));
}

TEST(Tensor, LstmCellMatchesGateEquations) {
  // Scalar cell, hand-evaluated gates.
  Tensor w = Tensor::from({4, 2}, {0.5, -0.25, 1.0, 0.5, -1.0, 2.0, 0.25, 0.75});
  Tensor b = Tensor::vector({0.1, -0.2, 0.3, 0.0});
  LstmState s = lstm_cell(Tensor::vector({0.8}), {Tensor::vector({-0.4}), Tensor::vector({0.6})}, {w, b});
  auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  const double x = 0.8, h = -0.4, c = 0.6;
  const double i = sig(0.5 * x - 0.25 * h + 0.1), f = sig(1.0 * x + 0.5 * h - 0.2);
  const double g = std::tanh(-1.0 * x + 2.0 * h + 0.3), o = sig(0.25 * x + 0.75 * h);
  const double c2 = f * c + i * g;
  EXPECT_NEAR(s.c[0], c2, 1e-15);
  EXPECT_NEAR(s.h[0], o * std::tanh(c2), 1e-15);
}

TEST(Backward, SumAndSquare) {
  Tensor x = Tensor::from({3}, {1, 2, 3}, true);
  sum(x).backward();
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()), (std::vector<double>{1, 1, 1}));

  Tensor y = Tensor::from({2}, {1, 2}, true);
  sum(mul(y, y)).backward();
  EXPECT_EQ(std::vector<double>(y.grad().begin(), y.grad().end()), (std::vector<double>{2, 4}));
}

TEST(Backward, NonScalarLossIsRejected) {
  Tensor x = Tensor::from({2}, {1, 2}, true);
  EXPECT_THROW(mul(x, x).backward(), UsageError);
}

TEST(Backward, SharedParametersAccumulate) {
  Tensor x = Tensor::from({2}, {1, -3}, true);
  // Diamond: y feeds both operands; y's closure must run once.
  Tensor y = scale(x, 2.0);
  add(sum(y), sum(y)).backward();
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()), (std::vector<double>{4, 4}));
  // Second call accumulates into the leaf.
  sum(x).backward();
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()), (std::vector<double>{5, 5}));
  x.zero_grad();
  EXPECT_EQ(x.grad()[0], 0.0);
}

TEST(Backward, NoGradGuardRecordsNothing) {
  Tensor x = Tensor::from({2}, {1, 2}, true);
  NoGradGuard guard;
  Tensor y = sum(mul(x, x));
  EXPECT_FALSE(y.requires_grad());
}

TEST(Dropout, InvertedScalingAndDeterminism) {
  Tensor x = Tensor::vector(std::vector<double>(1000, 1.0));
  Rng off(1);
  EXPECT_EQ(values(dropout(x, 0.33, false, off)), values(x));
  Rng a(5), b(5);
  Tensor da = dropout(x, 0.25, true, a);
  Tensor db = dropout(x, 0.25, true, b);
  EXPECT_EQ(values(da), values(db));
  std::size_t kept = 0;
  for (double v : da.data()) {
    EXPECT_TRUE(v == 0.0 || std::abs(v - 1.0 / 0.75) < 1e-15);
    kept += v != 0.0;
  }
  EXPECT_NEAR(static_cast<double>(kept) / 1000.0, 0.75, 0.05);
  EXPECT_THROW(dropout(x, 1.0, true, a), UsageError);
}

TEST(Conv, MaxOverWindows) {
  // Three 1-d "characters", window 2, two filters.
  Tensor chars = Tensor::from({3, 1}, {1, -2, 3});
  Tensor filters = Tensor::from({2, 2}, {1, 1, -1, 0});
  Tensor out = conv1d_maxpool(chars, filters, 2);
  // windows: (1,-2), (-2,3). f0: -1, 1 -> 1. f1: -1, 2 -> 2.
  EXPECT_EQ(values(out), (std::vector<double>{1, 2}));
  EXPECT_THROW(conv1d_maxpool(Tensor::zeros({1, 1}), filters, 2), DimensionError);
  EXPECT_THROW(conv1d_maxpool(chars, Tensor::zeros({2, 3}), 2), DimensionError);
}

TEST(GradCheck, LinearFunctionIsExact) {
  Rng rng(2);
  Tensor w = random_param({3, 4}, rng);
  Tensor x = random_param({4}, rng);
  Tensor c = Tensor::vector({0.5, -1.0, 2.0});
  auto f = [&] { return sum(mul(matmul(w, x.detach()), c)); };
  EXPECT_LT(grad_check(f, {w}), 1e-9);
}

// Every differentiable op against central differences.
TEST(GradCheck, EveryOperation) {
  Rng rng(7);
  Tensor m = random_param({3, 4}, rng);
  Tensor v = random_param({4}, rng);
  Tensor u = random_param({4}, rng);
  Tensor r = random_param({3}, rng);
  Tensor s = random_param({1}, rng);
  Tensor chars = random_param({5, 2}, rng);
  Tensor filters = random_param({3, 6}, rng);
  Tensor lw = random_param({8, 6}, rng);
  Tensor lb = random_param({8}, rng);
  Tensor h0 = random_param({2}, rng);
  Tensor c0 = random_param({2}, rng);
  Tensor weights = Tensor::vector({0.3, -1.2, 0.7, 2.0, -0.4, 0.9, 1.1, -0.8, 0.2, 0.6, -1.5, 0.05});

  auto loss = [&] {
    std::vector<Tensor> terms;
    Tensor mv = matmul(m, v);                                        // [3]
    terms.push_back(sum(mul(tanh(mv), r)));
    terms.push_back(sum(mul(sigmoid(sub(v, u)), elu(add(v, u)))));
    terms.push_back(sum(matmul(r, m)));                              // [4]
    Tensor rows = add_broadcast(m, v);                               // [3,4]
    terms.push_back(sum(mul(elu(rows), stack({u, v, u}))));
    terms.push_back(sum(add_broadcast(r, s)));
    terms.push_back(pick(log_softmax(mv), 1));
    terms.push_back(sum(mul(softmax(concat({r, s})), Tensor::vector({1, -2, 3, 0.5}))));
    terms.push_back(sum(mul(row(m, 2), slice(concat({v, u}), 2, 4))));
    terms.push_back(sum(mul(reshape(m, {4, 3}), reshape(stack({r, r, r, r}), {4, 3}))));
    terms.push_back(sum(mul(conv1d_maxpool(chars, filters, 3), r)));
    LstmState st = lstm_cell(slice(v, 0, 4), {h0, c0}, {lw, lb});
    terms.push_back(sum(mul(concat({st.h, st.c}), slice(weights, 0, 4))));
    terms.push_back(scale(add_n({pick(v, 0), pick(u, 3), pick(s, 0)}), 1.5));
    return add_n(terms);
  };
  EXPECT_LT(grad_check(loss, {m, v, u, r, s, chars, filters, lw, lb, h0, c0}), 1e-7);
}

}  // namespace
}  // namespace disco::ad
