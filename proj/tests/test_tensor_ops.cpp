#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "errnet/gradcheck.hpp"
#include "errnet/ops.hpp"
#include "errnet/tensor.hpp"

using namespace errnet;

namespace {

Tensor random_tensor(Shape s, std::uint64_t seed, Real lo = -1.0, Real hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Real> uni(lo, hi);
  std::vector<Real> v(s.numel());
  for (auto& x : v) x = uni(rng);
  return Tensor::from_data(s, std::move(v));
}

// Direct summation over output position, channel and kernel tap.
std::vector<Real> naive_conv(const Tensor& x, const Tensor& k, const Tensor& b, std::size_t stride,
                             std::size_t pad, std::size_t dil, std::size_t oh, std::size_t ow) {
  const Shape xs = x.shape(), ks = k.shape();
  std::vector<Real> out(xs.n * ks.n * oh * ow);
  for (std::size_t n = 0; n < xs.n; ++n)
    for (std::size_t o = 0; o < ks.n; ++o)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t xo = 0; xo < ow; ++xo) {
          Real acc = b.at(0, o, 0, 0);
          for (std::size_t c = 0; c < xs.c; ++c)
            for (std::size_t i = 0; i < ks.h; ++i)
              for (std::size_t j = 0; j < ks.w; ++j) {
                const long iy = static_cast<long>(y * stride + i * dil) - static_cast<long>(pad);
                const long ix = static_cast<long>(xo * stride + j * dil) - static_cast<long>(pad);
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(xs.h) || ix >= static_cast<long>(xs.w)) continue;
                acc += x.at(n, c, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix)) * k.at(o, c, i, j);
              }
          out[((n * ks.n + o) * oh + y) * ow + xo] = acc;
        }
  return out;
}

// Half-pixel source coordinate, clamped, then linear blend per axis.
Real resize_oracle(const Tensor& in, std::size_t oh, std::size_t ow, std::size_t y, std::size_t x) {
  const Shape s = in.shape();
  auto source = [](std::size_t o, std::size_t in_size, std::size_t out_size) {
    Real v = (static_cast<Real>(o) + 0.5) * static_cast<Real>(in_size) / static_cast<Real>(out_size) - 0.5;
    return v < 0 ? 0.0 : v;
  };
  const Real sy = source(y, s.h, oh), sx = source(x, s.w, ow);
  const auto y0 = static_cast<std::size_t>(sy), x0 = static_cast<std::size_t>(sx);
  const std::size_t y1 = std::min(y0 + 1, s.h - 1), x1 = std::min(x0 + 1, s.w - 1);
  const Real fy = sy - static_cast<Real>(y0), fx = sx - static_cast<Real>(x0);
  return (1 - fy) * ((1 - fx) * in.at(0, 0, y0, x0) + fx * in.at(0, 0, y0, x1)) +
         fy * ((1 - fx) * in.at(0, 0, y1, x0) + fx * in.at(0, 0, y1, x1));
}

}  // namespace

TEST(Tensor, ShapeAndDataContracts) {
  Tensor t = Tensor::zeros({2, 3, 4, 5});
  EXPECT_EQ(t.data().size(), 120u);
  EXPECT_THROW(Tensor::from_data({1, 1, 2, 2}, {1, 2, 3}), std::invalid_argument);
  EXPECT_THROW(t.item(), std::invalid_argument);
  EXPECT_FALSE(t.has_grad());
}

TEST(Tensor, SumGradientIsOnes) {
  Tensor x = random_tensor({1, 2, 3, 3}, 1).detach(true);
  backward(sum(x));
  for (Real g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Tensor, QuadraticGradientIsInput) {
  Tensor x = random_tensor({1, 2, 3, 3}, 2).detach(true);
  backward(scale(sum(mul(x, x)), 0.5));
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_DOUBLE_EQ(x.grad()[i], x.data()[i]);
}

TEST(Tensor, SharedSubgraphVisitedOnce) {
  Tensor x = random_tensor({1, 1, 2, 2}, 3).detach(true);
  Tensor y = sigmoid(x);
  backward(sum(add(y, y)));
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const Real s = stable_sigmoid(x.data()[i]);
    EXPECT_NEAR(x.grad()[i], 2 * s * (1 - s), 1e-15);
  }
}

TEST(Tensor, NoGradGuardSkipsGraph) {
  Tensor x = Tensor::full({1, 1, 1, 1}, 2.0, true);
  {
    NoGradGuard guard;
    EXPECT_FALSE(relu(x).requires_grad());
  }
  EXPECT_TRUE(relu(x).requires_grad());
}

TEST(Tensor, BackwardRequiresScalar) {
  Tensor x = Tensor::zeros({1, 1, 2, 2}, true);
  EXPECT_THROW(backward(relu(x)), std::invalid_argument);
}

TEST(Conv2d, UnitKernelScales) {
  const Tensor y = conv2d(Tensor::full({1, 1, 3, 3}, 1.0),
                          {Tensor::full({1, 1, 1, 1}, 2.0), Tensor::zeros({1, 1, 1, 1})});
  EXPECT_EQ(y.shape(), (Shape{1, 1, 3, 3}));
  for (Real v : y.data()) EXPECT_EQ(v, 2.0);
}

TEST(Conv2d, DilatedShape) {
  const Tensor y = conv2d(Tensor::zeros({1, 1, 5, 5}),
                          {Tensor::zeros({1, 1, 3, 3}), Tensor::zeros({1, 1, 1, 1}), 1, 2, 2});
  EXPECT_EQ(y.shape(), (Shape{1, 1, 5, 5}));
}

TEST(Conv2d, MatchesDirectSummation) {
  const Tensor x = random_tensor({2, 2, 6, 6}, 4);
  const Tensor k = random_tensor({3, 2, 3, 3}, 5);
  const Tensor b = random_tensor({1, 3, 1, 1}, 6);
  struct Case {
    std::size_t stride, pad, dil;
  };
  for (const Case c : {Case{1, 0, 2}, Case{1, 2, 2}, Case{2, 1, 1}, Case{3, 0, 1}}) {
    const Tensor y = conv2d(x, {k, b, c.stride, c.pad, c.dil});
    const auto expected = naive_conv(x, k, b, c.stride, c.pad, c.dil, y.shape().h, y.shape().w);
    ASSERT_EQ(y.numel(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(y.data()[i], expected[i], 1e-9);
  }
}

TEST(Conv2d, ErrorsNameTheDimension) {
  try {
    conv2d(Tensor::zeros({1, 2, 4, 4}), {Tensor::zeros({1, 3, 3, 3}), Tensor::zeros({1, 1, 1, 1})});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("channel"), std::string::npos) << e.what();
  }
  EXPECT_THROW(conv2d(Tensor::zeros({1, 1, 2, 2}), {Tensor::zeros({1, 1, 3, 3}), Tensor::zeros({1, 1, 1, 1})}),
               std::invalid_argument);
}

TEST(Conv2d, KernelGradientMatchesFiniteDifferences) {
  const Tensor x = random_tensor({1, 2, 5, 5}, 7);
  const Tensor b = random_tensor({1, 2, 1, 1}, 8);
  const Tensor r = random_tensor({1, 2, 5, 5}, 9);
  const auto f = [&](const Tensor& k) { return sum(mul(conv2d(x, {k, b, 1, 2, 2}), r)); };
  EXPECT_LT(grad_check(f, random_tensor({2, 2, 3, 3}, 10), 1e-6), 1e-5);
}

TEST(Resize, ConstantField) {
  const Tensor y = bilinear_resize(Tensor::full({1, 1, 2, 2}, 1.0), 4, 4);
  for (Real v : y.data()) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Resize, SameSizeIsBitwiseIdentity) {
  const Tensor x = random_tensor({1, 3, 5, 7}, 11);
  const Tensor y = bilinear_resize(x, 5, 7);
  EXPECT_TRUE(std::equal(x.data().begin(), x.data().end(), y.data().begin()));
}

TEST(Resize, MatchesSourceCoordinateOracle) {
  const Tensor x = Tensor::from_data({1, 1, 2, 2}, {0, 2, 2, 4});
  const Tensor y = bilinear_resize(x, 4, 4);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(y.at(0, 0, r, c), resize_oracle(x, 4, 4, r, c), 1e-12);
  EXPECT_DOUBLE_EQ(y.at(0, 0, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(y.at(0, 0, 1, 1), 1.0);
  const Tensor z = random_tensor({1, 1, 5, 3}, 12);
  const Tensor d = bilinear_resize(z, 2, 7);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 7; ++c) EXPECT_NEAR(d.at(0, 0, r, c), resize_oracle(z, 2, 7, r, c), 1e-12);
}

TEST(Concat, ShapeAndSliceBack) {
  const Tensor a = random_tensor({1, 2, 4, 4}, 13), b = random_tensor({1, 3, 4, 4}, 14),
               c = random_tensor({1, 1, 4, 4}, 15);
  EXPECT_EQ(concat_channels({a, b}).shape(), (Shape{1, 5, 4, 4}));
  const Tensor one = concat_channels({a});
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), one.data().begin()));
  const Tensor all = concat_channels({a, b, c});
  std::size_t begin = 0;
  for (const Tensor& t : {a, b, c}) {
    const Tensor s = slice_channels(all, begin, t.shape().c);
    EXPECT_TRUE(std::equal(t.data().begin(), t.data().end(), s.data().begin()));
    begin += t.shape().c;
  }
}

TEST(Concat, RejectsSpatialMismatch) {
  EXPECT_THROW(concat_channels({Tensor::zeros({1, 1, 4, 4}), Tensor::zeros({1, 1, 4, 5})}),
               std::invalid_argument);
}

TEST(Pointwise, Definitions) {
  const Tensor half = one_minus(Tensor::full({1, 1, 2, 2}, 0.5));
  for (Real v : half.data()) EXPECT_EQ(v, 0.5);
  const Tensor x = random_tensor({1, 1, 2, 2}, 16), y = random_tensor({1, 1, 2, 2}, 17);
  const Tensor s = add(x, Tensor::zeros(x.shape()));
  EXPECT_TRUE(std::equal(x.data().begin(), x.data().end(), s.data().begin()));
  const Tensor m = mul(x, y);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(m.data()[i], x.data()[i] * y.data()[i]);
  EXPECT_THROW(add(x, Tensor::zeros({1, 1, 2, 3})), std::invalid_argument);
}

TEST(Sigmoid, ValuesAndGradient) {
  EXPECT_EQ(sigmoid(Tensor::scalar(0.0)).item(), 0.5);
  EXPECT_NEAR(sigmoid(Tensor::scalar(20.0)).item(), 1.0, 1e-8);
  EXPECT_TRUE(std::isfinite(sigmoid(Tensor::scalar(-1e4)).item()));
  const auto f = [](const Tensor& x) { return sum(sigmoid(x)); };
  Tensor x = Tensor::scalar(1.0, true);
  backward(f(x));
  const Real h = 1e-5;
  const Real numeric = (stable_sigmoid(1 + h) - stable_sigmoid(1 - h)) / (2 * h);
  EXPECT_NEAR(x.grad()[0], numeric, 1e-6);
  EXPECT_LT(grad_check(f, random_tensor({1, 1, 2, 2}, 18, -3, 3), 1e-5), 1e-6);
}

TEST(Relu, ValuesAndGradientMask) {
  const Tensor y = relu(Tensor::from_data({1, 1, 1, 3}, {-1, 0, 2}));
  EXPECT_EQ(std::vector<Real>(y.data().begin(), y.data().end()), (std::vector<Real>{0, 0, 2}));
  const Tensor pos = random_tensor({1, 1, 3, 3}, 19, 0.1, 1.0);
  const Tensor same = relu(pos);
  EXPECT_TRUE(std::equal(pos.data().begin(), pos.data().end(), same.data().begin()));
  Tensor x = random_tensor({1, 2, 3, 3}, 20).detach(true);
  backward(sum(relu(x)));
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(x.grad()[i], x.data()[i] > 0 ? 1.0 : 0.0);
}

TEST(AvgPool, InteriorConstantAndIdentity) {
  const Tensor c = avg_pool(Tensor::full({1, 1, 8, 8}, 3.0), 3, 1, 1);
  for (std::size_t y = 1; y < 7; ++y)
    for (std::size_t x = 1; x < 7; ++x) EXPECT_DOUBLE_EQ(c.at(0, 0, y, x), 3.0);
  const Tensor x = random_tensor({1, 2, 5, 5}, 21);
  const Tensor y = avg_pool(x, 1, 1, 0);
  // Summed-area differences are exact only up to rounding.
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_NEAR(x.data()[i], y.data()[i], 1e-12);
}

TEST(AvgPool, MatchesSlidingWindow) {
  const Tensor x = random_tensor({1, 1, 32, 32}, 22, 0, 1);
  const Tensor y = avg_pool(x, 31, 1, 15);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 32, 32}));
  for (long r = 0; r < 32; ++r)
    for (long c = 0; c < 32; ++c) {
      Real s = 0;
      for (long i = r - 15; i <= r + 15; ++i)
        for (long j = c - 15; j <= c + 15; ++j)
          if (i >= 0 && j >= 0 && i < 32 && j < 32) s += x.at(0, 0, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      EXPECT_NEAR(y.at(0, 0, static_cast<std::size_t>(r), static_cast<std::size_t>(c)), s / 961.0, 1e-9);
    }
}

TEST(StackChannels, CopiesAndGradientSum) {
  const Tensor x = random_tensor({1, 1, 2, 2}, 23);
  const Tensor y = stack_channels(x, 3);
  EXPECT_EQ(y.shape(), (Shape{1, 3, 2, 2}));
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(y.data()[c * 4 + i], x.data()[i]);
  const Tensor one = stack_channels(x, 1);
  EXPECT_TRUE(std::equal(x.data().begin(), x.data().end(), one.data().begin()));

  Tensor leaf = x.detach(true);
  const Tensor upstream = random_tensor({1, 3, 2, 2}, 24);
  backward(sum(mul(stack_channels(leaf, 3), upstream)));
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(leaf.grad()[i], upstream.data()[i] + upstream.data()[4 + i] + upstream.data()[8 + i], 1e-15);
  }
}

TEST(GradCheck, LinearFunctionIsExact) {
  const Tensor w = random_tensor({1, 1, 3, 3}, 25);
  const auto f = [&](const Tensor& x) { return sum(mul(x, w)); };
  EXPECT_LT(grad_check(f, random_tensor({1, 1, 3, 3}, 26), 1e-3), 1e-10);
}

TEST(GradCheck, DetectsCorruptedBackward) {
  const auto f = [](const Tensor& x) { return sum(sigmoid(x)); };
  const Tensor p = random_tensor({1, 1, 2, 2}, 27);
  errnet::testing::set_sigmoid_backward_fault(1.1);
  const Real err = grad_check(f, p, 1e-5);
  errnet::testing::set_sigmoid_backward_fault(1.0);
  EXPECT_GT(err, 1e-2);
  EXPECT_LT(grad_check(f, p, 1e-5), 1e-6);
}
