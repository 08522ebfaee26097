#include "errnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace errnet {

namespace {

using detail::TensorImpl;

Real g_sigmoid_fault = 1.0;
thread_local bool g_track_relu = false;
thread_local std::uint64_t g_relu_signature = 0;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape().str() +
                                " vs " + b.shape().str());
  }
}

std::size_t effective_extent(std::size_t k, std::size_t dilation) { return (k - 1) * dilation + 1; }

struct ConvGeometry {
  std::size_t in_c, in_h, in_w;
  std::size_t out_c, out_h, out_w;
  std::size_t kh, kw;
  std::size_t stride, pad, dilation;

  std::size_t rows() const { return in_c * kh * kw; }
  std::size_t cols() const { return out_h * out_w; }
};

using RowMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixView = Eigen::Map<RowMatrix>;
using ConstMatrixView = Eigen::Map<const RowMatrix>;

void im2col(const Real* in, const ConvGeometry& g, Real* col) {
  const std::size_t cols = g.cols();
  for (std::size_t ci = 0; ci < g.in_c; ++ci) {
    const Real* plane = in + ci * g.in_h * g.in_w;
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        Real* row = col + ((ci * g.kh + ky) * g.kw + kx) * cols;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + ky * g.dilation) - static_cast<long>(g.pad);
          Real* dst = row + oy * g.out_w;
          if (iy < 0 || iy >= static_cast<long>(g.in_h)) {
            std::fill(dst, dst + g.out_w, 0.0);
            continue;
          }
          const Real* src = plane + iy * g.in_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long ix = static_cast<long>(ox * g.stride + kx * g.dilation) - static_cast<long>(g.pad);
            dst[ox] = (ix < 0 || ix >= static_cast<long>(g.in_w)) ? 0.0 : src[ix];
          }
        }
      }
    }
  }
}

void col2im_add(const Real* col, const ConvGeometry& g, Real* in) {
  const std::size_t cols = g.cols();
  for (std::size_t ci = 0; ci < g.in_c; ++ci) {
    Real* plane = in + ci * g.in_h * g.in_w;
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        const Real* row = col + ((ci * g.kh + ky) * g.kw + kx) * cols;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + ky * g.dilation) - static_cast<long>(g.pad);
          if (iy < 0 || iy >= static_cast<long>(g.in_h)) continue;
          Real* dst = plane + iy * g.in_w;
          const Real* src = row + oy * g.out_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long ix = static_cast<long>(ox * g.stride + kx * g.dilation) - static_cast<long>(g.pad);
            if (ix >= 0 && ix < static_cast<long>(g.in_w)) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

namespace testing {

void set_sigmoid_backward_fault(Real factor) { g_sigmoid_fault = factor; }

ReluSignatureScope::ReluSignatureScope() : previous_(g_track_relu) {
  g_track_relu = true;
  g_relu_signature = 0;
}

ReluSignatureScope::~ReluSignatureScope() { g_track_relu = previous_; }

std::uint64_t ReluSignatureScope::take() {
  const std::uint64_t s = g_relu_signature;
  g_relu_signature = 0;
  return s;
}

}  // namespace testing

Real stable_sigmoid(Real x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const Real e = std::exp(x);
  return e / (1.0 + e);
}

Tensor conv2d(const Tensor& input, const Conv2dParams& params) {
  const Shape& is = input.shape();
  const Shape& ws = params.weight.shape();
  if (params.stride == 0) throw std::invalid_argument("conv2d: stride must be positive");
  if (params.dilation == 0) throw std::invalid_argument("conv2d: dilation must be positive");
  if (is.c != ws.c) {
    throw std::invalid_argument("conv2d: input channels " + std::to_string(is.c) +
                                " do not match kernel in_ch " + std::to_string(ws.c));
  }
  if (params.bias.defined() && params.bias.shape() != Shape{1, ws.n, 1, 1}) {
    throw std::invalid_argument("conv2d: bias shape " + params.bias.shape().str() +
                                " does not match out_ch " + std::to_string(ws.n));
  }
  const std::size_t ext_h = effective_extent(ws.h, params.dilation);
  const std::size_t ext_w = effective_extent(ws.w, params.dilation);
  if (ext_h > is.h + 2 * params.padding) {
    throw std::invalid_argument("conv2d: effective kernel height " + std::to_string(ext_h) +
                                " exceeds padded input height " +
                                std::to_string(is.h + 2 * params.padding));
  }
  if (ext_w > is.w + 2 * params.padding) {
    throw std::invalid_argument("conv2d: effective kernel width " + std::to_string(ext_w) +
                                " exceeds padded input width " +
                                std::to_string(is.w + 2 * params.padding));
  }

  ConvGeometry g{is.c, is.h, is.w, ws.n, 0, 0, ws.h, ws.w, params.stride, params.padding,
                 params.dilation};
  g.out_h = (is.h + 2 * g.pad - ext_h) / g.stride + 1;
  g.out_w = (is.w + 2 * g.pad - ext_w) / g.stride + 1;

  const Shape out_shape{is.n, g.out_c, g.out_h, g.out_w};
  std::vector<Real> out(out_shape.numel(), 0.0);
  std::vector<Real> col(g.rows() * g.cols());
  const Real* w = params.weight.data().data();
  const Real* in = input.data().data();
  const std::size_t K = g.rows();
  const std::size_t P = g.cols();
  for (std::size_t n = 0; n < is.n; ++n) {
    im2col(in + n * is.c * is.h * is.w, g, col.data());
    Real* o = out.data() + n * g.out_c * P;
    if (params.bias.defined()) {
      for (std::size_t co = 0; co < g.out_c; ++co) std::fill(o + co * P, o + (co + 1) * P, params.bias.data()[co]);
    }
    MatrixView(o, g.out_c, P).noalias() +=
        ConstMatrixView(w, g.out_c, K) * ConstMatrixView(col.data(), K, P);
  }

  std::vector<Tensor> inputs{input, params.weight};
  if (params.bias.defined()) inputs.push_back(params.bias);
  const bool has_bias = params.bias.defined();
  return detail::make_result(
      out_shape, std::move(out), "conv2d", inputs, [g, has_bias, is](const TensorImpl& result) {
        const auto& node = *result.node;
        TensorImpl& x = *node.inputs[0];
        TensorImpl& wt = *node.inputs[1];
        const std::size_t K = g.rows();
        const std::size_t P = g.cols();
        const Real* dout = result.grad.data();
        std::vector<Real> col(K * P);
        for (std::size_t n = 0; n < is.n; ++n) {
          const Real* dn = dout + n * g.out_c * P;
          if (wt.requires_grad) {
            im2col(x.data.data() + n * is.c * is.h * is.w, g, col.data());
            // dW += dY * col^T
            MatrixView(wt.grad_buffer().data(), g.out_c, K).noalias() +=
                ConstMatrixView(dn, g.out_c, P) * ConstMatrixView(col.data(), K, P).transpose();
          }
          if (has_bias && node.inputs[2]->requires_grad) {
            Real* db = node.inputs[2]->grad_buffer().data();
            for (std::size_t co = 0; co < g.out_c; ++co) {
              const Real* drow = dn + co * P;
              Real acc = 0.0;
              for (std::size_t p = 0; p < P; ++p) acc += drow[p];
              db[co] += acc;
            }
          }
          if (x.requires_grad) {
            // dcol = W^T * dY
            MatrixView(col.data(), K, P).noalias() =
                ConstMatrixView(wt.data.data(), g.out_c, K).transpose() * ConstMatrixView(dn, g.out_c, P);
            col2im_add(col.data(), g, x.grad_buffer().data() + n * is.c * is.h * is.w);
          }
        }
      });
}

Tensor bilinear_resize(const Tensor& input, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) {
    throw std::invalid_argument("bilinear_resize: output size must be at least 1x1");
  }
  const Shape is = input.shape();
  const Shape os{is.n, is.c, out_h, out_w};
  if (out_h == is.h && out_w == is.w) {
    std::vector<Real> out(input.data().begin(), input.data().end());
    return detail::make_result(os, std::move(out), "resize_identity", {input},
                               [](const TensorImpl& result) {
                                 TensorImpl& x = *result.node->inputs[0];
                                 auto& gx = x.grad_buffer();
                                 for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += result.grad[i];
                               });
  }

  // Source taps per output row/column, shared by forward and backward.
  struct Tap {
    std::size_t i0, i1;
    Real l0, l1;
  };
  auto taps = [](std::size_t in, std::size_t out) {
    std::vector<Tap> t(out);
    const Real scale = static_cast<Real>(in) / static_cast<Real>(out);
    for (std::size_t d = 0; d < out; ++d) {
      Real src = (static_cast<Real>(d) + 0.5) * scale - 0.5;
      if (src < 0) src = 0;
      std::size_t i0 = static_cast<std::size_t>(src);
      if (i0 > in - 1) i0 = in - 1;
      const std::size_t i1 = i0 < in - 1 ? i0 + 1 : i0;
      const Real l1 = src - static_cast<Real>(i0);
      t[d] = {i0, i1, 1.0 - l1, l1};
    }
    return t;
  };
  auto ty = taps(is.h, out_h);
  auto tx = taps(is.w, out_w);

  std::vector<Real> out(os.numel());
  const Real* in = input.data().data();
  for (std::size_t p = 0; p < is.n * is.c; ++p) {
    const Real* src = in + p * is.h * is.w;
    Real* dst = out.data() + p * out_h * out_w;
    for (std::size_t y = 0; y < out_h; ++y) {
      const Tap& a = ty[y];
      const Real* r0 = src + a.i0 * is.w;
      const Real* r1 = src + a.i1 * is.w;
      for (std::size_t x = 0; x < out_w; ++x) {
        const Tap& b = tx[x];
        dst[y * out_w + x] = a.l0 * (b.l0 * r0[b.i0] + b.l1 * r0[b.i1]) +
                             a.l1 * (b.l0 * r1[b.i0] + b.l1 * r1[b.i1]);
      }
    }
  }
  return detail::make_result(
      os, std::move(out), "bilinear_resize", {input},
      [ty = std::move(ty), tx = std::move(tx), is, out_h, out_w](const TensorImpl& result) {
        TensorImpl& x = *result.node->inputs[0];
        Real* gx = x.grad_buffer().data();
        for (std::size_t p = 0; p < is.n * is.c; ++p) {
          Real* dst = gx + p * is.h * is.w;
          const Real* go = result.grad.data() + p * out_h * out_w;
          for (std::size_t y = 0; y < out_h; ++y) {
            const Tap& a = ty[y];
            for (std::size_t xo = 0; xo < out_w; ++xo) {
              const Tap& b = tx[xo];
              const Real gval = go[y * out_w + xo];
              dst[a.i0 * is.w + b.i0] += a.l0 * b.l0 * gval;
              dst[a.i0 * is.w + b.i1] += a.l0 * b.l1 * gval;
              dst[a.i1 * is.w + b.i0] += a.l1 * b.l0 * gval;
              dst[a.i1 * is.w + b.i1] += a.l1 * b.l1 * gval;
            }
          }
        }
      });
}

Tensor concat_channels(const std::vector<Tensor>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("concat_channels: no inputs");
  const Shape first = inputs.front().shape();
  std::size_t channels = 0;
  for (const auto& t : inputs) {
    const Shape& s = t.shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw std::invalid_argument("concat_channels: spatial mismatch " + s.str() + " vs " +
                                  first.str());
    }
    channels += s.c;
  }
  const Shape os{first.n, channels, first.h, first.w};
  const std::size_t plane = first.plane();
  std::vector<Real> out(os.numel());
  std::size_t offset = 0;
  for (const auto& t : inputs) {
    const std::size_t block = t.shape().c * plane;
    for (std::size_t n = 0; n < first.n; ++n) {
      std::copy_n(t.data().data() + n * block, block, out.data() + (n * channels + offset) * plane);
    }
    offset += t.shape().c;
  }
  return detail::make_result(os, std::move(out), "concat_channels", inputs,
                             [channels, plane, n_batch = first.n](const TensorImpl& result) {
                               std::size_t offset = 0;
                               for (const auto& in : result.node->inputs) {
                                 const std::size_t block = in->shape.c * plane;
                                 if (in->requires_grad) {
                                   Real* g = in->grad_buffer().data();
                                   for (std::size_t n = 0; n < n_batch; ++n) {
                                     const Real* src =
                                         result.grad.data() + (n * channels + offset) * plane;
                                     for (std::size_t i = 0; i < block; ++i) g[n * block + i] += src[i];
                                   }
                                 }
                                 offset += in->shape.c;
                               }
                             });
}

Tensor slice_channels(const Tensor& input, std::size_t begin, std::size_t count) {
  const Shape is = input.shape();
  if (count == 0 || begin + count > is.c) {
    throw std::invalid_argument("slice_channels: range [" + std::to_string(begin) + ", " +
                                std::to_string(begin + count) + ") outside " +
                                std::to_string(is.c) + " channels");
  }
  const Shape os{is.n, count, is.h, is.w};
  const std::size_t plane = is.plane();
  std::vector<Real> out(os.numel());
  for (std::size_t n = 0; n < is.n; ++n) {
    std::copy_n(input.data().data() + (n * is.c + begin) * plane, count * plane,
                out.data() + n * count * plane);
  }
  return detail::make_result(os, std::move(out), "slice_channels", {input},
                             [is, begin, count, plane](const TensorImpl& result) {
                               Real* g = result.node->inputs[0]->grad_buffer().data();
                               for (std::size_t n = 0; n < is.n; ++n) {
                                 Real* dst = g + (n * is.c + begin) * plane;
                                 const Real* src = result.grad.data() + n * count * plane;
                                 for (std::size_t i = 0; i < count * plane; ++i) dst[i] += src[i];
                               }
                             });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<Real> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return detail::make_result(a.shape(), std::move(out), "add", {a, b}, [](const TensorImpl& r) {
    for (const auto& in : r.node->inputs) {
      if (!in->requires_grad) continue;
      auto& g = in->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += r.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<Real> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return detail::make_result(a.shape(), std::move(out), "sub", {a, b}, [](const TensorImpl& r) {
    const Real sign[2] = {1.0, -1.0};
    for (std::size_t k = 0; k < 2; ++k) {
      auto& in = r.node->inputs[k];
      if (!in->requires_grad) continue;
      auto& g = in->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += sign[k] * r.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<Real> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return detail::make_result(a.shape(), std::move(out), "mul", {a, b}, [](const TensorImpl& r) {
    TensorImpl& x = *r.node->inputs[0];
    TensorImpl& y = *r.node->inputs[1];
    if (x.requires_grad) {
      auto& g = x.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += r.grad[i] * y.data[i];
    }
    if (y.requires_grad) {
      auto& g = y.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += r.grad[i] * x.data[i];
    }
  });
}

Tensor one_minus(const Tensor& a) {
  std::vector<Real> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 - a.data()[i];
  return detail::make_result(a.shape(), std::move(out), "one_minus", {a}, [](const TensorImpl& r) {
    auto& g = r.node->inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= r.grad[i];
  });
}

Tensor scale(const Tensor& a, Real factor) {
  std::vector<Real> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * a.data()[i];
  return detail::make_result(a.shape(), std::move(out), "scale", {a}, [factor](const TensorImpl& r) {
    auto& g = r.node->inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * r.grad[i];
  });
}

Tensor sigmoid(const Tensor& input) {
  std::vector<Real> out(input.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(input.data()[i]);
  return detail::make_result(input.shape(), std::move(out), "sigmoid", {input},
                             [](const TensorImpl& r) {
                               auto& g = r.node->inputs[0]->grad_buffer();
                               const Real fault = g_sigmoid_fault;
                               for (std::size_t i = 0; i < g.size(); ++i) {
                                 const Real s = r.data[i];
                                 g[i] += fault * r.grad[i] * s * (1.0 - s);
                               }
                             });
}

Tensor relu(const Tensor& input) {
  std::vector<Real> out(input.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = input.data()[i] > 0 ? input.data()[i] : 0.0;
  if (g_track_relu) {
    // FNV-1a over the active/inactive pattern.
    std::uint64_t h = g_relu_signature ^ 0xcbf29ce484222325ull;
    for (Real v : out) h = (h ^ (v > 0 ? 1u : 2u)) * 0x100000001b3ull;
    g_relu_signature = h;
  }
  return detail::make_result(input.shape(), std::move(out), "relu", {input},
                             [](const TensorImpl& r) {
                               TensorImpl& x = *r.node->inputs[0];
                               auto& g = x.grad_buffer();
                               for (std::size_t i = 0; i < g.size(); ++i) {
                                 if (x.data[i] > 0) g[i] += r.grad[i];
                               }
                             });
}

Tensor avg_pool(const Tensor& input, std::size_t kernel, std::size_t stride, std::size_t padding) {
  if (kernel == 0) throw std::invalid_argument("avg_pool: kernel must be at least 1");
  if (stride == 0) throw std::invalid_argument("avg_pool: stride must be positive");
  const Shape is = input.shape();
  if (kernel > is.h + 2 * padding || kernel > is.w + 2 * padding) {
    throw std::invalid_argument("avg_pool: kernel " + std::to_string(kernel) +
                                " exceeds padded input " + std::to_string(is.h + 2 * padding) +
                                "x" + std::to_string(is.w + 2 * padding));
  }
  const std::size_t oh = (is.h + 2 * padding - kernel) / stride + 1;
  const std::size_t ow = (is.w + 2 * padding - kernel) / stride + 1;
  const Shape os{is.n, is.c, oh, ow};
  const Real inv_area = 1.0 / static_cast<Real>(kernel * kernel);

  // Clipped window bounds along one axis.
  auto window = [stride, padding, kernel](std::size_t o, std::size_t extent) {
    const long start = static_cast<long>(o * stride) - static_cast<long>(padding);
    const long lo = std::max<long>(start, 0);
    const long hi = std::min<long>(start + static_cast<long>(kernel), static_cast<long>(extent));
    return std::pair<std::size_t, std::size_t>(lo, std::max(lo, hi));
  };

  // Summed-area table per plane keeps the 31x31 loss window cheap.
  std::vector<Real> out(os.numel());
  std::vector<Real> sat((is.h + 1) * (is.w + 1));
  for (std::size_t p = 0; p < is.n * is.c; ++p) {
    const Real* src = input.data().data() + p * is.plane();
    std::fill(sat.begin(), sat.end(), 0.0);
    for (std::size_t y = 0; y < is.h; ++y) {
      Real row = 0.0;
      for (std::size_t x = 0; x < is.w; ++x) {
        row += src[y * is.w + x];
        sat[(y + 1) * (is.w + 1) + x + 1] = sat[y * (is.w + 1) + x + 1] + row;
      }
    }
    Real* dst = out.data() + p * oh * ow;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      const auto [y0, y1] = window(oy, is.h);
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const auto [x0, x1] = window(ox, is.w);
        const Real s = sat[y1 * (is.w + 1) + x1] - sat[y0 * (is.w + 1) + x1] -
                       sat[y1 * (is.w + 1) + x0] + sat[y0 * (is.w + 1) + x0];
        dst[oy * ow + ox] = s * inv_area;
      }
    }
  }
  return detail::make_result(
      os, std::move(out), "avg_pool", {input},
      [is, oh, ow, inv_area, window](const TensorImpl& r) {
        Real* g = r.node->inputs[0]->grad_buffer().data();
        for (std::size_t p = 0; p < is.n * is.c; ++p) {
          Real* dst = g + p * is.plane();
          const Real* go = r.grad.data() + p * oh * ow;
          for (std::size_t oy = 0; oy < oh; ++oy) {
            const auto [y0, y1] = window(oy, is.h);
            for (std::size_t ox = 0; ox < ow; ++ox) {
              const auto [x0, x1] = window(ox, is.w);
              const Real v = go[oy * ow + ox] * inv_area;
              for (std::size_t y = y0; y < y1; ++y) {
                for (std::size_t x = x0; x < x1; ++x) dst[y * is.w + x] += v;
              }
            }
          }
        }
      });
}

Tensor stack_channels(const Tensor& input, std::size_t copies) {
  const Shape is = input.shape();
  if (is.c != 1) {
    throw std::invalid_argument("stack_channels: expected 1 channel, got " + std::to_string(is.c));
  }
  if (copies == 0) throw std::invalid_argument("stack_channels: copies must be at least 1");
  const Shape os{is.n, copies, is.h, is.w};
  const std::size_t plane = is.plane();
  std::vector<Real> out(os.numel());
  for (std::size_t n = 0; n < is.n; ++n) {
    for (std::size_t c = 0; c < copies; ++c) {
      std::copy_n(input.data().data() + n * plane, plane, out.data() + (n * copies + c) * plane);
    }
  }
  return detail::make_result(os, std::move(out), "stack_channels", {input},
                             [copies, plane, n_batch = is.n](const TensorImpl& r) {
                               Real* g = r.node->inputs[0]->grad_buffer().data();
                               for (std::size_t n = 0; n < n_batch; ++n) {
                                 for (std::size_t c = 0; c < copies; ++c) {
                                   const Real* src = r.grad.data() + (n * copies + c) * plane;
                                   for (std::size_t i = 0; i < plane; ++i) g[n * plane + i] += src[i];
                                 }
                               }
                             });
}

Tensor sum(const Tensor& input) {
  Real total = 0.0;
  for (Real v : input.data()) total += v;
  return detail::make_result({1, 1, 1, 1}, {total}, "sum", {input}, [](const TensorImpl& r) {
    auto& g = r.node->inputs[0]->grad_buffer();
    for (auto& v : g) v += r.grad[0];
  });
}

}  // namespace errnet
