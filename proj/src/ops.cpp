#include "ssdm/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ssdm/gemm.hpp"

namespace ssdm {

namespace {

template <typename T>
using NodePtr = typename Tensor<T>::NodePtr;

template <typename T>
Tensor<T> make_op(Shape shape, std::vector<T> value, std::vector<NodePtr<T>> parents,
                  std::function<void(detail::Node<T>&)> backward_fn) {
  auto node = std::make_shared<detail::Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (detail::grad_enabled()) {
    bool any = false;
    for (const auto& p : parents) any = any || p->requires_grad;
    if (any) {
      node->requires_grad = true;
      node->parents = std::move(parents);
      node->backward_fn = std::move(backward_fn);
    }
  }
  return Tensor<T>(std::move(node));
}

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (!same_shape(a.shape(), b.shape())) {
    throw DimensionError(std::string(op) + ": shapes " + format_shape(a.shape()) +
                         " and " + format_shape(b.shape()) + " differ");
  }
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  check_same_shape(a, b, "add");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<T> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return make_op<T>(a.shape(), std::move(out), {a.node(), b.node()},
                    [](detail::Node<T>& self) {
                      for (auto& parent : self.parents) {
                        if (!parent->requires_grad) continue;
                        for (size_t i = 0; i < self.grad.size(); ++i) {
                          parent->grad[i] += self.grad[i];
                        }
                      }
                    });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  check_same_shape(a, b, "mul");
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<T> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return make_op<T>(a.shape(), std::move(out), {a.node(), b.node()},
                    [](detail::Node<T>& self) {
                      auto& pa = *self.parents[0];
                      auto& pb = *self.parents[1];
                      for (size_t i = 0; i < self.grad.size(); ++i) {
                        if (pa.requires_grad) pa.grad[i] += self.grad[i] * pb.value[i];
                        if (pb.requires_grad) pb.grad[i] += self.grad[i] * pa.value[i];
                      }
                    });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  const auto av = a.values();
  std::vector<T> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * factor;
  return make_op<T>(a.shape(), std::move(out), {a.node()},
                    [factor](detail::Node<T>& self) {
                      auto& parent = *self.parents[0];
                      if (!parent.requires_grad) return;
                      for (size_t i = 0; i < self.grad.size(); ++i) {
                        parent.grad[i] += self.grad[i] * factor;
                      }
                    });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  const auto av = a.values();
  T total(0);
  for (T v : av) total += v;
  return make_op<T>({1}, {total}, {a.node()}, [](detail::Node<T>& self) {
    auto& parent = *self.parents[0];
    if (!parent.requires_grad) return;
    const T g = self.grad[0];
    for (size_t i = 0; i < parent.grad.size(); ++i) parent.grad[i] += g;
  });
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  const auto xv = x.values();
  std::vector<T> out(xv.size());
  for (size_t i = 0; i < out.size(); ++i) {
    const double v = static_cast<double>(xv[i]);
    out[i] = static_cast<T>(0.5 * v * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0)));
  }
  return make_op<T>(x.shape(), std::move(out), {x.node()}, [](detail::Node<T>& self) {
    auto& parent = *self.parents[0];
    if (!parent.requires_grad) return;
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    for (size_t i = 0; i < self.grad.size(); ++i) {
      const double v = static_cast<double>(parent.value[i]);
      const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
      parent.grad[i] += self.grad[i] * static_cast<T>(cdf + v * pdf);
    }
  });
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: incompatible shapes " + format_shape(a.shape()) +
                         " x " + format_shape(b.shape()));
  }
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<T> out(static_cast<size_t>(m * n), T(0));
  gemm_nn(a.values().data(), b.values().data(), out.data(), m, k, n);
  return make_op<T>({m, n}, std::move(out), {a.node(), b.node()},
                    [m, k, n](detail::Node<T>& self) {
                      auto& pa = *self.parents[0];
                      auto& pb = *self.parents[1];
                      // dA = dC * B^T, dB = A^T * dC
                      if (pa.requires_grad) {
                        gemm_nt(self.grad.data(), pb.value.data(), pa.grad.data(), m, n, k);
                      }
                      if (pb.requires_grad) {
                        gemm_tn(pa.value.data(), self.grad.data(), pb.grad.data(), m, k, n);
                      }
                    });
}

template <typename T>
Tensor<T> softmax_lastdim(const Tensor<T>& x) {
  if (x.ndim() < 1 || x.dim(x.ndim() - 1) < 1) {
    throw DimensionError("softmax_lastdim: need a non-empty last axis, got " +
                         format_shape(x.shape()));
  }
  const int64_t n = x.dim(x.ndim() - 1);
  const int64_t rows = x.numel() / n;
  const auto xv = x.values();
  std::vector<T> out(xv.size());
  for (int64_t r = 0; r < rows; ++r) {
    const T* row = xv.data() + r * n;
    T* orow = out.data() + r * n;
    T mx = row[0];
    for (int64_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    T denom(0);
    for (int64_t j = 0; j < n; ++j) {
      orow[j] = std::exp(row[j] - mx);
      denom += orow[j];
    }
    const T inv = T(1) / denom;
    for (int64_t j = 0; j < n; ++j) orow[j] *= inv;
  }
  return make_op<T>(x.shape(), std::move(out), {x.node()},
                    [n, rows](detail::Node<T>& self) {
                      auto& parent = *self.parents[0];
                      if (!parent.requires_grad) return;
                      // dx = (dy - <dy, y>) * y per row
                      for (int64_t r = 0; r < rows; ++r) {
                        const T* y = self.value.data() + r * n;
                        const T* dy = self.grad.data() + r * n;
                        T dot(0);
                        for (int64_t j = 0; j < n; ++j) dot += dy[j] * y[j];
                        T* dx = parent.grad.data() + r * n;
                        for (int64_t j = 0; j < n; ++j) dx[j] += (dy[j] - dot) * y[j];
                      }
                    });
}

namespace {

struct ConvDims {
  int64_t c_in, h, w;
  int64_t c_out, k, pad, stride;
  int64_t out_h, out_w;
};

template <typename T>
ConvDims conv_dims(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                   int64_t stride) {
  if (x.ndim() != 3 || w.ndim() != 4) {
    throw DimensionError("conv2d: expected x[C,H,W] and w[Co,Ci,k,k], got " +
                         format_shape(x.shape()) + " and " + format_shape(w.shape()));
  }
  ConvDims d;
  d.c_in = x.dim(0);
  d.h = x.dim(1);
  d.w = x.dim(2);
  d.c_out = w.dim(0);
  d.k = w.dim(2);
  d.stride = stride;
  if (w.dim(1) != d.c_in) {
    throw DimensionError("conv2d: weight expects " + std::to_string(w.dim(1)) +
                         " input channels, input has shape " + format_shape(x.shape()));
  }
  if (w.dim(3) != d.k || (d.k != 1 && d.k != 3)) {
    throw ValidationError("conv2d: kernel must be 1x1 or 3x3, got " +
                          format_shape(w.shape()));
  }
  if (stride != 1 && stride != 2 && stride != 4) {
    throw ValidationError("conv2d: stride must be 1, 2 or 4");
  }
  if (bias.ndim() != 1 || bias.dim(0) != d.c_out) {
    throw DimensionError("conv2d: bias shape " + format_shape(bias.shape()) +
                         " does not match " + std::to_string(d.c_out) + " filters");
  }
  d.pad = (d.k - 1) / 2;
  d.out_h = (d.h + 2 * d.pad - d.k) / stride + 1;
  d.out_w = (d.w + 2 * d.pad - d.k) / stride + 1;
  if (d.out_h < 1 || d.out_w < 1) {
    throw DimensionError("conv2d: input " + format_shape(x.shape()) +
                         " too small for stride " + std::to_string(stride));
  }
  return d;
}

// col[(ci*k*k + ky*k + kx), (oy*out_w + ox)] = x[ci, oy*s-p+ky, ox*s-p+kx]
template <typename T>
void im2col(const T* x, const ConvDims& d, T* col) {
  const int64_t spatial = d.out_h * d.out_w;
  for (int64_t ci = 0; ci < d.c_in; ++ci) {
    for (int64_t ky = 0; ky < d.k; ++ky) {
      for (int64_t kx = 0; kx < d.k; ++kx) {
        T* dst = col + ((ci * d.k + ky) * d.k + kx) * spatial;
        for (int64_t oy = 0; oy < d.out_h; ++oy) {
          const int64_t iy = oy * d.stride - d.pad + ky;
          if (iy < 0 || iy >= d.h) {
            std::fill(dst + oy * d.out_w, dst + (oy + 1) * d.out_w, T(0));
            continue;
          }
          const T* src = x + (ci * d.h + iy) * d.w;
          for (int64_t ox = 0; ox < d.out_w; ++ox) {
            const int64_t ix = ox * d.stride - d.pad + kx;
            dst[oy * d.out_w + ox] = (ix >= 0 && ix < d.w) ? src[ix] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_acc(const T* col, const ConvDims& d, T* dx) {
  const int64_t spatial = d.out_h * d.out_w;
  for (int64_t ci = 0; ci < d.c_in; ++ci) {
    for (int64_t ky = 0; ky < d.k; ++ky) {
      for (int64_t kx = 0; kx < d.k; ++kx) {
        const T* src = col + ((ci * d.k + ky) * d.k + kx) * spatial;
        for (int64_t oy = 0; oy < d.out_h; ++oy) {
          const int64_t iy = oy * d.stride - d.pad + ky;
          if (iy < 0 || iy >= d.h) continue;
          T* dst = dx + (ci * d.h + iy) * d.w;
          for (int64_t ox = 0; ox < d.out_w; ++ox) {
            const int64_t ix = ox * d.stride - d.pad + kx;
            if (ix >= 0 && ix < d.w) dst[ix] += src[oy * d.out_w + ox];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                 int64_t stride) {
  const ConvDims d = conv_dims(x, w, bias, stride);
  const int64_t spatial = d.out_h * d.out_w;
  const int64_t patch = d.c_in * d.k * d.k;
  const bool direct = (d.k == 1 && d.stride == 1);

  // The column buffer is shared with the backward pass.
  auto col = std::make_shared<std::vector<T>>();
  const T* col_data;
  if (direct) {
    col_data = x.values().data();
  } else {
    col->assign(static_cast<size_t>(patch * spatial), T(0));
    im2col(x.values().data(), d, col->data());
    col_data = col->data();
  }

  std::vector<T> out(static_cast<size_t>(d.c_out * spatial));
  const auto bv = bias.values();
  for (int64_t co = 0; co < d.c_out; ++co) {
    std::fill(out.begin() + co * spatial, out.begin() + (co + 1) * spatial, bv[co]);
  }
  gemm_nn(w.values().data(), col_data, out.data(), d.c_out, patch, spatial);

  return make_op<T>(
      {d.c_out, d.out_h, d.out_w}, std::move(out),
      {x.node(), w.node(), bias.node()}, [d, col, direct](detail::Node<T>& self) {
        auto& px = *self.parents[0];
        auto& pw = *self.parents[1];
        auto& pb = *self.parents[2];
        const int64_t spatial = d.out_h * d.out_w;
        const int64_t patch = d.c_in * d.k * d.k;
        const T* col_data = direct ? px.value.data() : col->data();
        if (pb.requires_grad) {
          for (int64_t co = 0; co < d.c_out; ++co) {
            T acc(0);
            const T* g = self.grad.data() + co * spatial;
            for (int64_t i = 0; i < spatial; ++i) acc += g[i];
            pb.grad[co] += acc;
          }
        }
        if (pw.requires_grad) {
          // dW[co, patch] = dY[co, hw] * col[patch, hw]^T
          gemm_nt(self.grad.data(), col_data, pw.grad.data(), d.c_out, spatial, patch);
        }
        if (px.requires_grad) {
          if (direct) {
            gemm_tn(pw.value.data(), self.grad.data(), px.grad.data(), d.c_out, patch,
                    spatial);
          } else {
            std::vector<T> dcol(static_cast<size_t>(patch * spatial), T(0));
            gemm_tn(pw.value.data(), self.grad.data(), dcol.data(), d.c_out, patch,
                    spatial);
            col2im_acc(dcol.data(), d, px.grad.data());
          }
        }
      });
}

namespace {

struct Lerp1D {
  int64_t lo, hi;  // clamped source indices
  double frac;
};

inline Lerp1D bilinear_axis(int64_t dst, int64_t src_size, int64_t dst_size) {
  // align_corners=false source coordinate
  const double pos =
      (static_cast<double>(dst) + 0.5) * static_cast<double>(src_size) /
          static_cast<double>(dst_size) -
      0.5;
  const double base = std::floor(pos);
  Lerp1D r;
  r.frac = pos - base;
  const int64_t b = static_cast<int64_t>(base);
  r.lo = std::clamp<int64_t>(b, 0, src_size - 1);
  r.hi = std::clamp<int64_t>(b + 1, 0, src_size - 1);
  return r;
}

}  // namespace

template <typename T>
Tensor<T> resize_bilinear(const Tensor<T>& x, int64_t out_h, int64_t out_w) {
  if (x.ndim() != 3) {
    throw DimensionError("resize_bilinear: expected [C,H,W], got " +
                         format_shape(x.shape()));
  }
  if (out_h < 1 || out_w < 1) {
    throw ValidationError("resize_bilinear: target size must be positive");
  }
  const int64_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  std::vector<Lerp1D> ys(static_cast<size_t>(out_h)), xs(static_cast<size_t>(out_w));
  for (int64_t i = 0; i < out_h; ++i) ys[i] = bilinear_axis(i, h, out_h);
  for (int64_t j = 0; j < out_w; ++j) xs[j] = bilinear_axis(j, w, out_w);

  const auto xv = x.values();
  std::vector<T> out(static_cast<size_t>(c * out_h * out_w));
  for (int64_t ch = 0; ch < c; ++ch) {
    const T* plane = xv.data() + ch * h * w;
    T* oplane = out.data() + ch * out_h * out_w;
    for (int64_t i = 0; i < out_h; ++i) {
      const Lerp1D& ly = ys[i];
      for (int64_t j = 0; j < out_w; ++j) {
        const Lerp1D& lx = xs[j];
        // lerp form: exact for constant inputs
        const T v00 = plane[ly.lo * w + lx.lo];
        const T v01 = plane[ly.lo * w + lx.hi];
        const T v10 = plane[ly.hi * w + lx.lo];
        const T v11 = plane[ly.hi * w + lx.hi];
        const T top = v00 + static_cast<T>(lx.frac) * (v01 - v00);
        const T bot = v10 + static_cast<T>(lx.frac) * (v11 - v10);
        oplane[i * out_w + j] = top + static_cast<T>(ly.frac) * (bot - top);
      }
    }
  }

  return make_op<T>({c, out_h, out_w}, std::move(out), {x.node()},
                    [c, h, w, out_h, out_w, ys, xs](detail::Node<T>& self) {
                      auto& parent = *self.parents[0];
                      if (!parent.requires_grad) return;
                      for (int64_t ch = 0; ch < c; ++ch) {
                        T* dplane = parent.grad.data() + ch * h * w;
                        const T* g = self.grad.data() + ch * out_h * out_w;
                        for (int64_t i = 0; i < out_h; ++i) {
                          const Lerp1D& ly = ys[i];
                          const T fy = static_cast<T>(ly.frac);
                          for (int64_t j = 0; j < out_w; ++j) {
                            const Lerp1D& lx = xs[j];
                            const T fx = static_cast<T>(lx.frac);
                            const T go = g[i * out_w + j];
                            dplane[ly.lo * w + lx.lo] += go * (T(1) - fy) * (T(1) - fx);
                            dplane[ly.lo * w + lx.hi] += go * (T(1) - fy) * fx;
                            dplane[ly.hi * w + lx.lo] += go * fy * (T(1) - fx);
                            dplane[ly.hi * w + lx.hi] += go * fy * fx;
                          }
                        }
                      }
                    });
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.ndim() != 3 || b.ndim() != 3 || a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
    throw DimensionError("concat_channels: spatial shapes of " +
                         format_shape(a.shape()) + " and " + format_shape(b.shape()) +
                         " differ");
  }
  const int64_t c1 = a.dim(0), c2 = b.dim(0);
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<T> out;
  out.reserve(av.size() + bv.size());
  out.insert(out.end(), av.begin(), av.end());
  out.insert(out.end(), bv.begin(), bv.end());
  return make_op<T>({c1 + c2, a.dim(1), a.dim(2)}, std::move(out),
                    {a.node(), b.node()}, [](detail::Node<T>& self) {
                      auto& pa = *self.parents[0];
                      auto& pb = *self.parents[1];
                      const size_t na = pa.value.size();
                      if (pa.requires_grad) {
                        for (size_t i = 0; i < na; ++i) pa.grad[i] += self.grad[i];
                      }
                      if (pb.requires_grad) {
                        for (size_t i = 0; i < pb.value.size(); ++i) {
                          pb.grad[i] += self.grad[na + i];
                        }
                      }
                    });
}

template <typename T>
Tensor<T> l2_normalize_channels(const Tensor<T>& x) {
  if (x.ndim() != 3) {
    throw DimensionError("l2_normalize_channels: expected [C,H,W], got " +
                         format_shape(x.shape()));
  }
  const int64_t c = x.dim(0);
  const int64_t hw = x.dim(1) * x.dim(2);
  const auto xv = x.values();
  std::vector<T> out(xv.size());
  auto norms = std::make_shared<std::vector<T>>(static_cast<size_t>(hw));
  constexpr T tiny = T(1e-12);
  for (int64_t p = 0; p < hw; ++p) {
    T sq(0);
    for (int64_t ch = 0; ch < c; ++ch) {
      const T v = xv[ch * hw + p];
      sq += v * v;
    }
    const T n = std::sqrt(sq);
    (*norms)[p] = n;
    const T inv = n > tiny ? T(1) / n : T(0);
    for (int64_t ch = 0; ch < c; ++ch) out[ch * hw + p] = xv[ch * hw + p] * inv;
  }
  return make_op<T>(x.shape(), std::move(out), {x.node()},
                    [c, hw, norms](detail::Node<T>& self) {
                      auto& parent = *self.parents[0];
                      if (!parent.requires_grad) return;
                      // dx = (g - y <y,g>) / |x|, zero where |x| ~ 0
                      for (int64_t p = 0; p < hw; ++p) {
                        const T n = (*norms)[p];
                        if (!(n > T(1e-12))) continue;
                        T dot(0);
                        for (int64_t ch = 0; ch < c; ++ch) {
                          dot += self.grad[ch * hw + p] * self.value[ch * hw + p];
                        }
                        const T inv = T(1) / n;
                        for (int64_t ch = 0; ch < c; ++ch) {
                          const size_t i = static_cast<size_t>(ch * hw + p);
                          parent.grad[i] += (self.grad[i] - self.value[i] * dot) * inv;
                        }
                      }
                    });
}

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, const LabelMap& labels,
                        int ignore_index) {
  if (logits.ndim() != 3) {
    throw DimensionError("cross_entropy: expected logits[K,H,W], got " +
                         format_shape(logits.shape()));
  }
  const int64_t k = logits.dim(0), h = logits.dim(1), w = logits.dim(2);
  if (labels.height != h || labels.width != w) {
    throw DimensionError("cross_entropy: labels " + std::to_string(labels.height) +
                         "x" + std::to_string(labels.width) + " vs logits " +
                         format_shape(logits.shape()));
  }
  const int64_t hw = h * w;
  const auto lv = logits.values();
  auto probs = std::make_shared<std::vector<T>>(lv.size());
  int64_t valid = 0;
  double loss = 0.0;
  for (int64_t p = 0; p < hw; ++p) {
    const int y = labels.values[static_cast<size_t>(p)];
    if (y == ignore_index) continue;
    if (y < 0 || y >= k) {
      throw ValidationError("cross_entropy: label " + std::to_string(y) +
                            " out of range for " + std::to_string(k) + " classes");
    }
    T mx = lv[p];
    for (int64_t cls = 1; cls < k; ++cls) mx = std::max(mx, lv[cls * hw + p]);
    T denom(0);
    for (int64_t cls = 0; cls < k; ++cls) {
      const T e = std::exp(lv[cls * hw + p] - mx);
      (*probs)[cls * hw + p] = e;
      denom += e;
    }
    const T inv = T(1) / denom;
    for (int64_t cls = 0; cls < k; ++cls) (*probs)[cls * hw + p] *= inv;
    loss -= std::log(static_cast<double>((*probs)[y * hw + p]));
    ++valid;
  }
  if (valid == 0) {
    throw ValidationError("cross_entropy: no valid pixels (all ignored)");
  }
  loss /= static_cast<double>(valid);

  // Copy what the backward needs; LabelMap is not part of the graph.
  auto label_values = std::make_shared<std::vector<uint8_t>>(labels.values);
  return make_op<T>(
      {1}, {static_cast<T>(loss)}, {logits.node()},
      [k, hw, valid, ignore_index, probs, label_values](detail::Node<T>& self) {
        auto& parent = *self.parents[0];
        if (!parent.requires_grad) return;
        const T g = self.grad[0] / static_cast<T>(valid);
        for (int64_t p = 0; p < hw; ++p) {
          const int y = (*label_values)[static_cast<size_t>(p)];
          if (y == ignore_index) continue;
          for (int64_t cls = 0; cls < k; ++cls) {
            const T indicator = (cls == y) ? T(1) : T(0);
            parent.grad[cls * hw + p] += g * ((*probs)[cls * hw + p] - indicator);
          }
        }
      });
}

template <typename T>
Tensor<T> uniform_tensor(Shape shape, Rng& rng, double lo, double hi,
                         bool requires_grad) {
  std::vector<T> data(static_cast<size_t>(shape_numel(shape)));
  for (auto& v : data) v = static_cast<T>(rng.uniform(lo, hi));
  return Tensor<T>::from_data(std::move(shape), std::move(data), requires_grad);
}

template <typename T>
Tensor<T> normal_tensor(Shape shape, Rng& rng, double mean, double stddev,
                        bool requires_grad) {
  std::vector<T> data(static_cast<size_t>(shape_numel(shape)));
  for (auto& v : data) v = static_cast<T>(rng.normal(mean, stddev));
  return Tensor<T>::from_data(std::move(shape), std::move(data), requires_grad);
}

#define SSDM_INSTANTIATE_OPS(T)                                                       \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                         \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                         \
  template Tensor<T> scale(const Tensor<T>&, T);                                      \
  template Tensor<T> sum(const Tensor<T>&);                                           \
  template Tensor<T> gelu(const Tensor<T>&);                                          \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> softmax_lastdim(const Tensor<T>&);                               \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,    \
                            int64_t);                                                 \
  template Tensor<T> resize_bilinear(const Tensor<T>&, int64_t, int64_t);             \
  template Tensor<T> concat_channels(const Tensor<T>&, const Tensor<T>&);             \
  template Tensor<T> l2_normalize_channels(const Tensor<T>&);                         \
  template Tensor<T> cross_entropy(const Tensor<T>&, const LabelMap&, int);           \
  template Tensor<T> uniform_tensor(Shape, Rng&, double, double, bool);               \
  template Tensor<T> normal_tensor(Shape, Rng&, double, double, bool);

SSDM_INSTANTIATE_OPS(float)
SSDM_INSTANTIATE_OPS(double)

#undef SSDM_INSTANTIATE_OPS

}  // namespace ssdm
