#include "ssdm/attention.hpp"

#include <cmath>
#include <memory>

#include "ssdm/gemm.hpp"

namespace ssdm {

namespace {

// Rows and columns share one kernel. A "line" is a row (axis 0) or a column
// (axis 1); `lines` counts them, `len` is the attended extent.
struct AxialDims {
  int64_t d, h, w, heads, d_head;
  int64_t lines, len;
  bool row_axis;

  int64_t pixel(int64_t line, int64_t pos) const {
    return row_axis ? line * w + pos : pos * w + line;
  }
};

template <typename T>
AxialDims axial_dims(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                     const Tensor<T>& bias, int64_t heads, bool row_axis,
                     const char* op) {
  if (q.ndim() != 3 || !same_shape(q.shape(), k.shape()) ||
      !same_shape(q.shape(), v.shape())) {
    throw DimensionError(std::string(op) + ": Q/K/V must share one [d,H,W] shape, got " +
                         format_shape(q.shape()) + ", " + format_shape(k.shape()) +
                         ", " + format_shape(v.shape()));
  }
  AxialDims dims;
  dims.d = q.dim(0);
  dims.h = q.dim(1);
  dims.w = q.dim(2);
  dims.heads = heads;
  dims.row_axis = row_axis;
  if (heads < 1 || dims.d % heads != 0) {
    throw ValidationError(std::string(op) + ": channel count " +
                          std::to_string(dims.d) + " not divisible by " +
                          std::to_string(heads) + " heads");
  }
  dims.d_head = dims.d / heads;
  dims.lines = row_axis ? dims.h : dims.w;
  dims.len = row_axis ? dims.w : dims.h;
  const Shape want{dims.h * dims.w, dims.len};
  if (!same_shape(bias.shape(), want)) {
    throw DimensionError(std::string(op) + ": bias shape " + format_shape(bias.shape()) +
                         ", expected " + format_shape(want));
  }
  return dims;
}

// Gather one head's line into contiguous [len, d_head] storage.
template <typename T>
void gather_line(const T* src, const AxialDims& d, int64_t head, int64_t line, T* dst) {
  const int64_t hw = d.h * d.w;
  for (int64_t pos = 0; pos < d.len; ++pos) {
    const int64_t px = d.pixel(line, pos);
    for (int64_t c = 0; c < d.d_head; ++c) {
      dst[pos * d.d_head + c] = src[(head * d.d_head + c) * hw + px];
    }
  }
}

template <typename T>
void scatter_line_acc(const T* src, const AxialDims& d, int64_t head, int64_t line,
                      T* dst) {
  const int64_t hw = d.h * d.w;
  for (int64_t pos = 0; pos < d.len; ++pos) {
    const int64_t px = d.pixel(line, pos);
    for (int64_t c = 0; c < d.d_head; ++c) {
      dst[(head * d.d_head + c) * hw + px] += src[pos * d.d_head + c];
    }
  }
}

template <typename T>
Tensor<T> axial_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                          const Tensor<T>& bias, int64_t heads, bool row_axis,
                          uint64_t* mac_counter, const char* op) {
  const AxialDims dims = axial_dims(q, k, v, bias, heads, row_axis, op);
  const int64_t hw = dims.h * dims.w;
  const T scale = T(1) / static_cast<T>(std::sqrt(static_cast<double>(dims.d_head)));

  const auto qv = q.values();
  const auto kv = k.values();
  const auto vv = v.values();
  const auto bv = bias.values();

  std::vector<T> out(static_cast<size_t>(dims.d * hw), T(0));
  // Attention weights are kept for the backward pass: [heads, lines, len, len],
  // indexed by (head, line, query pos, key pos).
  auto attn = std::make_shared<std::vector<T>>(
      static_cast<size_t>(dims.heads * dims.lines * dims.len * dims.len));

  std::vector<T> qbuf(static_cast<size_t>(dims.len * dims.d_head));
  std::vector<T> kbuf(qbuf.size()), vbuf(qbuf.size()), obuf(qbuf.size());

  for (int64_t head = 0; head < dims.heads; ++head) {
    for (int64_t line = 0; line < dims.lines; ++line) {
      gather_line(qv.data(), dims, head, line, qbuf.data());
      gather_line(kv.data(), dims, head, line, kbuf.data());
      gather_line(vv.data(), dims, head, line, vbuf.data());

      T* logits = attn->data() + (head * dims.lines + line) * dims.len * dims.len;
      std::fill(logits, logits + dims.len * dims.len, T(0));
      gemm_nt(qbuf.data(), kbuf.data(), logits, dims.len, dims.d_head, dims.len);
      if (mac_counter) {
        *mac_counter += static_cast<uint64_t>(dims.len) * dims.len * (dims.d_head + 1);
      }
      for (int64_t pos = 0; pos < dims.len; ++pos) {
        T* lrow = logits + pos * dims.len;
        const T* brow = bv.data() + dims.pixel(line, pos) * dims.len;
        T mx = lrow[0] * scale + brow[0];
        lrow[0] = mx;
        for (int64_t j = 1; j < dims.len; ++j) {
          lrow[j] = lrow[j] * scale + brow[j];
          mx = std::max(mx, lrow[j]);
        }
        T denom(0);
        for (int64_t j = 0; j < dims.len; ++j) {
          lrow[j] = std::exp(lrow[j] - mx);
          denom += lrow[j];
        }
        const T inv = T(1) / denom;
        for (int64_t j = 0; j < dims.len; ++j) lrow[j] *= inv;
      }

      std::fill(obuf.begin(), obuf.end(), T(0));
      gemm_nn(logits, vbuf.data(), obuf.data(), dims.len, dims.len, dims.d_head);
      if (mac_counter) {
        *mac_counter += static_cast<uint64_t>(dims.len) * dims.len * dims.d_head;
      }
      scatter_line_acc(obuf.data(), dims, head, line, out.data());
    }
  }

  auto node = std::make_shared<detail::Node<T>>();
  node->shape = q.shape();
  node->value = std::move(out);
  if (detail::grad_enabled() &&
      (q.requires_grad() || k.requires_grad() || v.requires_grad() ||
       bias.requires_grad())) {
    node->requires_grad = true;
    node->parents = {q.node(), k.node(), v.node(), bias.node()};
    node->backward_fn = [dims, scale, attn](detail::Node<T>& self) {
      auto& pq = *self.parents[0];
      auto& pk = *self.parents[1];
      auto& pv = *self.parents[2];
      auto& pb = *self.parents[3];
      const int64_t len = dims.len, dh = dims.d_head;

      std::vector<T> qbuf(static_cast<size_t>(len * dh)), kbuf(qbuf.size()),
          vbuf(qbuf.size()), dob(qbuf.size()), dqb(qbuf.size()), dkb(qbuf.size()),
          dvb(qbuf.size());
      std::vector<T> dattn(static_cast<size_t>(len * len)),
          dlogits(static_cast<size_t>(len * len));

      for (int64_t head = 0; head < dims.heads; ++head) {
        for (int64_t line = 0; line < dims.lines; ++line) {
          gather_line(pq.value.data(), dims, head, line, qbuf.data());
          gather_line(pk.value.data(), dims, head, line, kbuf.data());
          gather_line(pv.value.data(), dims, head, line, vbuf.data());
          gather_line(self.grad.data(), dims, head, line, dob.data());
          const T* a = attn->data() + (head * dims.lines + line) * len * len;

          // dV = A^T dO ; dA = dO V^T
          std::fill(dvb.begin(), dvb.end(), T(0));
          gemm_tn(a, dob.data(), dvb.data(), len, len, dh);
          std::fill(dattn.begin(), dattn.end(), T(0));
          gemm_nt(dob.data(), vbuf.data(), dattn.data(), len, dh, len);

          // softmax backward, then split into bias and scaled QK parts
          for (int64_t pos = 0; pos < len; ++pos) {
            const T* arow = a + pos * len;
            const T* darow = dattn.data() + pos * len;
            T dot(0);
            for (int64_t j = 0; j < len; ++j) dot += darow[j] * arow[j];
            T* dlrow = dlogits.data() + pos * len;
            for (int64_t j = 0; j < len; ++j) dlrow[j] = (darow[j] - dot) * arow[j];
            if (pb.requires_grad) {
              T* db = pb.grad.data() + dims.pixel(line, pos) * len;
              for (int64_t j = 0; j < len; ++j) db[j] += dlrow[j];
            }
            for (int64_t j = 0; j < len; ++j) dlrow[j] *= scale;
          }

          // dQ = dlogits K ; dK = dlogits^T Q
          std::fill(dqb.begin(), dqb.end(), T(0));
          gemm_nn(dlogits.data(), kbuf.data(), dqb.data(), len, len, dh);
          std::fill(dkb.begin(), dkb.end(), T(0));
          gemm_tn(dlogits.data(), qbuf.data(), dkb.data(), len, len, dh);

          if (pq.requires_grad) scatter_line_acc(dqb.data(), dims, head, line, pq.grad.data());
          if (pk.requires_grad) scatter_line_acc(dkb.data(), dims, head, line, pk.grad.data());
          if (pv.requires_grad) scatter_line_acc(dvb.data(), dims, head, line, pv.grad.data());
        }
      }
    };
  }
  return Tensor<T>(std::move(node));
}

}  // namespace

template <typename T>
Tensor<T> row_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                        const Tensor<T>& bias, int64_t heads, uint64_t* mac_counter) {
  return axial_attention(q, k, v, bias, heads, /*row_axis=*/true, mac_counter,
                         "row_attention");
}

template <typename T>
Tensor<T> col_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                        const Tensor<T>& bias, int64_t heads, uint64_t* mac_counter) {
  return axial_attention(q, k, v, bias, heads, /*row_axis=*/false, mac_counter,
                         "col_attention");
}

template Tensor<float> row_attention(const Tensor<float>&, const Tensor<float>&,
                                     const Tensor<float>&, const Tensor<float>&,
                                     int64_t, uint64_t*);
template Tensor<double> row_attention(const Tensor<double>&, const Tensor<double>&,
                                      const Tensor<double>&, const Tensor<double>&,
                                      int64_t, uint64_t*);
template Tensor<float> col_attention(const Tensor<float>&, const Tensor<float>&,
                                     const Tensor<float>&, const Tensor<float>&,
                                     int64_t, uint64_t*);
template Tensor<double> col_attention(const Tensor<double>&, const Tensor<double>&,
                                      const Tensor<double>&, const Tensor<double>&,
                                      int64_t, uint64_t*);

}  // namespace ssdm
