#include "blockswap/ops.hpp"

#include <Eigen/Core>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace blockswap {
namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

[[noreturn]] void fail(const std::string& op, const std::string& what) {
  throw std::invalid_argument(op + ": " + what);
}

struct ConvGeometry {
  std::int64_t n, cin, h, w;
  std::int64_t cout, k, stride, pad, groups;
  std::int64_t ho, wo;
  std::int64_t cols() const { return n * ho * wo; }
  std::int64_t rows() const { return cin * k * k; }
};

// Output columns [lo, hi) whose input column ox*stride - pad + kx is in range.
struct ValidRange {
  std::int64_t lo, hi;
};

ValidRange valid_range(std::int64_t extent_in, std::int64_t extent_out, std::int64_t stride, std::int64_t pad,
                       std::int64_t offset) {
  std::int64_t lo = 0;
  while (lo < extent_out && lo * stride - pad + offset < 0) ++lo;
  std::int64_t hi = extent_out;
  while (hi > lo && (hi - 1) * stride - pad + offset >= extent_in) --hi;
  return {lo, hi};
}

// Reusable per-thread scratch; contents are unspecified on return.
float* scratch(std::vector<float>& buf, std::int64_t n) {
  if (static_cast<std::int64_t>(buf.size()) < n) buf.resize(static_cast<std::size_t>(n));
  return buf.data();
}

thread_local std::vector<float> tl_col;
thread_local std::vector<float> tl_mat;

// col[(c*k*k + ky*k + kx), n*Ho*Wo + oy*Wo + ox] = x[n, c, oy*s - p + ky, ox*s - p + kx]
void im2col(const ConvGeometry& g, const float* x, float* col) {
  const std::int64_t plane = g.ho * g.wo;
  const std::int64_t cols = g.cols();
  if (g.k == 1 && g.stride == 1 && g.pad == 0) {
    for (std::int64_t c = 0; c < g.cin; ++c)
      for (std::int64_t n = 0; n < g.n; ++n)
        std::memcpy(col + c * cols + n * plane, x + (n * g.cin + c) * plane, sizeof(float) * plane);
    return;
  }
  for (std::int64_t c = 0; c < g.cin; ++c) {
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      const ValidRange ry = valid_range(g.h, g.ho, g.stride, g.pad, ky);
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        const ValidRange rx = valid_range(g.w, g.wo, g.stride, g.pad, kx);
        float* row = col + ((c * g.k + ky) * g.k + kx) * cols;
        for (std::int64_t n = 0; n < g.n; ++n) {
          const float* src = x + (n * g.cin + c) * g.h * g.w;
          float* out = row + n * plane;
          std::memset(out, 0, sizeof(float) * ry.lo * g.wo);
          std::memset(out + ry.hi * g.wo, 0, sizeof(float) * (g.ho - ry.hi) * g.wo);
          for (std::int64_t oy = ry.lo; oy < ry.hi; ++oy) {
            const float* srow = src + (oy * g.stride - g.pad + ky) * g.w - g.pad + kx;
            float* dst = out + oy * g.wo;
            for (std::int64_t ox = 0; ox < rx.lo; ++ox) dst[ox] = 0.0f;
            if (g.stride == 1) {
              std::memcpy(dst + rx.lo, srow + rx.lo, sizeof(float) * (rx.hi - rx.lo));
            } else {
              for (std::int64_t ox = rx.lo; ox < rx.hi; ++ox) dst[ox] = srow[ox * g.stride];
            }
            for (std::int64_t ox = rx.hi; ox < g.wo; ++ox) dst[ox] = 0.0f;
          }
        }
      }
    }
  }
}

void col2im_add(const ConvGeometry& g, const float* col, float* dx) {
  const std::int64_t plane = g.ho * g.wo;
  const std::int64_t cols = g.cols();
  for (std::int64_t c = 0; c < g.cin; ++c) {
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      const ValidRange ry = valid_range(g.h, g.ho, g.stride, g.pad, ky);
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        const ValidRange rx = valid_range(g.w, g.wo, g.stride, g.pad, kx);
        const float* row = col + ((c * g.k + ky) * g.k + kx) * cols;
        for (std::int64_t n = 0; n < g.n; ++n) {
          float* dst = dx + (n * g.cin + c) * g.h * g.w;
          for (std::int64_t oy = ry.lo; oy < ry.hi; ++oy) {
            const float* src = row + n * plane + oy * g.wo;
            float* drow = dst + (oy * g.stride - g.pad + ky) * g.w - g.pad + kx;
            for (std::int64_t ox = rx.lo; ox < rx.hi; ++ox) drow[ox * g.stride] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

Var conv2d(Var input, Var weight, Conv2dOptions opts) {
  const Tensor& x = input.value();
  const Tensor& w = weight.value();
  if (x.rank() != 4) fail("conv2d", "input must be N,C,H,W, got " + shape_str(x.shape()));
  if (w.rank() != 4) fail("conv2d", "weight must be Cout,Cin/g,k,k, got " + shape_str(w.shape()));
  if (opts.groups < 1 || opts.stride < 1 || opts.padding < 0) fail("conv2d", "invalid stride/padding/groups");
  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), opts.stride, opts.padding,
                 opts.groups, 0, 0};
  if (w.dim(2) != w.dim(3)) fail("conv2d", "kernel must be square, got " + shape_str(w.shape()));
  if (g.cin % g.groups != 0 || g.cout % g.groups != 0)
    fail("conv2d", std::to_string(g.groups) + " groups do not divide channels " + std::to_string(g.cin) + "->" +
                       std::to_string(g.cout));
  if (w.dim(1) != g.cin / g.groups)
    fail("conv2d", "weight " + shape_str(w.shape()) + " does not match input channels " + std::to_string(g.cin) +
                       " with " + std::to_string(g.groups) + " groups");
  g.ho = (g.h + 2 * g.pad - g.k) / g.stride + 1;
  g.wo = (g.w + 2 * g.pad - g.k) / g.stride + 1;
  if (g.ho < 1 || g.wo < 1) fail("conv2d", "kernel larger than padded input");

  const std::int64_t cols = g.cols();
  const std::int64_t kg = g.rows() / g.groups;
  const std::int64_t mg = g.cout / g.groups;
  const std::int64_t plane = g.ho * g.wo;

  float* col = scratch(tl_col, g.rows() * cols);
  im2col(g, x.data(), col);
  float* mat = scratch(tl_mat, g.cout * cols);
  for (std::int64_t gi = 0; gi < g.groups; ++gi) {
    ConstMatMap wg(w.data() + gi * mg * kg, mg, kg);
    ConstMatMap cg(col + gi * kg * cols, kg, cols);
    MatMap og(mat + gi * mg * cols, mg, cols);
    og.noalias() = wg * cg;
  }
  Tensor out({g.n, g.cout, g.ho, g.wo});
  for (std::int64_t co = 0; co < g.cout; ++co)
    for (std::int64_t n = 0; n < g.n; ++n)
      std::memcpy(out.data() + (n * g.cout + co) * plane, mat + co * cols + n * plane, sizeof(float) * plane);

  const Tensor* xp = &x;
  const Tensor* wp = &w;
  auto backward = [g, xp, wp, cols, kg, mg, plane](const Tensor& dy, const std::vector<Tensor*>& grads) {
    float* dmat = scratch(tl_mat, g.cout * cols);
    for (std::int64_t co = 0; co < g.cout; ++co)
      for (std::int64_t n = 0; n < g.n; ++n)
        std::memcpy(dmat + co * cols + n * plane, dy.data() + (n * g.cout + co) * plane, sizeof(float) * plane);
    float* col = scratch(tl_col, g.rows() * cols);
    if (grads[1]) {
      im2col(g, xp->data(), col);
      for (std::int64_t gi = 0; gi < g.groups; ++gi) {
        ConstMatMap dg(dmat + gi * mg * cols, mg, cols);
        ConstMatMap cg(col + gi * kg * cols, kg, cols);
        MatMap dw(grads[1]->data() + gi * mg * kg, mg, kg);
        dw.noalias() += dg * cg.transpose();
      }
    }
    if (grads[0]) {
      for (std::int64_t gi = 0; gi < g.groups; ++gi) {
        ConstMatMap wg(wp->data() + gi * mg * kg, mg, kg);
        ConstMatMap dg(dmat + gi * mg * cols, mg, cols);
        MatMap cg(col + gi * kg * cols, kg, cols);
        cg.noalias() = wg.transpose() * dg;
      }
      col2im_add(g, col, grads[0]->data());
    }
  };
  return input.graph().record(OpKind::kConv2d, {input, weight}, std::move(out), backward);
}

Var batch_norm2d(Var input, Var scale, Var shift, float eps) {
  const Tensor& x = input.value();
  if (x.rank() != 4) fail("batch_norm2d", "input must be N,C,H,W, got " + shape_str(x.shape()));
  const std::int64_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  const std::int64_t count = n * plane;
  if (count < 2) fail("batch_norm2d", "needs at least two values per channel");
  const Tensor& gamma = scale.value();
  const Tensor& beta = shift.value();
  if (gamma.numel() != c || beta.numel() != c)
    fail("batch_norm2d", "scale/shift must have " + std::to_string(c) + " entries");

  Tensor xhat(x.shape());
  Tensor out(x.shape());
  std::vector<float> inv_std(static_cast<std::size_t>(c));
  for (std::int64_t ch = 0; ch < c; ++ch) {
    double sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const float* p = x.data() + (i * c + ch) * plane;
      for (std::int64_t j = 0; j < plane; ++j) sum += p[j];
    }
    const double mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const float* p = x.data() + (i * c + ch) * plane;
      for (std::int64_t j = 0; j < plane; ++j) {
        const double d = p[j] - mean;
        sq += d * d;
      }
    }
    const double var = sq / static_cast<double>(count);
    const double istd = 1.0 / std::sqrt(var + static_cast<double>(eps));
    inv_std[static_cast<std::size_t>(ch)] = static_cast<float>(istd);
    const float gm = gamma[ch], bt = beta[ch];
    for (std::int64_t i = 0; i < n; ++i) {
      const float* p = x.data() + (i * c + ch) * plane;
      float* xh = xhat.data() + (i * c + ch) * plane;
      float* o = out.data() + (i * c + ch) * plane;
      for (std::int64_t j = 0; j < plane; ++j) {
        xh[j] = static_cast<float>((p[j] - mean) * istd);
        o[j] = gm * xh[j] + bt;
      }
    }
  }

  const Tensor* gp = &gamma;
  auto backward = [n, c, plane, count, gp, xhat = std::move(xhat), inv_std = std::move(inv_std)](
                      const Tensor& dy, const std::vector<Tensor*>& grads) {
    for (std::int64_t ch = 0; ch < c; ++ch) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        const float* d = dy.data() + (i * c + ch) * plane;
        const float* xh = xhat.data() + (i * c + ch) * plane;
        for (std::int64_t j = 0; j < plane; ++j) {
          sum_dy += d[j];
          sum_dy_xhat += static_cast<double>(d[j]) * xh[j];
        }
      }
      if (grads[1]) (*grads[1])[ch] += static_cast<float>(sum_dy_xhat);
      if (grads[2]) (*grads[2])[ch] += static_cast<float>(sum_dy);
      if (!grads[0]) continue;
      const double m = static_cast<double>(count);
      const double k = static_cast<double>((*gp)[ch]) * inv_std[static_cast<std::size_t>(ch)] / m;
      for (std::int64_t i = 0; i < n; ++i) {
        const float* d = dy.data() + (i * c + ch) * plane;
        const float* xh = xhat.data() + (i * c + ch) * plane;
        float* dx = grads[0]->data() + (i * c + ch) * plane;
        for (std::int64_t j = 0; j < plane; ++j)
          dx[j] += static_cast<float>(k * (m * d[j] - sum_dy - xh[j] * sum_dy_xhat));
      }
    }
  };
  return input.graph().record(OpKind::kBatchNorm2d, {input, scale, shift}, std::move(out), std::move(backward));
}

Var relu(Var x) {
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::int64_t i = 0; i < in.numel(); ++i) out[i] = in[i] > 0.0f ? in[i] : 0.0f;
  const Tensor* ip = &in;
  return x.graph().record(OpKind::kRelu, {x}, std::move(out), [ip](const Tensor& dy, const std::vector<Tensor*>& g) {
    if (!g[0]) return;
    for (std::int64_t i = 0; i < dy.numel(); ++i)
      if ((*ip)[i] > 0.0f) (*g[0])[i] += dy[i];
  });
}

Var add(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (!av.same_shape(bv)) fail("add", "shape mismatch " + shape_str(av.shape()) + " vs " + shape_str(bv.shape()));
  Tensor out(av.shape());
  for (std::int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] + bv[i];
  return a.graph().record(OpKind::kAdd, {a, b}, std::move(out), [](const Tensor& dy, const std::vector<Tensor*>& g) {
    for (Tensor* t : g)
      if (t) t->add_(dy);
  });
}

Var scale(Var x, double factor) {
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::int64_t i = 0; i < in.numel(); ++i) out[i] = static_cast<float>(in[i] * factor);
  return x.graph().record(OpKind::kScale, {x}, std::move(out),
                          [factor](const Tensor& dy, const std::vector<Tensor*>& g) {
                            if (!g[0]) return;
                            for (std::int64_t i = 0; i < dy.numel(); ++i)
                              (*g[0])[i] += static_cast<float>(dy[i] * factor);
                          });
}

Var global_avg_pool(Var x) {
  const Tensor& in = x.value();
  if (in.rank() != 4) fail("global_avg_pool", "input must be N,C,H,W, got " + shape_str(in.shape()));
  const std::int64_t n = in.dim(0), c = in.dim(1), plane = in.dim(2) * in.dim(3);
  Tensor out({n, c});
  for (std::int64_t i = 0; i < n * c; ++i) {
    double s = 0.0;
    const float* p = in.data() + i * plane;
    for (std::int64_t j = 0; j < plane; ++j) s += p[j];
    out[i] = static_cast<float>(s / static_cast<double>(plane));
  }
  return x.graph().record(OpKind::kGlobalAvgPool, {x}, std::move(out),
                          [n, c, plane](const Tensor& dy, const std::vector<Tensor*>& g) {
                            if (!g[0]) return;
                            const float inv = 1.0f / static_cast<float>(plane);
                            for (std::int64_t i = 0; i < n * c; ++i) {
                              float* d = g[0]->data() + i * plane;
                              for (std::int64_t j = 0; j < plane; ++j) d[j] += dy[i] * inv;
                            }
                          });
}

Var linear(Var x, Var weight, Var bias) {
  const Tensor& in = x.value();
  const Tensor& w = weight.value();
  const Tensor& b = bias.value();
  if (in.rank() != 2 || w.rank() != 2 || in.dim(1) != w.dim(1) || b.numel() != w.dim(0))
    fail("linear", "incompatible shapes x" + shape_str(in.shape()) + " w" + shape_str(w.shape()) + " b" +
                       shape_str(b.shape()));
  const std::int64_t n = in.dim(0), din = in.dim(1), dout = w.dim(0);
  Tensor out({n, dout});
  MatMap om(out.data(), n, dout);
  om.noalias() = ConstMatMap(in.data(), n, din) * ConstMatMap(w.data(), dout, din).transpose();
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < dout; ++j) out[i * dout + j] += b[j];
  const Tensor* xp = &in;
  const Tensor* wp = &w;
  return x.graph().record(
      OpKind::kLinear, {x, weight, bias}, std::move(out),
      [xp, wp, n, din, dout](const Tensor& dy, const std::vector<Tensor*>& g) {
        ConstMatMap dym(dy.data(), n, dout);
        if (g[0]) MatMap(g[0]->data(), n, din).noalias() += dym * ConstMatMap(wp->data(), dout, din);
        if (g[1]) MatMap(g[1]->data(), dout, din).noalias() += dym.transpose() * ConstMatMap(xp->data(), n, din);
        if (g[2]) {
          for (std::int64_t j = 0; j < dout; ++j) {
            double s = 0.0;
            for (std::int64_t i = 0; i < n; ++i) s += dy[i * dout + j];
            (*g[2])[j] += static_cast<float>(s);
          }
        }
      });
}

Var softmax_cross_entropy(Var logits, std::span<const int> labels) {
  const Tensor& z = logits.value();
  if (z.rank() != 2) fail("softmax_cross_entropy", "logits must be N,classes, got " + shape_str(z.shape()));
  const std::int64_t n = z.dim(0), k = z.dim(1);
  if (static_cast<std::int64_t>(labels.size()) != n)
    fail("softmax_cross_entropy", std::to_string(labels.size()) + " labels for " + std::to_string(n) + " rows");
  for (int y : labels)
    if (y < 0 || y >= k) fail("softmax_cross_entropy", "label " + std::to_string(y) + " out of range [0," +
                                                           std::to_string(k) + ")");
  Tensor probs({n, k});
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const float* row = z.data() + i * k;
    double mx = row[0];
    for (std::int64_t j = 1; j < k; ++j) mx = std::max(mx, static_cast<double>(row[j]));
    double se = 0.0;
    for (std::int64_t j = 0; j < k; ++j) se += std::exp(row[j] - mx);
    const double lse = mx + std::log(se);
    for (std::int64_t j = 0; j < k; ++j) probs[i * k + j] = static_cast<float>(std::exp(row[j] - lse));
    total += lse - row[labels[static_cast<std::size_t>(i)]];
  }
  Tensor out = Tensor::scalar(static_cast<float>(total / static_cast<double>(n)));
  std::vector<int> ys(labels.begin(), labels.end());
  return logits.graph().record(
      OpKind::kSoftmaxCrossEntropy, {logits}, std::move(out),
      [n, k, probs = std::move(probs), ys = std::move(ys)](const Tensor& dy, const std::vector<Tensor*>& g) {
        if (!g[0]) return;
        const float s = dy[0] / static_cast<float>(n);
        for (std::int64_t i = 0; i < n; ++i)
          for (std::int64_t j = 0; j < k; ++j) {
            const float target = (ys[static_cast<std::size_t>(i)] == j) ? 1.0f : 0.0f;
            (*g[0])[i * k + j] += s * (probs[i * k + j] - target);
          }
      });
}

Var attention_map(Var x) {
  const Tensor& in = x.value();
  if (in.rank() != 4) fail("attention_map", "input must be N,C,H,W, got " + shape_str(in.shape()));
  const std::int64_t n = in.dim(0), c = in.dim(1), plane = in.dim(2) * in.dim(3);
  Tensor out({n, plane});
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < plane; ++j) {
      double s = 0.0;
      for (std::int64_t ch = 0; ch < c; ++ch) {
        const double v = in.data()[(i * c + ch) * plane + j];
        s += v * v;
      }
      out[i * plane + j] = static_cast<float>(s / static_cast<double>(c));
    }
  }
  const Tensor* ip = &in;
  return x.graph().record(OpKind::kAttentionMap, {x}, std::move(out),
                          [ip, n, c, plane](const Tensor& dy, const std::vector<Tensor*>& g) {
                            if (!g[0]) return;
                            const float f = 2.0f / static_cast<float>(c);
                            for (std::int64_t i = 0; i < n; ++i)
                              for (std::int64_t ch = 0; ch < c; ++ch)
                                for (std::int64_t j = 0; j < plane; ++j) {
                                  const std::int64_t idx = (i * c + ch) * plane + j;
                                  (*g[0])[idx] += f * (*ip)[idx] * dy[i * plane + j];
                                }
                          });
}

Var attention_distance(Var student, const Tensor& teacher) {
  const Tensor& s = student.value();
  if (s.rank() != 2 || !s.same_shape(teacher))
    fail("attention_distance", "student " + shape_str(s.shape()) + " and teacher " + shape_str(teacher.shape()) +
                                   " maps differ in shape");
  const std::int64_t n = s.dim(0), d = s.dim(1);
  // Per example: unit student map u, difference diff = u - v, its norm and ||s||.
  std::vector<double> u(static_cast<std::size_t>(n * d)), diff(static_cast<std::size_t>(n * d));
  std::vector<double> s_norm(static_cast<std::size_t>(n)), dist(static_cast<std::size_t>(n));
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    double ss = 0.0, tt = 0.0;
    for (std::int64_t j = 0; j < d; ++j) {
      ss += static_cast<double>(s[i * d + j]) * s[i * d + j];
      tt += static_cast<double>(teacher[i * d + j]) * teacher[i * d + j];
    }
    if (ss == 0.0 || tt == 0.0)
      throw std::domain_error("attention_distance: zero-norm attention map for example " + std::to_string(i));
    const double sn = std::sqrt(ss), tn = std::sqrt(tt);
    double r2 = 0.0;
    for (std::int64_t j = 0; j < d; ++j) {
      const auto idx = static_cast<std::size_t>(i * d + j);
      u[idx] = s[i * d + j] / sn;
      diff[idx] = u[idx] - teacher[i * d + j] / tn;
      r2 += diff[idx] * diff[idx];
    }
    s_norm[static_cast<std::size_t>(i)] = sn;
    dist[static_cast<std::size_t>(i)] = std::sqrt(r2);
    total += dist[static_cast<std::size_t>(i)];
  }
  Tensor out = Tensor::scalar(static_cast<float>(total / static_cast<double>(n)));
  return student.graph().record(
      OpKind::kAttentionDistance, {student}, std::move(out),
      [n, d, u = std::move(u), diff = std::move(diff), s_norm = std::move(s_norm), dist = std::move(dist)](
          const Tensor& dy, const std::vector<Tensor*>& g) {
        if (!g[0]) return;
        for (std::int64_t i = 0; i < n; ++i) {
          const double r = dist[static_cast<std::size_t>(i)];
          if (r == 0.0) continue;  // minimum of the norm: zero subgradient
          double ud = 0.0;
          for (std::int64_t j = 0; j < d; ++j) {
            const auto idx = static_cast<std::size_t>(i * d + j);
            ud += u[idx] * diff[idx];
          }
          const double f = dy[0] / (static_cast<double>(n) * r * s_norm[static_cast<std::size_t>(i)]);
          for (std::int64_t j = 0; j < d; ++j) {
            const auto idx = static_cast<std::size_t>(i * d + j);
            (*g[0])[i * d + j] += static_cast<float>(f * (diff[idx] - u[idx] * ud));
          }
        }
      });
}

Var weighted_sum(Var x, const Tensor& weights) {
  const Tensor& in = x.value();
  if (in.numel() != weights.numel()) fail("weighted_sum", "weights do not match " + shape_str(in.shape()));
  double s = 0.0;
  for (std::int64_t i = 0; i < in.numel(); ++i) s += static_cast<double>(in[i]) * weights[i];
  Tensor w = weights;
  return x.graph().record(OpKind::kWeightedSum, {x}, Tensor::scalar(static_cast<float>(s)),
                          [w = std::move(w)](const Tensor& dy, const std::vector<Tensor*>& g) {
                            if (!g[0]) return;
                            for (std::int64_t i = 0; i < w.numel(); ++i) (*g[0])[i] += dy[0] * w[i];
                          });
}

std::vector<int> argmax_rows(const Tensor& logits) {
  const std::int64_t n = logits.dim(0), k = logits.dim(1);
  std::vector<int> out(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    int best = 0;
    for (std::int64_t j = 1; j < k; ++j)
      if (logits[i * k + j] > logits[i * k + best]) best = static_cast<int>(j);
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

}  // namespace blockswap
