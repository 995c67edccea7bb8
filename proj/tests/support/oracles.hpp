#pragma once

// Test-only reference implementations. Nothing here may call into the code
// paths they are used to check.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "blockswap/graph.hpp"
#include "blockswap/ops.hpp"
#include "blockswap/tensor.hpp"

namespace blockswap::testing {

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  std::uniform_real_distribution<double> d(lo, hi);
  for (auto& v : t.storage()) v = static_cast<float>(d(rng));
  return t;
}

/// Direct 6-nested-loop grouped convolution in double precision.
inline std::vector<double> naive_conv2d(const Tensor& x, const Tensor& w, int stride, int pad, int groups) {
  const auto n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const auto cout = w.dim(0), k = w.dim(2);
  const auto ho = (h + 2 * pad - k) / stride + 1, wo = (wd + 2 * pad - k) / stride + 1;
  const auto cin_g = cin / groups, cout_g = cout / groups;
  std::vector<double> out(static_cast<std::size_t>(n * cout * ho * wo), 0.0);
  for (std::int64_t b = 0; b < n; ++b)
    for (std::int64_t co = 0; co < cout; ++co)
      for (std::int64_t oy = 0; oy < ho; ++oy)
        for (std::int64_t ox = 0; ox < wo; ++ox) {
          double s = 0.0;
          const auto grp = co / cout_g;
          for (std::int64_t ci = 0; ci < cin_g; ++ci)
            for (std::int64_t ky = 0; ky < k; ++ky)
              for (std::int64_t kx = 0; kx < k; ++kx) {
                const auto iy = oy * stride - pad + ky, ix = ox * stride - pad + kx;
                if (iy < 0 || iy >= h || ix < 0 || ix >= wd) continue;
                s += static_cast<double>(x.at(b, grp * cin_g + ci, iy, ix)) * w.at(co, ci, ky, kx);
              }
          out[static_cast<std::size_t>(((b * cout + co) * ho + oy) * wo + ox)] = s;
        }
  return out;
}

/// Two-pass batch-statistics normalization in double precision.
inline std::vector<double> naive_batch_norm(const Tensor& x, const std::vector<double>& scale,
                                            const std::vector<double>& shift, double eps) {
  const auto n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  std::vector<double> out(static_cast<std::size_t>(x.numel()));
  for (std::int64_t ch = 0; ch < c; ++ch) {
    double mean = 0.0;
    for (std::int64_t b = 0; b < n; ++b)
      for (std::int64_t j = 0; j < plane; ++j) mean += x[(b * c + ch) * plane + j];
    mean /= static_cast<double>(n * plane);
    double var = 0.0;
    for (std::int64_t b = 0; b < n; ++b)
      for (std::int64_t j = 0; j < plane; ++j) var += std::pow(x[(b * c + ch) * plane + j] - mean, 2);
    var /= static_cast<double>(n * plane);
    for (std::int64_t b = 0; b < n; ++b)
      for (std::int64_t j = 0; j < plane; ++j) {
        const auto idx = (b * c + ch) * plane + j;
        out[static_cast<std::size_t>(idx)] =
            scale[static_cast<std::size_t>(ch)] * (x[idx] - mean) / std::sqrt(var + eps) +
            shift[static_cast<std::size_t>(ch)];
      }
  }
  return out;
}

/// Builds a function of some input tensors on a fresh graph.
using GraphFn = std::function<Var(Graph&, const std::vector<Var>&)>;

struct GradientCheckResult {
  double error = 0.0;        // largest normalized |analytic - numeric|
  std::int64_t checked = 0;  // elements compared
  std::int64_t skipped = 0;  // elements whose perturbation crossed a relu kink
};

/// Central finite differences against the analytic gradient of
/// L = sum_i w_i * f(inputs)_i for fixed random weights w in [-1, 1]. The error is the
/// largest |analytic - numeric| over every input element, divided by the
/// largest analytic gradient magnitude of that input. Elements whose +/- step
/// flips the on/off pattern of any relu are not differentiable there and are
/// skipped.
inline GradientCheckResult gradient_check_detail(std::vector<Tensor> inputs, const GraphFn& f, std::mt19937_64& rng,
                                                 double step = 1e-3) {
  Tensor weights;
  std::vector<Tensor> analytic;
  {
    Graph g;
    std::vector<Var> vars;
    for (auto& t : inputs) {
      vars.push_back(g.input(t, true));
      g.capture(vars.back());
    }
    Var out = f(g, vars);
    weights = random_tensor(out.shape(), rng, -1.0, 1.0);
    g.backward(weighted_sum(out, weights));
    for (auto& v : vars) analytic.push_back(v.grad());
  }
  auto objective = [&](const std::vector<Tensor>& in, std::vector<bool>& pattern) {
    Graph g;
    std::vector<Var> vars;
    for (const auto& t : in) vars.push_back(g.input(t));
    const Tensor& y = f(g, vars).value();
    double s = 0.0;
    for (std::int64_t i = 0; i < y.numel(); ++i) s += static_cast<double>(y[i]) * weights[i];
    pattern.clear();
    for (int id = 0; id < static_cast<int>(g.size()); ++id) {
      Var v = g.node(id);
      if (g.kind(v) != OpKind::kRelu) continue;
      for (auto a : v.value().storage()) pattern.push_back(a > 0.0f);
    }
    return s;
  };
  GradientCheckResult r;
  std::vector<bool> p_up, p_down;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    double scale = 0.0;
    for (auto v : analytic[t].storage()) scale = std::max(scale, std::abs(static_cast<double>(v)));
    if (scale == 0.0) scale = 1.0;
    for (std::int64_t i = 0; i < inputs[t].numel(); ++i) {
      const float orig = inputs[t][i];
      inputs[t][i] = static_cast<float>(orig + step);
      const double up = objective(inputs, p_up);
      inputs[t][i] = static_cast<float>(orig - step);
      const double down = objective(inputs, p_down);
      inputs[t][i] = orig;
      if (p_up != p_down) {
        ++r.skipped;
        continue;
      }
      // Use the step actually representable in float.
      const double h = static_cast<double>(static_cast<float>(orig + step)) -
                       static_cast<double>(static_cast<float>(orig - step));
      const double numeric = (up - down) / h;
      r.error = std::max(r.error, std::abs(numeric - analytic[t][i]) / scale);
      ++r.checked;
    }
  }
  return r;
}

inline double gradient_check(std::vector<Tensor> inputs, const GraphFn& f, std::mt19937_64& rng,
                             double step = 1e-3) {
  return gradient_check_detail(std::move(inputs), f, rng, step).error;
}

}  // namespace blockswap::testing
