#pragma once

#include <span>

#include "blockswap/graph.hpp"

namespace blockswap {

inline constexpr float kBatchNormEps = 1e-5f;

struct Conv2dOptions {
  int stride = 1;
  int padding = 0;
  int groups = 1;
};

/// Grouped 2-d convolution. weight is [Cout, Cin/groups, k, k]; output group i
/// reads only input group i.
Var conv2d(Var input, Var weight, Conv2dOptions opts);

/// Batch normalization using the statistics of the current minibatch.
Var batch_norm2d(Var input, Var scale, Var shift, float eps = kBatchNormEps);

Var relu(Var x);
Var add(Var a, Var b);
Var scale(Var x, double factor);

/// [N,C,H,W] -> [N,C]
Var global_avg_pool(Var x);

/// x [N,in], weight [out,in], bias [out] -> [N,out]
Var linear(Var x, Var weight, Var bias);

/// Mean over the minibatch of -log softmax(logits)[label].
Var softmax_cross_entropy(Var logits, std::span<const int> labels);

/// Channel mean of squared activations: [N,C,H,W] -> [N,H*W].
Var attention_map(Var x);

/// Minibatch mean of || s/||s|| - t/||t|| ||_2 per example; `teacher` carries
/// no gradient. Throws on a zero-norm map.
Var attention_distance(Var student, const Tensor& teacher);

/// sum_i x_i * w_i, a scalar.
Var weighted_sum(Var x, const Tensor& weights);

// Plain-tensor helpers shared with the scoring code.
std::vector<int> argmax_rows(const Tensor& logits);

}  // namespace blockswap
