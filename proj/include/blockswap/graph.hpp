#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "blockswap/tensor.hpp"

namespace blockswap {

enum class ParamRole { kConvWeight, kBnScale, kBnShift, kLinearWeight, kLinearBias };

const char* role_name(ParamRole role);

struct Parameter {
  std::string name;
  ParamRole role = ParamRole::kConvWeight;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, ParamRole r, Tensor v)
      : name(std::move(n)), role(r), value(std::move(v)), grad(Tensor::zeros_like(value)) {}

  void zero_grad() { grad = Tensor::zeros_like(value); }
  bool decays() const noexcept { return role == ParamRole::kConvWeight || role == ParamRole::kLinearWeight; }
};

enum class OpKind {
  kInput,
  kParameter,
  kConv2d,
  kBatchNorm2d,
  kRelu,
  kAdd,
  kGlobalAvgPool,
  kLinear,
  kSoftmaxCrossEntropy,
  kAttentionMap,
  kAttentionDistance,
  kScale,
  kWeightedSum,
};

class Graph;

/// Handle to a node of a Graph. Cheap to copy; only valid while its graph lives.
class Var {
 public:
  Var() = default;

  Graph& graph() const { return *graph_; }
  int id() const noexcept { return id_; }
  bool valid() const noexcept { return graph_ != nullptr; }

  const Tensor& value() const;
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Graph;
  Var(Graph* g, int id) : graph_(g), id_(id) {}
  Graph* graph_ = nullptr;
  int id_ = -1;
};

/// Define-by-run reverse-mode tape. Every op appends a node holding its output
/// and a closure that scatters the output gradient into its inputs' gradients.
///
/// After backward() the gradients of parameters are added into
/// Parameter::grad, and nodes marked with capture() keep both activation and
/// gradient. Everything else is released while the tape unwinds.
class Graph {
 public:
  // Accumulates into the gradients of the inputs (nullptr where an input does
  // not require a gradient).
  using BackwardFn = std::function<void(const Tensor& out_grad, const std::vector<Tensor*>& input_grads)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var input(Tensor value, bool requires_grad = false);
  Var parameter(Parameter& p);
  Var record(OpKind kind, std::vector<Var> inputs, Tensor output, BackwardFn backward);

  void capture(Var v);
  void backward(Var loss);

  const Tensor& value(Var v) const;
  const Tensor& grad(Var v) const;
  bool requires_grad(Var v) const;
  OpKind kind(Var v) const;
  bool backward_done() const noexcept { return backward_done_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  /// Handle to the node recorded `id`-th.
  Var node(int id);

 private:
  struct Node {
    OpKind kind;
    std::vector<int> inputs;
    Tensor value;
    const Tensor* external = nullptr;  // parameter nodes alias the parameter's storage
    Tensor grad;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
    bool captured = false;

    const Tensor& output() const { return external ? *external : value; }
  };

  Node& node(Var v) const;

  std::vector<std::unique_ptr<Node>> nodes_;
  bool backward_done_ = false;
};

}  // namespace blockswap
