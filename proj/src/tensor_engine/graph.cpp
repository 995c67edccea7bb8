#include "blockswap/graph.hpp"

#include <stdexcept>
#include <string>

namespace blockswap {

const char* role_name(ParamRole role) {
  switch (role) {
    case ParamRole::kConvWeight: return "conv_weight";
    case ParamRole::kBnScale: return "bn_scale";
    case ParamRole::kBnShift: return "bn_shift";
    case ParamRole::kLinearWeight: return "linear_weight";
    case ParamRole::kLinearBias: return "linear_bias";
  }
  return "unknown";
}

const Tensor& Var::value() const { return graph_->value(*this); }
const Tensor& Var::grad() const { return graph_->grad(*this); }

Graph::Node& Graph::node(Var v) const {
  if (v.graph_ != this || v.id_ < 0 || v.id_ >= static_cast<int>(nodes_.size()))
    throw std::invalid_argument("variable does not belong to this graph");
  return *nodes_[static_cast<std::size_t>(v.id_)];
}

Var Graph::input(Tensor value, bool requires_grad) {
  auto n = std::make_unique<Node>();
  n->kind = OpKind::kInput;
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  backward_done_ = false;
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::parameter(Parameter& p) {
  auto n = std::make_unique<Node>();
  n->kind = OpKind::kParameter;
  n->external = &p.value;
  n->param = &p;
  n->requires_grad = true;
  nodes_.push_back(std::move(n));
  backward_done_ = false;
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::record(OpKind kind, std::vector<Var> inputs, Tensor output, BackwardFn backward) {
  auto n = std::make_unique<Node>();
  n->kind = kind;
  n->value = std::move(output);
  n->backward = std::move(backward);
  for (const Var& in : inputs) {
    const Node& src = node(in);
    n->inputs.push_back(in.id_);
    n->requires_grad = n->requires_grad || src.requires_grad;
  }
  nodes_.push_back(std::move(n));
  backward_done_ = false;
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Graph::capture(Var v) { node(v).captured = true; }

const Tensor& Graph::value(Var v) const { return node(v).output(); }

const Tensor& Graph::grad(Var v) const {
  const Node& n = node(v);
  if (!backward_done_) throw std::logic_error("gradient requested before backward()");
  if (n.grad.empty() && !n.requires_grad) throw std::logic_error("node does not require a gradient");
  return n.grad;
}

bool Graph::requires_grad(Var v) const { return node(v).requires_grad; }

OpKind Graph::kind(Var v) const { return node(v).kind; }

void Graph::backward(Var loss) {
  if (backward_done_) throw std::logic_error("backward() called twice without a new forward pass");
  Node& root = node(loss);
  if (root.output().numel() != 1)
    throw std::invalid_argument("backward() needs a scalar loss, got shape " + shape_str(root.output().shape()));
  root.captured = true;
  root.grad = Tensor(root.output().shape(), 1.0f);

  std::vector<Tensor*> input_grads;
  for (int id = loss.id_; id >= 0; --id) {
    Node& n = *nodes_[static_cast<std::size_t>(id)];
    if (n.requires_grad && n.grad.empty() && n.captured) n.grad = Tensor::zeros_like(n.output());
    if (!n.requires_grad || n.grad.empty()) {
      if (!n.captured && n.kind != OpKind::kParameter) n.value.release();
      continue;
    }
    if (n.backward) {
      input_grads.clear();
      for (int in : n.inputs) {
        Node& src = *nodes_[static_cast<std::size_t>(in)];
        if (!src.requires_grad) {
          input_grads.push_back(nullptr);
          continue;
        }
        if (src.grad.empty()) src.grad = Tensor::zeros_like(src.output());
        input_grads.push_back(&src.grad);
      }
      n.backward(n.grad, input_grads);
      // The closure may own large saved buffers.
      n.backward = nullptr;
    }
    if (n.param) {
      if (n.param->grad.empty()) n.param->grad = Tensor::zeros_like(n.param->value);
      n.param->grad.add_(n.grad);
    }
    if (!n.captured) {
      n.grad.release();
      if (n.kind != OpKind::kParameter) n.value.release();
    }
  }
  backward_done_ = true;
}

Var Graph::node(int id) {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
    throw std::out_of_range("graph node " + std::to_string(id) + " does not exist");
  return Var(this, id);
}

}  // namespace blockswap
