#include "blockswap/network.hpp"

#include <stdexcept>

#include "blockswap/ops.hpp"

namespace blockswap {

Network::Network(const NetworkConfig& config, Rng& rng) : config_(config) {
  config_.validate();
  // Parameter storage must not reallocate once graphs hold pointers into it.
  params_.reserve(16 + config_.blocks.size() * 20);

  stem_ = add_conv("stem.conv", 3, kStemChannels, 3, 1, 1, rng, nullptr);
  for (int i = 0; i < config_.num_blocks(); ++i) {
    const BlockDescriptor& d = config_.blocks[static_cast<std::size_t>(i)];
    Block block;
    const std::string prefix = "block" + std::to_string(i) + ".";
    int unit = 0;
    auto push = [&](int in, int out, int k, int stride, int groups) {
      const std::string id = std::to_string(unit++);
      Unit u;
      u.bn = add_bn(prefix + "bn" + id, in, &block.params);
      u.conv = add_conv(prefix + "conv" + id, in, out, k, stride, groups, rng, &block.params);
      block.units.push_back(u);
    };
    switch (d.kind) {
      case BlockKind::kStandard:
        push(d.n_in, d.n_out, 3, d.stride, 1);
        push(d.n_out, d.n_out, 3, 1, 1);
        break;
      case BlockKind::kGrouped:
        push(d.n_in, d.n_out, 3, d.stride, d.groups);
        push(d.n_out, d.n_out, 1, 1, 1);
        push(d.n_out, d.n_out, 3, 1, d.groups);
        push(d.n_out, d.n_out, 1, 1, 1);
        break;
      case BlockKind::kBottleneck:
      case BlockKind::kBottleneckGrouped: {
        const int mid = d.mid_channels();
        push(d.n_in, mid, 1, 1, 1);
        push(mid, mid, 3, d.stride, d.kind == BlockKind::kBottleneck ? 1 : d.groups);
        push(mid, d.n_out, 1, 1, 1);
        break;
      }
    }
    if (d.changes_shape())
      block.shortcut = add_conv(prefix + "shortcut", d.n_in, d.n_out, 1, d.stride, 1, rng, &block.params);
    blocks_.push_back(std::move(block));
  }
  const int last = config_.stage_channels(kNumStages - 1);
  head_bn_ = add_bn("head.bn", last, nullptr);
  fc_weight_ = params_.size();
  params_.emplace_back("head.fc.weight", ParamRole::kLinearWeight,
                       kaiming_init({config_.num_classes, last}, last, rng));
  fc_bias_ = params_.size();
  params_.emplace_back("head.fc.bias", ParamRole::kLinearBias, Tensor({config_.num_classes}));
}

Network::ConvLayer Network::add_conv(const std::string& name, int in, int out, int k, int stride, int groups,
                                     Rng& rng, std::vector<std::size_t>* owner) {
  const std::int64_t fan_in = std::int64_t{in / groups} * k * k;
  if (owner) owner->push_back(params_.size());
  params_.emplace_back(name, ParamRole::kConvWeight, kaiming_init({out, in / groups, k, k}, fan_in, rng));
  return {params_.size() - 1, stride, (k - 1) / 2, groups};
}

Network::BnLayer Network::add_bn(const std::string& name, int channels, std::vector<std::size_t>* owner) {
  BnLayer b{params_.size(), params_.size() + 1};
  params_.emplace_back(name + ".scale", ParamRole::kBnScale, Tensor({channels}, 1.0f));
  params_.emplace_back(name + ".shift", ParamRole::kBnShift, Tensor({channels}, 0.0f));
  if (owner) {
    owner->push_back(b.scale);
    owner->push_back(b.shift);
  }
  return b;
}

std::int64_t Network::parameter_count() const {
  std::int64_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

Var Network::run_conv(Graph& g, Var x, const ConvLayer& c) {
  return conv2d(x, g.parameter(params_[c.weight]), {c.stride, c.padding, c.groups});
}

Var Network::run_bn_relu(Graph& g, Var x, const BnLayer& b) {
  return relu(batch_norm2d(x, g.parameter(params_[b.scale]), g.parameter(params_[b.shift])));
}

ForwardResult Network::forward(Graph& g, const Tensor& images) {
  if (images.rank() != 4 || images.dim(1) != 3)
    throw std::invalid_argument("network input must be N,3,H,W, got " + shape_str(images.shape()));
  ForwardResult r;
  Var x = run_conv(g, g.input(images), stem_);
  const int per_stage = config_.blocks_per_stage();
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    Var h = x;
    Var pre;
    for (std::size_t u = 0; u < b.units.size(); ++u) {
      h = run_bn_relu(g, h, b.units[u].bn);
      if (u == 0) pre = h;
      h = run_conv(g, h, b.units[u].conv);
    }
    g.capture(h);
    r.probes.push_back(h);
    x = add(h, b.shortcut ? run_conv(g, pre, *b.shortcut) : x);
    if ((static_cast<int>(i) + 1) % per_stage == 0) r.attention_points.push_back(x);
  }
  Var pooled = global_avg_pool(run_bn_relu(g, x, head_bn_));
  r.logits = linear(pooled, g.parameter(params_[fc_weight_]), g.parameter(params_[fc_bias_]));
  return r;
}

void Network::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

const std::vector<std::size_t>& Network::block_parameters(int index) const {
  return blocks_.at(static_cast<std::size_t>(index)).params;
}

Parameter& Network::probe_conv_weight(int index) {
  return params_[blocks_.at(static_cast<std::size_t>(index)).units.back().conv.weight];
}

Parameter* Network::find(std::string_view name) {
  for (auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

Tensor attention_map(const Tensor& activations) {
  Graph g;
  return attention_map(g.input(activations)).value();
}

}  // namespace blockswap
