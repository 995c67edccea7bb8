#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "blockswap/graph.hpp"
#include "blockswap/network_config.hpp"
#include "blockswap/random.hpp"

namespace blockswap {

struct ForwardResult {
  Var logits;
  std::vector<Var> probes;            // one per block: output of its last conv, before the residual add
  std::vector<Var> attention_points;  // one per stage: the stage output
};

/// An executable pre-activation WideResNet realizing a NetworkConfig.
class Network {
 public:
  Network(const NetworkConfig& config, Rng& rng);

  const NetworkConfig& config() const noexcept { return config_; }
  std::vector<Parameter>& parameters() noexcept { return params_; }
  const std::vector<Parameter>& parameters() const noexcept { return params_; }

  /// Number of weight elements actually allocated.
  std::int64_t parameter_count() const;

  /// Records the forward pass on `graph`. Probes are marked for capture.
  ForwardResult forward(Graph& graph, const Tensor& images);

  void zero_grad();

  /// Parameters owned by block `index` (indices into parameters()).
  const std::vector<std::size_t>& block_parameters(int index) const;
  /// Weight of the conv whose output the block's probe records.
  Parameter& probe_conv_weight(int index);

  Parameter* find(std::string_view name);

 private:
  struct ConvLayer {
    std::size_t weight;
    int stride;
    int padding;
    int groups;
  };
  struct BnLayer {
    std::size_t scale;
    std::size_t shift;
  };
  struct Unit {
    BnLayer bn;
    ConvLayer conv;
  };
  struct Block {
    std::vector<Unit> units;
    std::optional<ConvLayer> shortcut;
    std::vector<std::size_t> params;
  };

  ConvLayer add_conv(const std::string& name, int in, int out, int k, int stride, int groups, Rng& rng,
                     std::vector<std::size_t>* owner);
  BnLayer add_bn(const std::string& name, int channels, std::vector<std::size_t>* owner);
  Var run_conv(Graph& g, Var x, const ConvLayer& c);
  Var run_bn_relu(Graph& g, Var x, const BnLayer& b);

  NetworkConfig config_;
  std::vector<Parameter> params_;
  ConvLayer stem_{};
  std::vector<Block> blocks_;
  BnLayer head_bn_{};
  std::size_t fc_weight_ = 0;
  std::size_t fc_bias_ = 0;
};

/// Channel mean of squared activations, per example: [N,C,H,W] -> [N,H*W].
Tensor attention_map(const Tensor& activations);

}  // namespace blockswap
