#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace blockswap {

/// S: two full convs. G(g): grouped conv + pointwise, twice. B(b): 1x1 down to
/// N/b, full conv, 1x1 up. BG(b,g): B(b) with a grouped middle conv.
enum class BlockKind { kStandard, kGrouped, kBottleneck, kBottleneckGrouped };

struct BlockDescriptor {
  BlockKind kind = BlockKind::kStandard;
  int groups = 1;      // G, BG
  int bottleneck = 1;  // B, BG
  int n_in = 0;
  int n_out = 0;
  int stride = 1;
  int kernel = 3;

  static BlockDescriptor standard() { return {}; }
  static BlockDescriptor grouped(int g) { return {BlockKind::kGrouped, g, 1}; }
  static BlockDescriptor bottleneck_block(int b) { return {BlockKind::kBottleneck, 1, b}; }
  static BlockDescriptor bottleneck_grouped(int b, int g) { return {BlockKind::kBottleneckGrouped, g, b}; }

  /// Same block type placed at a skeleton position.
  BlockDescriptor placed(int in, int out, int s) const {
    BlockDescriptor d = *this;
    d.n_in = in;
    d.n_out = out;
    d.stride = s;
    return d;
  }

  /// Channels after the bottleneck (n_out / b), or n_out for S and G.
  int mid_channels() const { return has_bottleneck() ? n_out / bottleneck : n_out; }
  bool has_bottleneck() const { return kind == BlockKind::kBottleneck || kind == BlockKind::kBottleneckGrouped; }
  bool changes_shape() const { return n_in != n_out || stride != 1; }

  bool same_type(const BlockDescriptor& o) const {
    return kind == o.kind && groups == o.groups && bottleneck == o.bottleneck;
  }
  bool operator==(const BlockDescriptor&) const = default;
};

struct CostBreakdown {
  std::int64_t conv_params = 0;
  std::int64_t bn_params = 0;
  std::int64_t shortcut_params = 0;
  std::int64_t macs = 0;

  std::int64_t total_params() const { return conv_params + bn_params + shortcut_params; }
};

// Token grammar: "S" | "G<g>" | "B<b>" | "BG<b>_<g>".
std::string to_token(const BlockDescriptor& d);
BlockDescriptor parse_token(std::string_view token);

/// Empty string when valid, otherwise a description of the violation.
std::string validation_error(const BlockDescriptor& d);
bool is_valid(const BlockDescriptor& d);

/// Closed-form cost of one block (weights + BN affine + 1x1 shortcut when
/// the shape changes). MACs are filled in when input_hw > 0.
CostBreakdown block_cost(const BlockDescriptor& d, int input_hw = 0);
inline CostBreakdown block_params(const BlockDescriptor& d) { return block_cost(d, 0); }

/// Spatial extent after a k x k conv with padding (k-1)/2.
int conv_output_hw(int hw, int kernel, int stride);

/// Admissible block types for an equal-channel block of width n.
std::vector<BlockDescriptor> candidate_grid(int n);

/// candidate_grid(n_out) placed at (n_in -> n_out, stride), invalid entries dropped.
std::vector<BlockDescriptor> position_grid(int n_in, int n_out, int stride);

struct NetworkConfig;

std::int64_t config_params(const NetworkConfig& c);
std::int64_t config_macs(const NetworkConfig& c, int input_hw);

}  // namespace blockswap
