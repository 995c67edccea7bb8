#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "blockswap/block_calculus.hpp"

namespace blockswap {

inline constexpr int kStemChannels = 16;
inline constexpr int kNumStages = 3;

/// Channel context of one block position in a WideResNet skeleton.
struct BlockSlot {
  int stage = 0;
  int n_in = 0;
  int n_out = 0;
  int stride = 1;
};

/// WRN-depth-width skeleton plus one descriptor per block position.
struct NetworkConfig {
  int depth = 40;
  int width = 2;
  int num_classes = 10;
  std::vector<BlockDescriptor> blocks;

  /// All-S configuration of WRN-depth-width.
  static NetworkConfig skeleton(int depth, int width, int num_classes);
  /// Skeleton with block types taken from a comma-separated token string.
  static NetworkConfig parse(int depth, int width, int num_classes, std::string_view tokens);

  int num_blocks() const { return blocks_for_depth(depth); }
  int blocks_per_stage() const { return num_blocks() / kNumStages; }
  int stage_channels(int stage) const { return (16 << stage) * width; }
  BlockSlot slot(int index) const;

  /// Copy with block `index` replaced by `type` (placed at that position).
  NetworkConfig with_block(int index, const BlockDescriptor& type) const;

  std::string to_string() const;
  /// Throws std::invalid_argument naming the first offending block.
  void validate() const;

  static int blocks_for_depth(int depth);
  bool operator==(const NetworkConfig&) const = default;
};

}  // namespace blockswap
