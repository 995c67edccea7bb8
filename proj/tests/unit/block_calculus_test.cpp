#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "blockswap/block_calculus.hpp"
#include "blockswap/network.hpp"
#include "blockswap/network_config.hpp"

using namespace blockswap;

namespace {

BlockDescriptor square(BlockDescriptor d, int n) { return d.placed(n, n, 1); }

// Weight elements the instantiated network allocates for block `index`.
std::int64_t instantiated_block_params(const NetworkConfig& c, int index) {
  Rng rng(1);
  Network net(c, rng);
  std::int64_t n = 0;
  for (auto p : net.block_parameters(index)) n += net.parameters()[p].value.numel();
  return n;
}

std::set<int> grouped_counts(const std::vector<BlockDescriptor>& grid, BlockKind kind) {
  std::set<int> out;
  for (const auto& d : grid)
    if (d.kind == kind) out.insert(d.groups);
  return out;
}

}  // namespace

TEST(BlockParams, EqualChannelExamples) {
  EXPECT_EQ(block_params(square(BlockDescriptor::standard(), 16)).conv_params, 4608);
  EXPECT_EQ(block_params(square(BlockDescriptor::grouped(4), 16)).conv_params, 1664);
  EXPECT_EQ(block_params(square(BlockDescriptor::bottleneck_block(2), 16)).conv_params, 832);
  // 16->8 pointwise, 8->8 conv in 2 groups (8 * 4 * 9), 8->16 pointwise.
  EXPECT_EQ(block_params(square(BlockDescriptor::bottleneck_grouped(2, 2), 16)).conv_params, 128 + 288 + 128);
  EXPECT_EQ(block_params(square(BlockDescriptor::bottleneck_grouped(2, 4), 16)).conv_params, 128 + 144 + 128);
}

TEST(BlockParams, MatchesClosedFormsForEqualChannels) {
  // Closed forms for N in = N out, k = 3, written out independently.
  for (int n : {16, 32, 64, 128}) {
    const double N = n, k2 = 9;
    for (const auto& d : candidate_grid(n)) {
      const auto c = block_params(d);
      const double g = d.groups, b = d.bottleneck;
      double conv = 0, bn = 0;
      switch (d.kind) {
        case BlockKind::kStandard: conv = 2 * N * N * k2, bn = 4 * N; break;
        case BlockKind::kGrouped: conv = 2 * (N * N * k2 / g + N * N), bn = 8 * N; break;
        case BlockKind::kBottleneck: conv = N * N * (k2 / (b * b) + 2 / b), bn = N * (2 + 4 / b); break;
        case BlockKind::kBottleneckGrouped: conv = N * N * (k2 / (g * b * b) + 2 / b), bn = N * (2 + 4 / b); break;
      }
      EXPECT_EQ(c.conv_params, static_cast<std::int64_t>(conv)) << to_token(d) << " N=" << n;
      EXPECT_EQ(c.bn_params, static_cast<std::int64_t>(bn)) << to_token(d) << " N=" << n;
      EXPECT_EQ(c.shortcut_params, 0);
    }
  }
}

TEST(BlockParams, ShapeChangingBlockAddsShortcut) {
  const auto d = BlockDescriptor::standard().placed(16, 32, 2);
  const auto c = block_params(d);
  EXPECT_EQ(c.conv_params, 32 * 16 * 9 + 32 * 32 * 9);
  EXPECT_EQ(c.bn_params, 2 * 16 + 2 * 32);
  EXPECT_EQ(c.shortcut_params, 16 * 32);
  EXPECT_EQ(c.total_params(), c.conv_params + c.bn_params + c.shortcut_params);
}

TEST(BlockParams, EqualsInstantiatedCountOverWholeGrid) {
  // WRN-16-2 has an entry and a non-entry block in each stage, at the same
  // channel widths as WRN-40-2.
  const NetworkConfig base = NetworkConfig::skeleton(16, 2, 10);
  for (int i = 0; i < base.num_blocks(); ++i) {
    const BlockSlot s = base.slot(i);
    const auto grid = position_grid(s.n_in, s.n_out, s.stride);
    ASSERT_FALSE(grid.empty());
    for (const auto& d : grid) {
      const NetworkConfig c = base.with_block(i, d);
      EXPECT_EQ(block_params(c.blocks[static_cast<std::size_t>(i)]).total_params(), instantiated_block_params(c, i))
          << "block " << i << " " << to_token(d);
    }
  }
}

TEST(BlockParams, RejectsNonDividingGroups) {
  EXPECT_THROW(block_params(square(BlockDescriptor::grouped(3), 16)), std::invalid_argument);
  EXPECT_THROW(block_params(BlockDescriptor::grouped(32).placed(16, 32, 2)), std::invalid_argument);
  EXPECT_THROW(block_params(square(BlockDescriptor::bottleneck_grouped(2, 16), 16)), std::invalid_argument);
  EXPECT_THROW(block_params(square(BlockDescriptor::bottleneck_block(3), 16)), std::invalid_argument);
  EXPECT_THROW(block_params(square(BlockDescriptor::bottleneck_grouped(4, 2), 16)), std::invalid_argument);
}

TEST(BlockParams, Monotonicity) {
  for (int n : {32, 64, 128}) {
    const auto grid = candidate_grid(n);
    std::int64_t prev = -1;
    const auto b2 = block_params(square(BlockDescriptor::bottleneck_block(2), n)).conv_params;
    for (const auto& d : grid) {
      if (d.kind == BlockKind::kGrouped) {
        const auto p = block_params(d).conv_params;
        if (prev >= 0) {
          EXPECT_LT(p, prev) << to_token(d);
        }
        prev = p;
      }
      if (d.kind == BlockKind::kBottleneckGrouped) {
        EXPECT_LE(block_params(d).conv_params, b2) << to_token(d);
      }
    }
  }
}

TEST(CandidateGrid, GroupSets) {
  EXPECT_EQ(grouped_counts(candidate_grid(32), BlockKind::kGrouped), (std::set<int>{2, 4, 8, 16, 32}));
  EXPECT_EQ(grouped_counts(candidate_grid(128), BlockKind::kGrouped), (std::set<int>{2, 4, 8, 16, 32, 64, 128}));
  // BG draws from the bottleneck width M = N/2.
  EXPECT_EQ(grouped_counts(candidate_grid(128), BlockKind::kBottleneckGrouped),
            (std::set<int>{2, 4, 8, 16, 32, 64}));
  EXPECT_EQ(grouped_counts(candidate_grid(16), BlockKind::kGrouped), (std::set<int>{1, 2, 4, 8, 16}));
}

TEST(CandidateGrid, ValidUniqueAndContainsStandard) {
  for (int n : {16, 32, 48, 64, 128, 256}) {
    const auto grid = candidate_grid(n);
    EXPECT_EQ(grid.front().kind, BlockKind::kStandard);
    std::set<std::string> tokens;
    for (const auto& d : grid) {
      EXPECT_TRUE(is_valid(d)) << to_token(d);
      if (d.kind == BlockKind::kGrouped) {
        EXPECT_EQ(n % d.groups, 0);
      }
      if (d.kind == BlockKind::kBottleneckGrouped) {
        EXPECT_EQ((n / 2) % d.groups, 0);
      }
      EXPECT_TRUE(tokens.insert(to_token(d)).second) << "duplicate " << to_token(d);
    }
    EXPECT_TRUE(tokens.count("B2") && tokens.count("B4"));
  }
}

TEST(CandidateGrid, PositionGridDropsInvalidEntries) {
  // Entry of stage 2 in WRN-w1: 16 -> 32 channels. G32 cannot split 16 inputs.
  const auto grid = position_grid(16, 32, 2);
  for (const auto& d : grid) {
    EXPECT_TRUE(is_valid(d));
    EXPECT_EQ(d.n_in, 16);
    EXPECT_EQ(d.stride, 2);
  }
  EXPECT_FALSE(grouped_counts(grid, BlockKind::kGrouped).count(32));
  EXPECT_TRUE(grouped_counts(grid, BlockKind::kGrouped).count(16));
}

TEST(Tokens, RoundTrip) {
  for (int n : {16, 32, 64, 128})
    for (const auto& d : candidate_grid(n)) {
      const auto back = parse_token(to_token(d));
      EXPECT_TRUE(back.same_type(d)) << to_token(d);
    }
  EXPECT_EQ(to_token(BlockDescriptor::bottleneck_grouped(2, 8)), "BG2_8");
}

TEST(Tokens, RejectsMalformed) {
  for (const char* bad : {"", "s", "G", "G0", "G-2", "G4 ", " S", "BG2", "BG2_", "BG_4", "B2x", "X4", "G4,S"})
    EXPECT_THROW(parse_token(bad), std::invalid_argument) << "'" << bad << "'";
}

TEST(ConfigParams, MatchesPublishedTotals) {
  EXPECT_NEAR(config_params(NetworkConfig::skeleton(40, 2, 10)) / 1000.0, 2243.5, 0.05);
  EXPECT_NEAR(config_params(NetworkConfig::skeleton(16, 2, 10)) / 1000.0, 691.7, 0.05);
  EXPECT_NEAR(config_params(NetworkConfig::skeleton(40, 1, 10)) / 1000.0, 563.9, 0.05);
  EXPECT_NEAR(config_params(NetworkConfig::skeleton(16, 1, 10)) / 1000.0, 175.1, 0.05);
}

TEST(ConfigMacs, Arithmetic) {
  // Two 3x3 16->16 convs at 32x32.
  EXPECT_EQ(block_cost(square(BlockDescriptor::standard(), 16), 32).macs, 2 * 2359296);
  // G16 at N=16: two depthwise 3x3 convs and two 16->16 pointwise convs.
  EXPECT_EQ(block_cost(square(BlockDescriptor::grouped(16), 16), 32).macs, 2 * 16 * 9 * 1024 + 2 * 262144);
  // B2 entering a stride-2 stage: the reducing 1x1 runs at the input size.
  const auto b = BlockDescriptor::bottleneck_block(2).placed(16, 32, 2);
  EXPECT_EQ(block_cost(b, 32).macs, 16 * 16 * 1024 + (16 * 16 * 9 + 16 * 32) * 256 + 16 * 32 * 256);
}

TEST(ConfigMacs, WithinBandOfPublishedWrn40x2) {
  const double m = static_cast<double>(config_macs(NetworkConfig::skeleton(40, 2, 10), 32)) / 1e6;
  EXPECT_NEAR(m, 328.3, 32.83);
  EXPECT_THROW(config_macs(NetworkConfig::skeleton(40, 2, 10), 4), std::invalid_argument);
}

TEST(ConfigMacs, ScalesWithResolution) {
  const auto c = NetworkConfig::skeleton(16, 1, 10);
  const auto m16 = config_macs(c, 16), m32 = config_macs(c, 32);
  EXPECT_GT(m32, 3 * m16);
  EXPECT_LT(m32, 5 * m16);
}
