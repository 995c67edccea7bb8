#include "blockswap/block_calculus.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <stdexcept>

#include "blockswap/network_config.hpp"

namespace blockswap {
namespace {

int parse_positive(std::string_view digits, std::string_view token) {
  int value = 0;
  const auto* end = digits.data() + digits.size();
  auto [ptr, ec] = std::from_chars(digits.data(), end, value);
  if (digits.empty() || ec != std::errc() || ptr != end || value < 1)
    throw std::invalid_argument("malformed block token '" + std::string(token) + "'");
  return value;
}

bool divides(int d, int n) { return d >= 1 && n % d == 0; }

// {2,4,8,16} plus {n/16, n/8, n/4, n/2, n}, keeping integral divisors of n.
std::vector<int> group_choices(int n) {
  std::set<int> out;
  for (int g : {2, 4, 8, 16})
    if (divides(g, n)) out.insert(g);
  for (int den : {16, 8, 4, 2, 1})
    if (n % den == 0 && n / den >= 1) out.insert(n / den);
  return {out.begin(), out.end()};
}

}  // namespace

std::string to_token(const BlockDescriptor& d) {
  switch (d.kind) {
    case BlockKind::kStandard: return "S";
    case BlockKind::kGrouped: return "G" + std::to_string(d.groups);
    case BlockKind::kBottleneck: return "B" + std::to_string(d.bottleneck);
    case BlockKind::kBottleneckGrouped:
      return "BG" + std::to_string(d.bottleneck) + "_" + std::to_string(d.groups);
  }
  return "?";
}

BlockDescriptor parse_token(std::string_view token) {
  if (token == "S") return BlockDescriptor::standard();
  if (token.starts_with("BG")) {
    const auto sep = token.find('_');
    if (sep == std::string_view::npos) throw std::invalid_argument("malformed block token '" + std::string(token) + "'");
    return BlockDescriptor::bottleneck_grouped(parse_positive(token.substr(2, sep - 2), token),
                                               parse_positive(token.substr(sep + 1), token));
  }
  if (token.starts_with("G")) return BlockDescriptor::grouped(parse_positive(token.substr(1), token));
  if (token.starts_with("B")) return BlockDescriptor::bottleneck_block(parse_positive(token.substr(1), token));
  throw std::invalid_argument("unknown block token '" + std::string(token) + "'");
}

std::string validation_error(const BlockDescriptor& d) {
  const std::string name = to_token(d);
  if (d.n_in < 1 || d.n_out < 1) return name + ": channel counts must be >= 1";
  if (d.stride != 1 && d.stride != 2) return name + ": stride must be 1 or 2";
  if (d.kernel != 3) return name + ": main kernel must be 3";
  switch (d.kind) {
    case BlockKind::kStandard:
      if (d.groups != 1 || d.bottleneck != 1) return name + ": S takes no group/bottleneck";
      break;
    case BlockKind::kGrouped:
      if (d.bottleneck != 1) return name + ": G takes no bottleneck";
      if (!divides(d.groups, d.n_in) || !divides(d.groups, d.n_out))
        return name + ": " + std::to_string(d.groups) + " groups do not divide " + std::to_string(d.n_in) + "->" +
               std::to_string(d.n_out) + " channels";
      break;
    case BlockKind::kBottleneck:
      if (d.groups != 1) return name + ": B takes no groups";
      if (d.bottleneck != 2 && d.bottleneck != 4) return name + ": bottleneck must be 2 or 4";
      if (!divides(d.bottleneck, d.n_out)) return name + ": bottleneck does not divide " + std::to_string(d.n_out);
      break;
    case BlockKind::kBottleneckGrouped:
      if (d.bottleneck != 2) return name + ": BG bottleneck must be 2";
      if (!divides(d.bottleneck, d.n_out)) return name + ": bottleneck does not divide " + std::to_string(d.n_out);
      if (!divides(d.groups, d.mid_channels()))
        return name + ": " + std::to_string(d.groups) + " groups do not divide " +
               std::to_string(d.mid_channels()) + " bottleneck channels";
      break;
  }
  return {};
}

bool is_valid(const BlockDescriptor& d) { return validation_error(d).empty(); }

int conv_output_hw(int hw, int kernel, int stride) { return (hw + 2 * ((kernel - 1) / 2) - kernel) / stride + 1; }

CostBreakdown block_cost(const BlockDescriptor& d, int input_hw) {
  if (auto err = validation_error(d); !err.empty()) throw std::invalid_argument(err);
  const std::int64_t in = d.n_in, out = d.n_out, k2 = std::int64_t{d.kernel} * d.kernel;
  const std::int64_t g = d.groups, mid = d.mid_channels();
  const std::int64_t hw_in = std::int64_t{input_hw} * input_hw;
  const std::int64_t hw_out = input_hw > 0 ? std::int64_t{conv_output_hw(input_hw, d.kernel, d.stride)} *
                                                 conv_output_hw(input_hw, d.kernel, d.stride)
                                           : 0;
  CostBreakdown c;
  switch (d.kind) {
    case BlockKind::kStandard:
      c.conv_params = out * in * k2 + out * out * k2;
      c.bn_params = 2 * in + 2 * out;
      c.macs = c.conv_params * hw_out;
      break;
    case BlockKind::kGrouped:
      c.conv_params = out * (in / g) * k2 + out * out + out * (out / g) * k2 + out * out;
      c.bn_params = 2 * in + 6 * out;
      c.macs = c.conv_params * hw_out;
      break;
    case BlockKind::kBottleneck:
    case BlockKind::kBottleneckGrouped: {
      const std::int64_t mid_conv = mid * (mid / g) * k2;
      c.conv_params = in * mid + mid_conv + mid * out;
      c.bn_params = 2 * in + 4 * mid;
      // The reducing 1x1 runs at the input resolution; the stride sits on the middle conv.
      c.macs = in * mid * hw_in + (mid_conv + mid * out) * hw_out;
      break;
    }
  }
  if (d.changes_shape()) {
    c.shortcut_params = in * out;
    c.macs += in * out * hw_out;
  }
  return c;
}

std::vector<BlockDescriptor> candidate_grid(int n) {
  std::vector<BlockDescriptor> grid;
  auto keep = [&](BlockDescriptor d) {
    d = d.placed(n, n, 1);
    if (is_valid(d) && std::none_of(grid.begin(), grid.end(), [&](const auto& e) { return e.same_type(d); }))
      grid.push_back(d);
  };
  keep(BlockDescriptor::standard());
  for (int b : {2, 4}) keep(BlockDescriptor::bottleneck_block(b));
  for (int g : group_choices(n)) keep(BlockDescriptor::grouped(g));
  if (n % 2 == 0)
    for (int g : group_choices(n / 2)) keep(BlockDescriptor::bottleneck_grouped(2, g));
  return grid;
}

std::vector<BlockDescriptor> position_grid(int n_in, int n_out, int stride) {
  std::vector<BlockDescriptor> out;
  for (const auto& d : candidate_grid(n_out)) {
    auto placed = d.placed(n_in, n_out, stride);
    if (is_valid(placed)) out.push_back(placed);
  }
  return out;
}

std::int64_t config_params(const NetworkConfig& c) {
  c.validate();
  const std::int64_t last = c.stage_channels(kNumStages - 1);
  std::int64_t total = 3LL * kStemChannels * 9;
  for (const auto& d : c.blocks) total += block_cost(d).total_params();
  total += 2 * last;                        // final BN
  total += last * c.num_classes + c.num_classes;  // classifier
  return total;
}

std::int64_t config_macs(const NetworkConfig& c, int input_hw) {
  if (input_hw < 8) throw std::invalid_argument("config_macs: input size must be >= 8");
  c.validate();
  std::int64_t total = 3LL * kStemChannels * 9 * input_hw * input_hw;
  int hw = input_hw;
  for (const auto& d : c.blocks) {
    total += block_cost(d, hw).macs;
    hw = conv_output_hw(hw, d.kernel, d.stride);
  }
  total += std::int64_t{c.stage_channels(kNumStages - 1)} * c.num_classes;
  return total;
}

}  // namespace blockswap
