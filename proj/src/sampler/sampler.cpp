#include "blockswap/sampler.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "blockswap/errors.hpp"
#include "blockswap/random.hpp"

namespace blockswap {
namespace {

struct PositionChoices {
  std::vector<BlockDescriptor> grid;
  std::vector<std::int64_t> cost;
};

std::vector<PositionChoices> enumerate(const NetworkConfig& skeleton) {
  skeleton.validate();
  std::vector<PositionChoices> out;
  for (int i = 0; i < skeleton.num_blocks(); ++i) {
    const BlockSlot s = skeleton.slot(i);
    PositionChoices p;
    p.grid = position_grid(s.n_in, s.n_out, s.stride);
    for (const auto& d : p.grid) p.cost.push_back(block_params(d).total_params());
    out.push_back(std::move(p));
  }
  return out;
}

// Everything outside the blocks: stem, final BN, classifier.
std::int64_t fixed_params(const NetworkConfig& skeleton) {
  std::int64_t blocks = 0;
  for (const auto& d : skeleton.blocks) blocks += block_params(d).total_params();
  return config_params(skeleton) - blocks;
}

}  // namespace

NetworkConfig cheapest_config(const NetworkConfig& skeleton) {
  const auto positions = enumerate(skeleton);
  NetworkConfig c = skeleton;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto& p = positions[i];
    const auto best = std::min_element(p.cost.begin(), p.cost.end()) - p.cost.begin();
    c.blocks[i] = p.grid[static_cast<std::size_t>(best)];
  }
  return c;
}

std::int64_t min_feasible_params(const NetworkConfig& skeleton) { return config_params(cheapest_config(skeleton)); }

std::vector<NetworkConfig> sample_candidates(const NetworkConfig& skeleton, const BudgetSpec& budget,
                                             const RejectionLimits& limits) {
  if (budget.num_samples < 1) throw std::invalid_argument("num_samples must be >= 1");
  const auto positions = enumerate(skeleton);
  const std::int64_t floor = min_feasible_params(skeleton);
  if (budget.max_params < floor)
    throw BudgetInfeasible("budget infeasible or too tight: " + std::to_string(budget.max_params) +
                           " params is below the cheapest configuration (" + std::to_string(floor) + ")");
  const std::int64_t fixed = fixed_params(skeleton);

  std::vector<NetworkConfig> out;
  out.reserve(static_cast<std::size_t>(budget.num_samples));
  std::vector<std::size_t> pick(positions.size());
  std::int64_t window_proposals = 0, window_accepted = 0;
  for (int i = 0; i < budget.num_samples; ++i) {
    Rng rng(derive_seed(budget.master_seed, static_cast<std::uint64_t>(i)));
    while (true) {
      std::int64_t total = fixed;
      for (std::size_t b = 0; b < positions.size(); ++b) {
        std::uniform_int_distribution<std::size_t> u(0, positions[b].grid.size() - 1);
        pick[b] = u(rng);
        total += positions[b].cost[pick[b]];
      }
      const bool accepted = total <= budget.max_params;
      ++window_proposals;
      window_accepted += accepted;
      if (window_proposals == limits.window) {
        if (static_cast<double>(window_accepted) < limits.min_acceptance * static_cast<double>(limits.window))
          throw BudgetInfeasible("budget infeasible or too tight: " + std::to_string(window_accepted) + " of " +
                                 std::to_string(limits.window) + " proposals fit under " +
                                 std::to_string(budget.max_params) + " params");
        window_proposals = window_accepted = 0;
      }
      if (accepted) break;
    }
    NetworkConfig c = skeleton;
    for (std::size_t b = 0; b < positions.size(); ++b) c.blocks[b] = positions[b].grid[pick[b]];
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace blockswap
