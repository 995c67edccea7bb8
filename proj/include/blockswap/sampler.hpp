#pragma once

#include <cstdint>
#include <vector>

#include "blockswap/network_config.hpp"

namespace blockswap {

struct BudgetSpec {
  std::int64_t max_params = 0;
  int num_samples = 1000;
  std::uint64_t master_seed = 0;
};

/// Give up when fewer than `min_acceptance` of the proposals in a window of
/// `window` proposals land under budget.
struct RejectionLimits {
  std::int64_t window = 1'000'000;
  double min_acceptance = 1e-4;
};

/// Draws `num_samples` configs, each block uniform over its position grid,
/// redrawing whole proposals that exceed the budget. Candidate i uses its own
/// stream seeded by derive_seed(master_seed, i). Throws BudgetInfeasible.
std::vector<NetworkConfig> sample_candidates(const NetworkConfig& skeleton, const BudgetSpec& budget,
                                             const RejectionLimits& limits = {});

/// The config taking the cheapest grid entry at every position.
NetworkConfig cheapest_config(const NetworkConfig& skeleton);
std::int64_t min_feasible_params(const NetworkConfig& skeleton);

}  // namespace blockswap
