#pragma once

#include <stdexcept>

namespace blockswap {

/// No configuration (or too few) fits under the parameter budget.
class BudgetInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace blockswap
