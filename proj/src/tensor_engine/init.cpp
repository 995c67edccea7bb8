#include <cmath>
#include <stdexcept>

#include "blockswap/random.hpp"

namespace blockswap {

Tensor kaiming_init(const Shape& shape, std::int64_t fan_in, Rng& rng) {
  if (fan_in < 1) throw std::invalid_argument("kaiming_init: fan_in must be >= 1");
  Tensor t(shape);
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (auto& v : t.storage()) v = static_cast<float>(dist(rng));
  return t;
}

}  // namespace blockswap
