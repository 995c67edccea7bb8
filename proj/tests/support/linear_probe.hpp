#pragma once

// Multinomial logistic regression on raw pixels, trained by plain SGD in
// double precision. Independent of the engine; used as a learnability oracle.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "blockswap/data_io.hpp"

namespace blockswap::testing {

class LinearProbe {
 public:
  LinearProbe(int features, int classes) : f_(features), k_(classes), w_(static_cast<std::size_t>(features * classes)), b_(static_cast<std::size_t>(classes)) {}

  void fit(const Dataset& d, int epochs, double lr, std::uint64_t seed) {
    std::vector<std::size_t> order(static_cast<std::size_t>(d.size()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::vector<double> p(static_cast<std::size_t>(k_));
    for (int e = 0; e < epochs; ++e) {
      std::shuffle(order.begin(), order.end(), rng);
      const double step = lr / (1.0 + e);
      for (auto i : order) {
        const float* x = d.images.data() + static_cast<std::int64_t>(i) * f_;
        probabilities(x, p);
        p[static_cast<std::size_t>(d.labels[i])] -= 1.0;
        for (int c = 0; c < k_; ++c) {
          const double gc = step * p[static_cast<std::size_t>(c)];
          double* wc = w_.data() + static_cast<std::size_t>(c * f_);
          for (int j = 0; j < f_; ++j) wc[j] -= gc * x[j];
          b_[static_cast<std::size_t>(c)] -= gc;
        }
      }
    }
  }

  double accuracy(const Dataset& d) const {
    std::vector<double> p(static_cast<std::size_t>(k_));
    std::int64_t correct = 0;
    for (std::int64_t i = 0; i < d.size(); ++i) {
      probabilities(d.images.data() + i * f_, p);
      const auto best = std::max_element(p.begin(), p.end()) - p.begin();
      correct += best == d.labels[static_cast<std::size_t>(i)];
    }
    return static_cast<double>(correct) / static_cast<double>(d.size());
  }

 private:
  void probabilities(const float* x, std::vector<double>& p) const {
    double top = -1e300;
    for (int c = 0; c < k_; ++c) {
      double s = b_[static_cast<std::size_t>(c)];
      const double* wc = w_.data() + static_cast<std::size_t>(c * f_);
      for (int j = 0; j < f_; ++j) s += wc[j] * x[j];
      p[static_cast<std::size_t>(c)] = s;
      top = std::max(top, s);
    }
    double z = 0;
    for (auto& v : p) z += (v = std::exp(v - top));
    for (auto& v : p) v /= z;
  }

  int f_, k_;
  std::vector<double> w_, b_;
};

}  // namespace blockswap::testing
