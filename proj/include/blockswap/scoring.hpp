#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blockswap/data_io.hpp"
#include "blockswap/distill.hpp"
#include "blockswap/network.hpp"

namespace blockswap {

/// (1 / 2N) sum_n (sum_ij a_nij g_nij)^2 for one channel; a and g are [N,H,W].
double fisher_delta_c(const Tensor& a, const Tensor& g);
/// Delta_c for every channel of [N,C,H,W] activations and gradients.
std::vector<double> fisher_delta_channels(const Tensor& a, const Tensor& g);

struct FisherProbeReading {
  int block = 0;
  std::vector<double> delta_c;
  double delta_b = 0.0;
};

struct FisherReading {
  double potential = 0.0;
  std::vector<FisherProbeReading> blocks;
};

/// Reads Delta_b from probes whose graph has been backpropagated. Throws
/// std::logic_error when a block has no probe or a probe has no gradient.
FisherReading read_probes(const std::vector<Var>& probes, int num_blocks);

/// One forward pass and one cross-entropy backward pass on `batch`. Parameter
/// values are left untouched and gradients are cleared afterwards.
FisherReading fisher_potential(Network& net, const Batch& batch);

enum class Metric { kFisher, kGradNorm, kL2, kAccuracy };
std::string metric_name(Metric m);
Metric parse_metric(const std::string& name);
inline const std::vector<Metric>& all_metrics() {
  static const std::vector<Metric> kAll{Metric::kFisher, Metric::kGradNorm, Metric::kL2, Metric::kAccuracy};
  return kAll;
}

/// Metric values after m training steps for each requested m.
struct MetricSeries {
  std::vector<int> steps;
  std::vector<double> fisher;     // Fisher potential summed over the first m steps
  std::vector<double> grad_norm;  // sum of |dL/dw| over parameters, summed over the first m steps
  std::vector<double> l2;         // sum over parameter tensors of ||w||_2 after m updates
  std::vector<double> accuracy;   // fraction correct on the first m minibatches, before each update
  const std::vector<double>& of(Metric m) const;
};

/// Runs one trajectory of max(steps) SGD steps at constant lr0 (momentum and
/// weight decay from the recipe), recording every metric at each m in
/// `steps`. Minibatch t is batch t mod len of epoch t div len of the training
/// stream seeded by `data_seed`, so all candidates see the same data.
MetricSeries measure_metrics(Network& net, const Dataset& train_set, std::vector<int> steps,
                             const TrainRecipe& recipe, std::uint64_t data_seed);

/// Scoring minibatch for a search: the first training minibatch of the stream.
Batch scoring_batch(const Dataset& train_set, int batch_size, std::uint64_t data_seed);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);
/// Average ranks, 1-based, ascending.
std::vector<double> average_ranks(const std::vector<double>& v);

struct CandidateScore {
  int candidate = 0;
  std::string config;
  std::int64_t params = 0;
  std::int64_t macs = 0;
  std::string metric;
  int minibatches = 1;
  double value = 0.0;
  int rank = 0;  // 1 = highest value
};

/// Fills `rank` so that it is a bijection onto 1..n; ties go to the lower candidate index.
void assign_ranks(std::vector<CandidateScore>& scores);

/// Index into `scores` of the highest value; ties go to the lowest candidate index.
std::size_t select_best(const std::vector<CandidateScore>& scores);

}  // namespace blockswap
