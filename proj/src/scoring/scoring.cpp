#include "blockswap/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "blockswap/ops.hpp"

namespace blockswap {

double fisher_delta_c(const Tensor& a, const Tensor& g) {
  if (!a.same_shape(g)) throw std::invalid_argument("fisher_delta_c: activation and gradient shapes differ");
  if (a.rank() != 3) throw std::invalid_argument("fisher_delta_c: expected [N,H,W], got " + shape_str(a.shape()));
  const std::int64_t n = a.dim(0), plane = a.dim(1) * a.dim(2);
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::int64_t p = 0; p < plane; ++p) s += static_cast<double>(a[i * plane + p]) * g[i * plane + p];
    total += s * s;
  }
  return total / (2.0 * static_cast<double>(n));
}

std::vector<double> fisher_delta_channels(const Tensor& a, const Tensor& g) {
  if (!a.same_shape(g)) throw std::invalid_argument("fisher_delta_channels: activation and gradient shapes differ");
  if (a.rank() != 4) throw std::invalid_argument("fisher_delta_channels: expected [N,C,H,W]");
  const std::int64_t n = a.dim(0), c = a.dim(1), plane = a.dim(2) * a.dim(3);
  std::vector<double> out(static_cast<std::size_t>(c), 0.0);
  for (std::int64_t ch = 0; ch < c; ++ch) {
    double total = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const std::int64_t base = (i * c + ch) * plane;
      double s = 0.0;
      for (std::int64_t p = 0; p < plane; ++p) s += static_cast<double>(a[base + p]) * g[base + p];
      total += s * s;
    }
    out[static_cast<std::size_t>(ch)] = total / (2.0 * static_cast<double>(n));
  }
  return out;
}

FisherReading read_probes(const std::vector<Var>& probes, int num_blocks) {
  if (static_cast<int>(probes.size()) != num_blocks)
    throw std::logic_error("expected " + std::to_string(num_blocks) + " probes, found " +
                           std::to_string(probes.size()));
  FisherReading r;
  for (int b = 0; b < num_blocks; ++b) {
    const Var& p = probes[static_cast<std::size_t>(b)];
    if (!p.valid()) throw std::logic_error("block " + std::to_string(b) + " has no probe");
    FisherProbeReading reading;
    reading.block = b;
    reading.delta_c = fisher_delta_channels(p.value(), p.grad());
    for (double d : reading.delta_c) reading.delta_b += d;
    r.potential += reading.delta_b;
    r.blocks.push_back(std::move(reading));
  }
  return r;
}

FisherReading fisher_potential(Network& net, const Batch& batch) {
  net.zero_grad();
  Graph g;
  const ForwardResult out = net.forward(g, batch.images);
  g.backward(softmax_cross_entropy(out.logits, batch.labels));
  FisherReading r = read_probes(out.probes, net.config().num_blocks());
  net.zero_grad();
  return r;
}

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::kFisher: return "fisher";
    case Metric::kGradNorm: return "gradnorm";
    case Metric::kL2: return "l2";
    case Metric::kAccuracy: return "accuracy";
  }
  return "?";
}

Metric parse_metric(const std::string& name) {
  for (Metric m : all_metrics())
    if (metric_name(m) == name) return m;
  throw std::invalid_argument("unknown metric '" + name + "' (fisher, gradnorm, l2, accuracy)");
}

const std::vector<double>& MetricSeries::of(Metric m) const {
  switch (m) {
    case Metric::kFisher: return fisher;
    case Metric::kGradNorm: return grad_norm;
    case Metric::kL2: return l2;
    case Metric::kAccuracy: return accuracy;
  }
  throw std::invalid_argument("unknown metric");
}

Batch scoring_batch(const Dataset& train_set, int batch_size, std::uint64_t data_seed) {
  const Minibatches batches(train_set, batch_size, data_seed, 0, Split::kTrain);
  if (batches.size() == 0) throw std::invalid_argument("training set is smaller than one minibatch");
  return batches[0];
}

MetricSeries measure_metrics(Network& net, const Dataset& train_set, std::vector<int> steps,
                             const TrainRecipe& recipe, std::uint64_t data_seed) {
  if (steps.empty()) throw std::invalid_argument("measure_metrics: no step counts requested");
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  if (steps.front() < 1) throw std::invalid_argument("measure_metrics: step counts must be >= 1");
  MetricSeries out;
  out.steps = steps;
  Sgd opt(net.parameters(), recipe.momentum, recipe.weight_decay);
  double fisher = 0.0, grad_norm = 0.0;
  std::int64_t correct = 0, seen = 0;
  std::size_t next = 0;
  std::uint64_t epoch = 0;
  Minibatches batches(train_set, recipe.batch_size, data_seed, epoch, Split::kTrain);
  if (batches.size() == 0) throw std::invalid_argument("training set is smaller than one minibatch");
  for (int t = 0; t < steps.back(); ++t) {
    const auto within = static_cast<std::size_t>(t) % batches.size();
    if (t > 0 && within == 0) batches = Minibatches(train_set, recipe.batch_size, data_seed, ++epoch, Split::kTrain);
    const Batch batch = batches[within];
    net.zero_grad();
    Graph g;
    const ForwardResult fr = net.forward(g, batch.images);
    const auto pred = argmax_rows(fr.logits.value());
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == batch.labels[i];
    seen += static_cast<std::int64_t>(pred.size());
    Var loss = softmax_cross_entropy(fr.logits, batch.labels);
    if (!std::isfinite(loss.value()[0])) throw std::runtime_error("metric trajectory diverged at step " + std::to_string(t));
    g.backward(loss);
    fisher += read_probes(fr.probes, net.config().num_blocks()).potential;
    for (const auto& p : net.parameters())
      for (auto v : p.grad.storage()) grad_norm += std::abs(static_cast<double>(v));
    opt.step(recipe.lr0);
    if (t + 1 == steps[next]) {
      double l2 = 0.0;
      for (const auto& p : net.parameters()) {
        double sq = 0.0;
        for (auto v : p.value.storage()) sq += static_cast<double>(v) * v;
        l2 += std::sqrt(sq);
      }
      out.fisher.push_back(fisher);
      out.grad_norm.push_back(grad_norm);
      out.l2.push_back(l2);
      out.accuracy.push_back(static_cast<double>(correct) / static_cast<double>(seen));
      ++next;
    }
  }
  net.zero_grad();
  return out;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: sequences differ in length");
  if (x.size() < 2) throw std::invalid_argument("spearman: need at least two observations");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw std::invalid_argument("spearman: non-finite value");
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const bool ties = std::set<double>(rx.begin(), rx.end()).size() != rx.size() ||
                    std::set<double>(ry.begin(), ry.end()).size() != ry.size();
  if (!ties) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
    return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
  }
  // Pearson correlation of the average ranks.
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("spearman: a sequence is constant");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

void assign_ranks(std::vector<CandidateScore>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a].value != scores[b].value) return scores[a].value > scores[b].value;
    return scores[a].candidate < scores[b].candidate;
  });
  for (std::size_t r = 0; r < order.size(); ++r) scores[order[r]].rank = static_cast<int>(r) + 1;
}

std::size_t select_best(const std::vector<CandidateScore>& scores) {
  if (scores.empty()) throw std::invalid_argument("select_best: no candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    const auto& a = scores[i];
    const auto& b = scores[best];
    if (a.value > b.value || (a.value == b.value && a.candidate < b.candidate)) best = i;
  }
  return best;
}

}  // namespace blockswap
