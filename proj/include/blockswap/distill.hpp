#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blockswap/data_io.hpp"
#include "blockswap/network.hpp"

namespace blockswap {

struct TrainRecipe {
  int epochs = 20;
  int batch_size = 64;
  double lr0 = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  double beta = 1000.0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// 0.5 * lr0 * (1 + cos(pi * t / T)).
double cosine_lr(double t, double total, double lr0);

/// Sum over attention points of the minibatch-mean distance between
/// l2-normalised student and teacher maps. Teacher maps carry no gradient.
Var attention_transfer_term(const std::vector<Var>& student_maps, const std::vector<Tensor>& teacher_maps);

/// ce + beta * attention term, evaluated on plain maps ([N, H*W] each).
double at_loss(const std::vector<Tensor>& student_maps, const std::vector<Tensor>& teacher_maps, double ce,
               double beta);

/// SGD with heavy-ball momentum (v = mu v + g; w -= lr v). Weight decay is the
/// gradient of (lambda / 2) ||w||^2 on conv and linear weights only.
class Sgd {
 public:
  Sgd(std::vector<Parameter>& params, double momentum, double weight_decay);
  void step(double lr);

 private:
  std::vector<Parameter>* params_;
  double momentum_;
  double weight_decay_;
  std::vector<std::vector<float>> velocity_;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;  // mean over the epoch's minibatches
  double at_term = 0.0;     // mean attention-transfer term (before beta)
  double eval_error = 0.0;
};

struct TrainHistory {
  double initial_eval_error = 0.0;
  std::vector<EpochRecord> epochs;
  bool diverged = false;
  std::string divergence;  // where the loss stopped being finite
};

/// Fraction of misclassified eval examples (batch-statistics BN).
double evaluate_error(Network& net, const Dataset& eval, int batch_size);

/// Trains `student` in place. `teacher` may be null (plain cross-entropy) and
/// is never updated. Returns early with diverged = true on a non-finite loss.
TrainHistory train(Network& student, Network* teacher, const Dataset& train_set, const Dataset& eval_set,
                   const TrainRecipe& recipe);

// Checkpoints: plain-text manifest, then little-endian float32 payload.
void save_checkpoint(const Network& net, const std::string& path);
/// Throws std::runtime_error when the file does not match `net`'s config or
/// parameter manifest.
void load_checkpoint(Network& net, const std::string& path);

}  // namespace blockswap
