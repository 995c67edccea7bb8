#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "blockswap/tensor.hpp"

namespace blockswap {

enum class Split { kTrain, kEval };

struct Normalization {
  std::array<float, 3> mean{0.0f, 0.0f, 0.0f};
  std::array<float, 3> std{1.0f, 1.0f, 1.0f};

  static Normalization identity() { return {}; }
  /// Per-channel statistics commonly used for CIFAR-10.
  static Normalization cifar10() { return {{0.4914f, 0.4822f, 0.4465f}, {0.2470f, 0.2435f, 0.2616f}}; }
};

struct Dataset {
  Tensor images;  // N,3,H,W
  std::vector<int> labels;
  int num_classes = 10;
  Split split = Split::kTrain;

  std::int64_t size() const { return static_cast<std::int64_t>(labels.size()); }
  int image_size() const { return static_cast<int>(images.dim(2)); }
};

// ---- CIFAR-10 binary format ------------------------------------------------

inline constexpr int kCifarSide = 32;
inline constexpr std::size_t kCifarRecordBytes = 1 + 3 * kCifarSide * kCifarSide;

/// Undecoded records: the label byte and 3072 pixel bytes (R plane, G, B).
struct CifarRecords {
  std::vector<std::uint8_t> labels;
  std::vector<std::uint8_t> pixels;  // labels.size() * 3072 bytes

  std::size_t size() const { return labels.size(); }
};

/// Reads and concatenates files; throws std::runtime_error on a length that
/// is not a multiple of 3073, a label above 9, or no records at all.
CifarRecords read_cifar_records(const std::vector<std::string>& paths);
void write_cifar_records(const CifarRecords& records, const std::string& path);

/// Pixels scaled to [0, 1] and then standardized per channel.
Dataset decode_cifar(const CifarRecords& records, const Normalization& norm, Split split);
Dataset load_cifar_binary(const std::vector<std::string>& paths, const Normalization& norm, Split split);

// ---- Synthetic task -------------------------------------------------------

struct SyntheticSpec {
  int classes = 10;
  int image_size = 16;
  int train_count = 2048;
  int eval_count = 1024;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Dataset train;
  Dataset eval;
};

/// Each class owns a colour and a row band (shared with one other class). An
/// image holds its class patch (jittered in position and strength), one weaker
/// distractor patch, and Gaussian pixel noise with sigma 0.3. Labels cycle
/// through the classes.
SyntheticData make_synthetic(const SyntheticSpec& spec);

// ---- Minibatching ---------------------------------------------------------

struct Batch {
  Tensor images;
  std::vector<int> labels;
};

/// Mirror every image left-right.
Tensor hflip(const Tensor& images);

/// One epoch of minibatches. Training: the order is a permutation drawn from
/// (seed, epoch), the last partial batch is dropped, and each image gets a
/// random crop from a zero-padded copy (pad = side / 8) and a coin-flip mirror.
/// Eval: dataset order, last partial batch kept, no augmentation. The mode
/// defaults to the dataset's split tag.
class Minibatches {
 public:
  Minibatches(const Dataset& data, int batch_size, std::uint64_t seed, std::uint64_t epoch)
      : Minibatches(data, batch_size, seed, epoch, data.split) {}
  Minibatches(const Dataset& data, int batch_size, std::uint64_t seed, std::uint64_t epoch, Split mode);

  std::size_t size() const { return count_; }
  Batch operator[](std::size_t index) const;

 private:
  const Dataset* data_;
  int batch_size_;
  Split mode_;
  std::uint64_t stream_;
  std::vector<std::int64_t> order_;
  std::size_t count_;
};

}  // namespace blockswap
