#include "blockswap/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "blockswap/random.hpp"

namespace blockswap {

CifarRecords read_cifar_records(const std::vector<std::string>& paths) {
  CifarRecords out;
  constexpr std::size_t kPixels = kCifarRecordBytes - 1;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open CIFAR file " + path);
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() % kCifarRecordBytes != 0)
      throw std::runtime_error(path + ": length " + std::to_string(bytes.size()) + " is not a multiple of " +
                               std::to_string(kCifarRecordBytes));
    for (std::size_t off = 0; off < bytes.size(); off += kCifarRecordBytes) {
      const std::uint8_t label = bytes[off];
      if (label > 9)
        throw std::runtime_error(path + ": record " + std::to_string(off / kCifarRecordBytes) + " has label " +
                                 std::to_string(label));
      out.labels.push_back(label);
      out.pixels.insert(out.pixels.end(), bytes.begin() + static_cast<std::ptrdiff_t>(off + 1),
                        bytes.begin() + static_cast<std::ptrdiff_t>(off + 1 + kPixels));
    }
  }
  if (out.labels.empty()) throw std::runtime_error("CIFAR input contains no records");
  return out;
}

void write_cifar_records(const CifarRecords& records, const std::string& path) {
  constexpr std::size_t kPixels = kCifarRecordBytes - 1;
  if (records.pixels.size() != records.size() * kPixels)
    throw std::invalid_argument("CIFAR records: pixel buffer does not match label count");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t i = 0; i < records.size(); ++i) {
    out.put(static_cast<char>(records.labels[i]));
    out.write(reinterpret_cast<const char*>(records.pixels.data() + i * kPixels), kPixels);
  }
  if (!out) throw std::runtime_error("short write to " + path);
}

Dataset decode_cifar(const CifarRecords& records, const Normalization& norm, Split split) {
  if (records.size() == 0) throw std::runtime_error("CIFAR input contains no records");
  const auto n = static_cast<std::int64_t>(records.size());
  constexpr std::int64_t plane = kCifarSide * kCifarSide;
  Dataset d;
  d.split = split;
  d.images = Tensor({n, 3, kCifarSide, kCifarSide});
  for (std::int64_t i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c)
      for (std::int64_t p = 0; p < plane; ++p) {
        const auto idx = (i * 3 + c) * plane + p;
        const float v = static_cast<float>(records.pixels[static_cast<std::size_t>(idx)]) / 255.0f;
        d.images[idx] = (v - norm.mean[static_cast<std::size_t>(c)]) / norm.std[static_cast<std::size_t>(c)];
      }
  d.labels.assign(records.labels.begin(), records.labels.end());
  return d;
}

Dataset load_cifar_binary(const std::vector<std::string>& paths, const Normalization& norm, Split split) {
  return decode_cifar(read_cifar_records(paths), norm, split);
}

namespace {

constexpr double kNoiseSigma = 0.3;
constexpr double kPatchStrength = 1.0;
constexpr double kDistractorStrength = 0.6;
constexpr int kRowJitter = 1;

struct ClassLook {
  int row;
  std::array<double, 3> colour;
};

// Each class has a colour (hue angle plus a blue sign) and a row band shared
// with one neighbour. The column is free, which keeps the label invariant
// under horizontal flips; crop jitter blurs the bands, so colour carries most
// of the signal.
std::vector<ClassLook> class_looks(int classes, int side, int patch) {
  const int bands = (classes + 1) / 2;
  const int span = side - patch;
  std::vector<ClassLook> looks;
  for (int k = 0; k < classes; ++k) {
    const int band = k / 2;
    const double theta = 2.0 * std::numbers::pi * k / classes;
    looks.push_back({bands > 1 ? band * span / (bands - 1) : span / 2,
                     {std::cos(theta), std::sin(theta), k % 2 == 0 ? 0.5 : -0.5}});
  }
  return looks;
}

void draw_patch(Tensor& images, std::int64_t n, int row, int col, int patch, double strength,
                const std::array<double, 3>& colour) {
  const int side = static_cast<int>(images.dim(2));
  for (int c = 0; c < 3; ++c)
    for (int y = std::max(row, 0); y < std::min(row + patch, side); ++y)
      for (int x = std::max(col, 0); x < std::min(col + patch, side); ++x)
        images.at(n, c, y, x) += static_cast<float>(strength * colour[static_cast<std::size_t>(c)]);
}

Dataset synthesize(const SyntheticSpec& spec, int count, std::uint64_t stream, Split split) {
  const int side = spec.image_size, patch = std::max(2, side / 4), jitter = kRowJitter;
  const auto looks = class_looks(spec.classes, side, patch);
  Dataset d;
  d.split = split;
  d.num_classes = spec.classes;
  d.images = Tensor({count, 3, side, side});
  d.labels.resize(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(stream, static_cast<std::uint64_t>(i)));
    const int label = i % spec.classes;
    d.labels[static_cast<std::size_t>(i)] = label;
    std::normal_distribution<double> noise(0.0, kNoiseSigma);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) d.images.at(i, c, y, x) = static_cast<float>(noise(rng));
    std::uniform_int_distribution<int> shift(-jitter, jitter), where(0, side - patch);
    std::uniform_real_distribution<double> strength(0.5, 1.0);
    const auto& look = looks[static_cast<std::size_t>(label)];
    draw_patch(d.images, i, look.row + shift(rng), where(rng), patch, kPatchStrength * strength(rng), look.colour);
    // A weaker patch with another class's look, anywhere in the image.
    std::uniform_int_distribution<int> other(0, spec.classes - 1);
    const auto& decoy = looks[static_cast<std::size_t>(other(rng))];
    draw_patch(d.images, i, where(rng), where(rng), patch, kDistractorStrength * strength(rng), decoy.colour);
  }
  return d;
}

}  // namespace

SyntheticData make_synthetic(const SyntheticSpec& spec) {
  if (spec.image_size < 8) throw std::invalid_argument("synthetic image size must be >= 8");
  if (spec.classes < 2) throw std::invalid_argument("synthetic task needs at least two classes");
  if (spec.train_count < spec.classes || spec.eval_count < spec.classes)
    throw std::invalid_argument("synthetic split sizes must be >= the class count");
  return {synthesize(spec, spec.train_count, derive_seed(spec.seed, 0), Split::kTrain),
          synthesize(spec, spec.eval_count, derive_seed(spec.seed, 1), Split::kEval)};
}

Tensor hflip(const Tensor& images) {
  Tensor out(images.shape());
  const auto rows = images.dim(0) * images.dim(1) * images.dim(2), w = images.dim(3);
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t x = 0; x < w; ++x) out[r * w + x] = images[r * w + (w - 1 - x)];
  return out;
}

Minibatches::Minibatches(const Dataset& data, int batch_size, std::uint64_t seed, std::uint64_t epoch, Split mode)
    : data_(&data), batch_size_(batch_size), mode_(mode), stream_(derive_seed(seed, epoch)) {
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  order_.resize(static_cast<std::size_t>(data.size()));
  std::iota(order_.begin(), order_.end(), 0);
  const auto n = static_cast<std::size_t>(data.size()), b = static_cast<std::size_t>(batch_size);
  if (mode == Split::kTrain) {
    Rng rng(stream_);
    std::shuffle(order_.begin(), order_.end(), rng);
    count_ = n / b;
  } else {
    count_ = (n + b - 1) / b;
  }
}

Batch Minibatches::operator[](std::size_t index) const {
  if (index >= count_) throw std::out_of_range("minibatch index out of range");
  const auto begin = index * static_cast<std::size_t>(batch_size_);
  const auto end = std::min(begin + static_cast<std::size_t>(batch_size_), order_.size());
  const auto& src = data_->images;
  const std::int64_t c = src.dim(1), h = src.dim(2), w = src.dim(3), per = c * h * w;
  Batch b;
  b.images = Tensor({static_cast<std::int64_t>(end - begin), c, h, w});
  const bool augment = mode_ == Split::kTrain;
  Rng rng(derive_seed(stream_, index + 1));
  const int pad = static_cast<int>(h / 8);
  std::uniform_int_distribution<int> offset(0, 2 * pad);
  std::bernoulli_distribution flip(0.5);
  for (std::size_t k = begin; k < end; ++k) {
    const auto i = order_[k];
    const auto j = static_cast<std::int64_t>(k - begin);
    b.labels.push_back(data_->labels[static_cast<std::size_t>(i)]);
    if (!augment) {
      std::memcpy(b.images.data() + j * per, src.data() + i * per, sizeof(float) * static_cast<std::size_t>(per));
      continue;
    }
    const int dy = offset(rng) - pad, dx = offset(rng) - pad;
    const bool mirror = flip(rng);
    for (std::int64_t ch = 0; ch < c; ++ch)
      for (std::int64_t y = 0; y < h; ++y)
        for (std::int64_t x = 0; x < w; ++x) {
          const auto sy = y + dy, sx0 = x + dx;
          const auto sx = mirror ? (w - 1 - sx0) : sx0;
          const bool inside = sy >= 0 && sy < h && sx0 >= 0 && sx0 < w;
          b.images.at(j, ch, y, x) = inside ? src.at(i, ch, sy, sx) : 0.0f;
        }
  }
  return b;
}

}  // namespace blockswap
