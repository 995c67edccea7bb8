#include "blockswap/distill.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "blockswap/ops.hpp"

namespace blockswap {

void TrainRecipe::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("training recipe: ") + what);
  };
  need(epochs >= 1, "epochs must be >= 1");
  need(batch_size >= 1, "batch size must be >= 1");
  need(lr0 > 0, "lr0 must be positive");
  need(momentum >= 0 && momentum < 1, "momentum must lie in [0, 1)");
  need(weight_decay >= 0, "weight decay must be >= 0");
  need(beta >= 0, "beta must be >= 0");
}

double cosine_lr(double t, double total, double lr0) {
  if (total <= 0 || t < 0 || t > total) throw std::invalid_argument("cosine_lr: need 0 <= t <= T and T > 0");
  if (t == total) return 0.0;
  return 0.5 * lr0 * (1.0 + std::cos(std::numbers::pi * t / total));
}

Var attention_transfer_term(const std::vector<Var>& student_maps, const std::vector<Tensor>& teacher_maps) {
  if (student_maps.empty() || student_maps.size() != teacher_maps.size())
    throw std::invalid_argument("attention transfer needs the same non-zero number of student and teacher maps");
  Var total = attention_distance(student_maps[0], teacher_maps[0]);
  for (std::size_t i = 1; i < student_maps.size(); ++i)
    total = add(total, attention_distance(student_maps[i], teacher_maps[i]));
  return total;
}

double at_loss(const std::vector<Tensor>& student_maps, const std::vector<Tensor>& teacher_maps, double ce,
               double beta) {
  Graph g;
  std::vector<Var> s;
  for (const auto& m : student_maps) s.push_back(g.input(m));
  return ce + beta * static_cast<double>(attention_transfer_term(s, teacher_maps).value()[0]);
}

Sgd::Sgd(std::vector<Parameter>& params, double momentum, double weight_decay)
    : params_(&params), momentum_(momentum), weight_decay_(weight_decay) {
  for (const auto& p : params) velocity_.emplace_back(static_cast<std::size_t>(p.value.numel()), 0.0f);
}

void Sgd::step(double lr) {
  const auto mu = static_cast<float>(momentum_), rate = static_cast<float>(lr);
  for (std::size_t k = 0; k < params_->size(); ++k) {
    Parameter& p = (*params_)[k];
    const float wd = p.decays() ? static_cast<float>(weight_decay_) : 0.0f;
    float* w = p.value.data();
    const float* g = p.grad.data();
    float* v = velocity_[k].data();
    for (std::int64_t i = 0; i < p.value.numel(); ++i) {
      v[i] = mu * v[i] + (g[i] + wd * w[i]);
      w[i] -= rate * v[i];
    }
  }
}

double evaluate_error(Network& net, const Dataset& eval, int batch_size) {
  const Minibatches batches(eval, batch_size, 0, 0, Split::kEval);
  std::int64_t wrong = 0;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const Batch batch = batches[b];
    Graph g;
    const auto pred = argmax_rows(net.forward(g, batch.images).logits.value());
    for (std::size_t i = 0; i < pred.size(); ++i) wrong += pred[i] != batch.labels[i];
  }
  return static_cast<double>(wrong) / static_cast<double>(eval.size());
}

TrainHistory train(Network& student, Network* teacher, const Dataset& train_set, const Dataset& eval_set,
                   const TrainRecipe& recipe) {
  recipe.validate();
  const bool distil = teacher != nullptr && recipe.beta > 0;
  TrainHistory history;
  history.initial_eval_error = evaluate_error(student, eval_set, recipe.batch_size);
  Sgd opt(student.parameters(), recipe.momentum, recipe.weight_decay);
  for (int epoch = 0; epoch < recipe.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = cosine_lr(epoch, recipe.epochs, recipe.lr0);
    const Minibatches batches(train_set, recipe.batch_size, recipe.seed, static_cast<std::uint64_t>(epoch),
                              Split::kTrain);
    if (batches.size() == 0) throw std::invalid_argument("training set is smaller than one minibatch");
    double loss_sum = 0.0, at_sum = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const Batch batch = batches[b];
      std::vector<Tensor> teacher_maps;
      if (distil) {
        Graph tg;
        for (const auto& point : teacher->forward(tg, batch.images).attention_points)
          teacher_maps.push_back(attention_map(point).value());
      }
      student.zero_grad();
      Graph g;
      const ForwardResult out = student.forward(g, batch.images);
      Var loss = softmax_cross_entropy(out.logits, batch.labels);
      if (distil) {
        std::vector<Var> maps;
        for (const auto& point : out.attention_points) maps.push_back(attention_map(point));
        Var at = attention_transfer_term(maps, teacher_maps);
        at_sum += at.value()[0];
        loss = add(loss, scale(at, recipe.beta));
      }
      const double value = loss.value()[0];
      if (!std::isfinite(value)) {
        history.diverged = true;
        history.divergence = "epoch " + std::to_string(epoch) + ", minibatch " + std::to_string(b);
        return history;
      }
      loss_sum += value;
      g.backward(loss);
      opt.step(rec.lr);
    }
    rec.train_loss = loss_sum / static_cast<double>(batches.size());
    rec.at_term = at_sum / static_cast<double>(batches.size());
    rec.eval_error = evaluate_error(student, eval_set, recipe.batch_size);
    history.epochs.push_back(rec);
  }
  return history;
}

namespace {

constexpr const char* kMagic = "blockswap-checkpoint 1";

void put_le32(std::ostream& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  const char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                         static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
  out.write(bytes, 4);
}

float get_le32(const unsigned char* b) {
  const std::uint32_t bits = std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
                             (std::uint32_t{b[3]} << 24);
  return std::bit_cast<float>(bits);
}

std::string manifest(const Network& net) {
  std::ostringstream h;
  const auto& c = net.config();
  h << kMagic << '\n';
  h << "depth " << c.depth << '\n' << "width " << c.width << '\n' << "classes " << c.num_classes << '\n';
  h << "config " << c.to_string() << '\n';
  h << "tensors " << net.parameters().size() << '\n';
  std::int64_t offset = 0;
  for (const auto& p : net.parameters()) {
    h << p.name << ' ' << role_name(p.role) << ' ' << p.value.rank();
    for (auto e : p.value.shape()) h << ' ' << e;
    h << ' ' << offset << '\n';
    offset += p.value.numel();
  }
  h << "payload " << offset << '\n';
  return h.str();
}

}  // namespace

void save_checkpoint(const Network& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << manifest(net);
  for (const auto& p : net.parameters())
    for (auto v : p.value.storage()) put_le32(out, v);
  if (!out) throw std::runtime_error("short write to checkpoint " + path);
}

void load_checkpoint(Network& net, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  const std::string expected = manifest(net);
  std::string header(expected.size(), '\0');
  in.read(header.data(), static_cast<std::streamsize>(header.size()));
  if (!in || header != expected) {
    // Report the first differing manifest line.
    std::istringstream want(expected), got(header);
    std::string a, b;
    while (std::getline(want, a)) {
      if (!std::getline(got, b) || a != b)
        throw std::runtime_error("checkpoint " + path + " does not match the network: expected '" + a + "'");
    }
    throw std::runtime_error("checkpoint " + path + " does not match the network");
  }
  std::int64_t total = 0;
  for (const auto& p : net.parameters()) total += p.value.numel();
  std::vector<unsigned char> payload(static_cast<std::size_t>(total) * 4);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (in.gcount() != static_cast<std::streamsize>(payload.size()) || in.peek() != std::char_traits<char>::eof())
    throw std::runtime_error("checkpoint " + path + ": payload size does not match the manifest");
  std::size_t at = 0;
  for (auto& p : net.parameters())
    for (auto& v : p.value.storage()) {
      v = get_le32(payload.data() + at);
      at += 4;
    }
}

}  // namespace blockswap
