#include "blockswap/network_config.hpp"

#include <stdexcept>

namespace blockswap {

int NetworkConfig::blocks_for_depth(int depth) {
  if (depth < 10 || (depth - 4) % 6 != 0)
    throw std::invalid_argument("WideResNet depth must satisfy (depth - 4) % 6 == 0, got " + std::to_string(depth));
  return (depth - 4) / 2;
}

NetworkConfig NetworkConfig::skeleton(int depth, int width, int num_classes) {
  if (width < 1) throw std::invalid_argument("width multiplier must be >= 1");
  if (num_classes < 2) throw std::invalid_argument("need at least two classes");
  NetworkConfig c;
  c.depth = depth;
  c.width = width;
  c.num_classes = num_classes;
  const int count = blocks_for_depth(depth);
  c.blocks.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const BlockSlot s = c.slot(i);
    c.blocks.push_back(BlockDescriptor::standard().placed(s.n_in, s.n_out, s.stride));
  }
  return c;
}

NetworkConfig NetworkConfig::parse(int depth, int width, int num_classes, std::string_view tokens) {
  NetworkConfig c = skeleton(depth, width, num_classes);
  std::size_t index = 0, start = 0;
  while (true) {
    const auto comma = tokens.find(',', start);
    const auto token = tokens.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (index >= c.blocks.size())
      throw std::invalid_argument("config has more than " + std::to_string(c.blocks.size()) + " blocks");
    const BlockSlot s = c.slot(static_cast<int>(index));
    c.blocks[index] = parse_token(token).placed(s.n_in, s.n_out, s.stride);
    ++index;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (index != c.blocks.size())
    throw std::invalid_argument("config has " + std::to_string(index) + " blocks, WRN-" + std::to_string(depth) +
                                " needs " + std::to_string(c.blocks.size()));
  c.validate();
  return c;
}

BlockSlot NetworkConfig::slot(int index) const {
  const int per_stage = blocks_per_stage();
  if (index < 0 || index >= num_blocks()) throw std::out_of_range("block index " + std::to_string(index));
  BlockSlot s;
  s.stage = index / per_stage;
  const bool first = index % per_stage == 0;
  s.n_out = stage_channels(s.stage);
  s.n_in = first ? (s.stage == 0 ? kStemChannels : stage_channels(s.stage - 1)) : s.n_out;
  s.stride = (first && s.stage > 0) ? 2 : 1;
  return s;
}

NetworkConfig NetworkConfig::with_block(int index, const BlockDescriptor& type) const {
  NetworkConfig c = *this;
  const BlockSlot s = slot(index);
  c.blocks.at(static_cast<std::size_t>(index)) = type.placed(s.n_in, s.n_out, s.stride);
  return c;
}

std::string NetworkConfig::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) out += ',';
    out += to_token(blocks[i]);
  }
  return out;
}

void NetworkConfig::validate() const {
  const int count = blocks_for_depth(depth);
  if (static_cast<int>(blocks.size()) != count)
    throw std::invalid_argument("config has " + std::to_string(blocks.size()) + " blocks, expected " +
                                std::to_string(count));
  for (int i = 0; i < count; ++i) {
    const auto& d = blocks[static_cast<std::size_t>(i)];
    const BlockSlot s = slot(i);
    if (d.n_in != s.n_in || d.n_out != s.n_out || d.stride != s.stride)
      throw std::invalid_argument("block " + std::to_string(i) + " (" + to_token(d) +
                                  ") does not match its skeleton position");
    if (auto err = validation_error(d); !err.empty())
      throw std::invalid_argument("block " + std::to_string(i) + ": " + err);
  }
}

}  // namespace blockswap
