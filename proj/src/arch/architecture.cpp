#include "hpe/arch/architecture.hpp"

#include "hpe/common/random.hpp"

#include <cmath>
#include <stdexcept>

namespace hpe::arch {

namespace {

constexpr std::size_t kInputSide = 64;
constexpr std::uint32_t kMaxBlocks = 6;

std::size_t pooled(std::size_t side) { return (side + 1) / 2; }

template <typename T>
void glorot_fill(engine::Tensor<T>& weights, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& w : weights.values()) w = static_cast<T>((2.0 * uniform01(rng) - 1.0) * limit);
}

}  // namespace

char family_letter(Family family) {
  switch (family) {
    case Family::A: return 'A';
    case Family::B: return 'B';
    case Family::C: return 'C';
  }
  return '?';
}

Family parse_family(const std::string& text) {
  if (text == "A" || text == "a" || text == "0") return Family::A;
  if (text == "B" || text == "b" || text == "1") return Family::B;
  if (text == "C" || text == "c" || text == "2") return Family::C;
  throw std::invalid_argument("unknown architecture family '" + text + "' (expected A, B or C)");
}

std::string ArchitectureSpec::label() const {
  return std::string(1, family_letter(family)) + "-" + std::to_string(conv_blocks) + "-" +
         std::to_string(first_filters) + "-" + std::to_string(dense_layers) + "-" + std::to_string(dense_size);
}

void validate(const ArchitectureSpec& spec) {
  if (static_cast<std::uint32_t>(spec.family) > 2) throw std::invalid_argument("invalid architecture family code");
  if (spec.conv_blocks < 1 || spec.conv_blocks > kMaxBlocks) {
    throw std::invalid_argument("conv_blocks must be in 1..6 for a 64x64 input, got " +
                                std::to_string(spec.conv_blocks));
  }
  if (spec.first_filters == 0) throw std::invalid_argument("first_filters must be positive");
  if (spec.dense_layers == 0) throw std::invalid_argument("dense_layers must be positive");
  if (spec.dense_size == 0) throw std::invalid_argument("dense_size must be positive");
}

bool in_search_grid(const ArchitectureSpec& spec) {
  const auto pow2_in = [](std::uint32_t v, std::uint32_t lo, std::uint32_t hi) {
    return v >= lo && v <= hi && (v & (v - 1)) == 0;
  };
  return static_cast<std::uint32_t>(spec.family) <= 2 && spec.conv_blocks >= 1 && spec.conv_blocks <= 6 &&
         pow2_in(spec.first_filters, 32, 256) && spec.dense_layers >= 1 && spec.dense_layers <= 3 &&
         pow2_in(spec.dense_size, 64, 512);
}

std::vector<ArchitectureSpec> search_grid(Family family) {
  std::vector<ArchitectureSpec> grid;
  for (std::uint32_t blocks = 1; blocks <= 6; ++blocks)
    for (std::uint32_t filters : {32u, 64u, 128u, 256u})
      for (std::uint32_t dense = 1; dense <= 3; ++dense)
        for (std::uint32_t size : {64u, 128u, 256u, 512u}) grid.push_back({family, blocks, filters, dense, size});
  return grid;
}

std::vector<std::size_t> filter_schedule(Family family, std::size_t blocks, std::size_t first_filters) {
  std::vector<std::size_t> schedule(blocks);
  for (std::size_t k = 0; k < blocks; ++k) {
    switch (family) {
      case Family::A: schedule[k] = first_filters; break;
      case Family::B: schedule[k] = first_filters * (k + 1); break;
      case Family::C: schedule[k] = first_filters << k; break;
    }
  }
  return schedule;
}

template <typename T>
engine::Network<T> network_skeleton(const ArchitectureSpec& spec) {
  validate(spec);
  engine::Network<T> net({1, kInputSide, kInputSide});
  for (std::size_t filters : filter_schedule(spec.family, spec.conv_blocks, spec.first_filters)) {
    net.add_conv3x3_tanh(filters);
    net.add_maxpool2x2();
  }
  net.add_flatten();
  for (std::uint32_t i = 0; i < spec.dense_layers; ++i) net.add_dense(spec.dense_size, engine::Activation::tanh);
  net.add_dense(2, engine::Activation::linear);
  return net;
}

template <typename T>
engine::Network<T> build_network(const ArchitectureSpec& spec, std::uint64_t seed) {
  engine::Network<T> net = network_skeleton<T>(spec);
  std::mt19937_64 rng(seed);
  for (auto& p : net.params()) {
    const std::size_t out = p.out_dim();
    const std::size_t in = p.in_dim();
    const std::size_t taps = p.kind == engine::ParamKind::conv3x3 ? 9 : 1;
    glorot_fill(p.weights, in * taps, out * taps, rng);
  }
  return net;
}

std::uint64_t count_params(const ArchitectureSpec& spec) {
  validate(spec);
  std::uint64_t total = 0;
  std::uint64_t in_channels = 1;
  std::uint64_t side = kInputSide;
  for (std::size_t filters : filter_schedule(spec.family, spec.conv_blocks, spec.first_filters)) {
    total += 9 * in_channels * filters + filters;
    in_channels = filters;
    side = pooled(side);
  }
  std::uint64_t in_units = in_channels * side * side;
  for (std::uint32_t i = 0; i < spec.dense_layers; ++i) {
    total += in_units * spec.dense_size + spec.dense_size;
    in_units = spec.dense_size;
  }
  return total + in_units * 2 + 2;
}

std::uint64_t estimate_flops(const ArchitectureSpec& spec) {
  validate(spec);
  std::uint64_t flops = 0;
  std::uint64_t in_channels = 1;
  std::uint64_t side = kInputSide;
  for (std::size_t filters : filter_schedule(spec.family, spec.conv_blocks, spec.first_filters)) {
    const std::uint64_t cells = filters * side * side;
    flops += 2 * 9 * in_channels * cells;  // multiply-accumulate
    flops += cells;                         // bias
    flops += cells;                         // tanh
    side = pooled(side);
    flops += 3 * filters * side * side;     // pooling comparisons
    in_channels = filters;
  }
  std::uint64_t in_units = in_channels * side * side;
  for (std::uint32_t i = 0; i < spec.dense_layers; ++i) {
    flops += 2 * in_units * spec.dense_size + spec.dense_size + spec.dense_size;
    in_units = spec.dense_size;
  }
  return flops + 2 * in_units * 2 + 2;
}

CostReport cost_report(const ArchitectureSpec& spec) { return {count_params(spec), estimate_flops(spec)}; }

template engine::Network<float> build_network(const ArchitectureSpec&, std::uint64_t);
template engine::Network<double> build_network(const ArchitectureSpec&, std::uint64_t);
template engine::Network<float> network_skeleton(const ArchitectureSpec&);
template engine::Network<double> network_skeleton(const ArchitectureSpec&);

}  // namespace hpe::arch
