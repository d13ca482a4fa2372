#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hpe/engine/network.hpp"

namespace hpe::arch {

/// Filter-count progression across convolutional blocks.
///   A: constant, B: arithmetic (f, 2f, 3f, ...), C: doubling (f, 2f, 4f, ...).
enum class Family : std::uint32_t { A = 0, B = 1, C = 2 };

char family_letter(Family family);
Family parse_family(const std::string& text);

struct ArchitectureSpec {
  Family family = Family::C;
  std::uint32_t conv_blocks = 6;
  std::uint32_t first_filters = 32;
  std::uint32_t dense_layers = 1;
  std::uint32_t dense_size = 512;

  std::string label() const;
  bool operator==(const ArchitectureSpec&) const = default;
};

/// The selected production model: C, 6 blocks, 32 filters, one 512-unit hidden layer.
constexpr ArchitectureSpec realhepo_net_spec() { return {Family::C, 6, 32, 1, 512}; }

/// Throws std::invalid_argument for structurally impossible specs: zero sizes,
/// or more pooling stages than a 64x64 input can absorb.
void validate(const ArchitectureSpec& spec);

/// True when every field lies on the architecture-search grid
/// (blocks 1..6, filters {32,64,128,256}, dense layers 1..3, size {64,128,256,512}).
bool in_search_grid(const ArchitectureSpec& spec);

/// The 288 grid cells of one family, blocks-major order.
std::vector<ArchitectureSpec> search_grid(Family family);

std::vector<std::size_t> filter_schedule(Family family, std::size_t blocks, std::size_t first_filters);

/// Conv blocks (conv3x3+tanh, maxpool2x2), flatten, hidden tanh dense layers, 2-unit linear head.
/// Weights are Glorot-uniform from `seed`, biases zero.
template <typename T>
engine::Network<T> build_network(const ArchitectureSpec& spec, std::uint64_t seed);

/// Same layer stack with all parameters left at zero.
template <typename T>
engine::Network<T> network_skeleton(const ArchitectureSpec& spec);

struct CostReport {
  std::uint64_t trainable_params = 0;
  std::uint64_t flops_forward = 0;
  bool operator==(const CostReport&) const = default;
};

std::uint64_t count_params(const ArchitectureSpec& spec);

/// Flops of one 1x64x64 forward pass. Multiplies and adds are counted
/// separately; bias adds, activations (1 per element) and pooling
/// comparisons (3 per output cell) are included.
std::uint64_t estimate_flops(const ArchitectureSpec& spec);

CostReport cost_report(const ArchitectureSpec& spec);

}  // namespace hpe::arch
