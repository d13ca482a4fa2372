#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "hpe/arch/architecture.hpp"

namespace hpe::arch {

// RHPN weight file, all integers and scalars little-endian:
//   "RHPN" | u32 version | u32 family, blocks, first_filters, dense_layers, dense_size
//   | per parametric layer in network order: f32 weights (row-major), f32 bias
inline constexpr std::uint32_t kWeightFormatVersion = 1;

class WeightFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Model {
  ArchitectureSpec spec;
  engine::Network<float> network;
};

void write_weights(std::ostream& out, const ArchitectureSpec& spec, const engine::Network<float>& net);
Model read_weights(std::istream& in);

void save_weights(const std::filesystem::path& path, const ArchitectureSpec& spec, const engine::Network<float>& net);
Model load_weights(const std::filesystem::path& path);

}  // namespace hpe::arch
