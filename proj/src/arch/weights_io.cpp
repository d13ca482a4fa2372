#include "hpe/arch/weights_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace hpe::arch {

namespace {

constexpr std::array<char, 4> kMagic = {'R', 'H', 'P', 'N'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> bytes = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes.data(), bytes.size());
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) throw WeightFormatError("weight file truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_tensor(std::ostream& out, const engine::Tensor<float>& t) {
  for (const float v : t.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
}

void get_tensor(std::istream& in, engine::Tensor<float>& t) {
  for (auto& v : t.values()) v = std::bit_cast<float>(get_u32(in));
}

}  // namespace

void write_weights(std::ostream& out, const ArchitectureSpec& spec, const engine::Network<float>& net) {
  const auto expected = network_skeleton<float>(spec);
  if (expected.params().size() != net.params().size()) {
    throw WeightFormatError("network does not match architecture " + spec.label());
  }
  for (std::size_t i = 0; i < net.params().size(); ++i) {
    if (expected.params()[i].weights.shape() != net.params()[i].weights.shape()) {
      throw WeightFormatError("network layer " + std::to_string(i) + " does not match architecture " + spec.label());
    }
  }
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kWeightFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(spec.family));
  put_u32(out, spec.conv_blocks);
  put_u32(out, spec.first_filters);
  put_u32(out, spec.dense_layers);
  put_u32(out, spec.dense_size);
  for (const auto& p : net.params()) {
    put_tensor(out, p.weights);
    put_tensor(out, p.bias);
  }
  if (!out) throw WeightFormatError("failed writing weight file");
}

Model read_weights(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw WeightFormatError("not an RHPN weight file");
  const std::uint32_t version = get_u32(in);
  if (version != kWeightFormatVersion) {
    throw WeightFormatError("unsupported RHPN version " + std::to_string(version));
  }
  ArchitectureSpec spec;
  const std::uint32_t family = get_u32(in);
  if (family > 2) throw WeightFormatError("invalid family code " + std::to_string(family));
  spec.family = static_cast<Family>(family);
  spec.conv_blocks = get_u32(in);
  spec.first_filters = get_u32(in);
  spec.dense_layers = get_u32(in);
  spec.dense_size = get_u32(in);
  try {
    validate(spec);
  } catch (const std::invalid_argument& e) {
    throw WeightFormatError(std::string("invalid architecture in weight file: ") + e.what());
  }
  Model model{spec, network_skeleton<float>(spec)};
  for (auto& p : model.network.params()) {
    get_tensor(in, p.weights);
    get_tensor(in, p.bias);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw WeightFormatError("trailing bytes after weight data");
  return model;
}

void save_weights(const std::filesystem::path& path, const ArchitectureSpec& spec, const engine::Network<float>& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WeightFormatError("cannot open " + path.string() + " for writing");
  write_weights(out, spec, net);
}

Model load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WeightFormatError("cannot open " + path.string());
  return read_weights(in);
}

}  // namespace hpe::arch
