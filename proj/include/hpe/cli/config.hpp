#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hpe/arch/architecture.hpp"
#include "hpe/augment/augment.hpp"
#include "hpe/datapipe/image.hpp"
#include "hpe/trainsearch/train.hpp"

namespace hpe::cli {

/// Invalid or conflicting configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One JSON document configures every command. All keys are optional;
// unknown keys are rejected. See docs/config.md for the schema.
struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool desk_scale = false;
  arch::ArchitectureSpec architecture = arch::realhepo_net_spec();
  trainsearch::TrainConfig train;  // train.augment holds the "augment" section
  double test_frac = 0.2;
  double val_frac = 0.2;
  datapipe::PipelineConfig pipeline;
  std::vector<arch::ArchitectureSpec> arch_grid;
  std::vector<augment::AugmentConfig> augment_grid;
  /// Keys present in the source document, dotted ("seed", "pipeline.confidence_threshold").
  std::set<std::string> keys;

  bool has(const std::string& key) const { return keys.count(key) > 0; }
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical JSON rendering with grids expanded; parsing it back yields the same config.
std::string dump_run_config(const RunConfig& cfg);

/// A value may come from a flag or from the config file, not both.
inline void check_flag_conflict(const RunConfig& cfg, const std::string& key, bool flag_given,
                                const std::string& flag_name) {
  if (flag_given && cfg.has(key)) {
    throw ConfigError(flag_name + " is set both on the command line and in the config file (" + key + ")");
  }
}


template <typename T>
T resolve_option(const std::string& name, const std::optional<T>& flag, const std::optional<T>& config, T fallback) {
  if (flag && config) throw ConfigError(name + " is set both on the command line and in the config file");
  if (flag) return *flag;
  if (config) return *config;
  return fallback;
}

}  // namespace hpe::cli
