#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "hpe/cli/bench.hpp"
#include "hpe/cli/config.hpp"
#include "hpe/cli/synth.hpp"
#include "hpe/datapipe/pipeline.hpp"
#include "hpe/datapipe/split.hpp"
#include "hpe/trainsearch/search.hpp"

namespace hpe::cli {

namespace fs = std::filesystem;

// Command implementations behind the `hpe` executable. Each writes progress
// and results to `out`, warnings to `err`, and throws on errors.

/// Builds a sample store from detections + annotations and prints the
/// detection statistics as one table row.
datapipe::PreprocessResult cmd_preprocess(const fs::path& detections, const fs::path& annotations,
                                          const fs::path& out_dir, const datapipe::PipelineConfig& cfg,
                                          std::ostream& out, std::ostream& err);

/// Renders a synthetic sample store.
void cmd_synth(const SyntheticSpec& spec, const fs::path& out_dir, std::ostream& out);

/// Splits a sample store into out_dir/{train,val,test}.
datapipe::SplitIndices cmd_split(const fs::path& store, const fs::path& out_dir, double test_frac, double val_frac,
                                 std::uint64_t seed, std::ostream& out);

/// Loads data_dir/{train,val,test}; test may be absent when not needed.
trainsearch::Partitions load_partitions(const fs::path& data_dir, bool need_test);

/// Trains cfg.architecture, writes the weight file and `<weights>.history.csv`.
trainsearch::TrainResult cmd_train(const RunConfig& cfg, std::uint64_t seed, const fs::path& data_dir,
                                   const fs::path& weights, std::ostream& out);

/// Architecture grid search; ledger at out_dir/arch_ledger.csv.
std::vector<trainsearch::SearchResult> cmd_search_arch(const RunConfig& cfg, std::uint64_t seed,
                                                       const fs::path& data_dir, const fs::path& out_dir,
                                                       std::ostream& out);

/// Augmentation grid search for cfg.architecture; ledger at out_dir/augment_ledger.csv.
std::vector<trainsearch::SearchResult> cmd_search_aug(const RunConfig& cfg, std::uint64_t seed,
                                                      const fs::path& data_dir, const fs::path& out_dir,
                                                      std::ostream& out);

trainsearch::EvalReport cmd_eval(const fs::path& weights, const fs::path& store, std::ostream& out);

/// Writes one prediction per accepted head to `out_jsonl`; returns the count.
/// Boxes below the confidence threshold are dropped silently; boxes that
/// cannot be placed inside the frame and unreadable images are reported on `err`.
std::size_t cmd_predict(const fs::path& weights, const fs::path& input, const fs::path& out_jsonl,
                        const datapipe::PipelineConfig& cfg, std::ostream& err);

/// Benchmarks the given weights, or a freshly initialized production model.
BenchReport cmd_bench(const std::optional<fs::path>& weights, std::size_t n_heads, std::size_t batch,
                      std::uint64_t seed, std::ostream& out);

}  // namespace hpe::cli
