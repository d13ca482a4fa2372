#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hpe/trainsearch/train.hpp"

namespace hpe::trainsearch {

/// One grid cell: configuration, test-set error and cost.
struct SearchResult {
  arch::ArchitectureSpec spec;
  augment::AugmentConfig augment;
  EvalReport eval;
  arch::CostReport cost;
  std::size_t epochs = 0;
  StopReason stop_reason = StopReason::max_epochs;
  std::uint64_t seed = 0;
  std::size_t grid_index = 0;  // position in the submitted grid; not stored in the ledger

  bool diverged() const { return stop_reason == StopReason::diverged; }
};

// Results ledger: CSV with one row per finished cell. Rows are keyed by
// (spec, augmentation, seed), so files from parallel workers can be
// concatenated in any order.
inline constexpr const char* kLedgerHeader =
    "family,blocks,first_filters,dense_layers,dense_size,shift,bmin,bmax,zmin,zmax,"
    "mae_tilt,mae_pan,mean_error,params,flops,epochs,stop_reason,seed";

class LedgerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string ledger_row(const SearchResult& r);
SearchResult parse_ledger_row(const std::string& line);

/// Missing file reads as empty. Throws LedgerError naming the bad line.
std::vector<SearchResult> read_ledger(const std::filesystem::path& path);

/// Appends one row, writing the header first if the file is new or empty.
void append_ledger(const std::filesystem::path& path, const SearchResult& r);

/// Same (spec, augmentation, seed).
bool same_cell(const SearchResult& a, const SearchResult& b);

/// Stable sort by mean error; diverged rows go last.
void sort_by_error(std::vector<SearchResult>& results);

struct SearchOptions {
  /// Resume from and append to this ledger when set.
  std::optional<std::filesystem::path> ledger;
  std::function<void(const SearchResult&, bool reused)> on_cell;
  EpochCallback on_epoch;
};

/// Trains every spec without augmentation and ranks it on the test partition.
/// Cells already in the ledger are not retrained. Divergence is recorded as a
/// row with stop_reason "diverged".
std::vector<SearchResult> grid_search_arch(const std::vector<arch::ArchitectureSpec>& grid, const Partitions& data,
                                           const TrainConfig& cfg, const SearchOptions& opts = {});

/// Trains `spec` once per augmentation config (fresh initialization each time),
/// augmenting training draws only.
std::vector<SearchResult> grid_search_augment(const arch::ArchitectureSpec& spec,
                                              const std::vector<augment::AugmentConfig>& grid, const Partitions& data,
                                              const TrainConfig& cfg, const SearchOptions& opts = {});

/// Among non-diverged rows within `delta_deg` of the lowest mean error, take the
/// lowest flop count. Rows whose flops exceed that minimum by at most
/// `flop_rel_tol` (relative) count as equally cheap; among those the lower
/// mean error wins, then fewer parameters, then lower grid index.
/// Throws std::invalid_argument when no usable row exists.
SearchResult select_best(const std::vector<SearchResult>& results, double delta_deg = 0.5,
                         double flop_rel_tol = 0.05);

/// Eight cheap cells used by desk-scale searches; includes the production model.
std::vector<arch::ArchitectureSpec> desk_subgrid();

}  // namespace hpe::trainsearch
