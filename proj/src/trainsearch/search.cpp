#include "hpe/trainsearch/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

namespace hpe::trainsearch {

namespace fs = std::filesystem;

namespace {

std::string real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_real(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("bad integer '" + s + "'");
  }
  return std::stoull(s);
}

SearchResult diverged_row(const arch::ArchitectureSpec& spec, const augment::AugmentConfig& aug, const TrainConfig& cfg,
                          std::size_t epochs) {
  SearchResult r;
  r.spec = spec;
  r.augment = aug;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.eval = {nan, nan, nan};
  r.cost = arch::cost_report(spec);
  r.epochs = epochs;
  r.stop_reason = StopReason::diverged;
  r.seed = cfg.seed;
  return r;
}

std::vector<SearchResult> run_grid(const std::vector<std::pair<arch::ArchitectureSpec, augment::AugmentConfig>>& cells,
                                   const Partitions& data, const TrainConfig& cfg, const SearchOptions& opts) {
  cfg.validate();
  if (cells.empty()) throw std::invalid_argument("search grid is empty");
  if (data.test.empty()) throw std::invalid_argument("search needs a non-empty test partition");
  const std::vector<SearchResult> done = opts.ledger ? read_ledger(*opts.ledger) : std::vector<SearchResult>{};

  std::vector<SearchResult> results;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& [spec, aug] = cells[i];
    arch::validate(spec);
    SearchResult probe;
    probe.spec = spec;
    probe.augment = aug;
    probe.seed = cfg.seed;
    const auto hit = std::find_if(done.begin(), done.end(), [&](const SearchResult& r) { return same_cell(r, probe); });
    if (hit != done.end()) {
      results.push_back(*hit);
      results.back().grid_index = i;
      if (opts.on_cell) opts.on_cell(results.back(), true);
      continue;
    }

    TrainConfig cell_cfg = cfg;
    cell_cfg.augment = aug;
    SearchResult r;
    try {
      const TrainResult trained = train(spec, data.train, data.val, cell_cfg, opts.on_epoch);
      r.spec = spec;
      r.augment = aug;
      r.eval = evaluate(trained.network, data.test, cfg.eval_batch_size);
      r.cost = arch::cost_report(spec);
      r.epochs = trained.history.epochs.size();
      r.stop_reason = trained.history.stop_reason;
      r.seed = cfg.seed;
    } catch (const TrainingDiverged& e) {
      r = diverged_row(spec, aug, cfg, e.history().epochs.size() + 1);
    }
    r.grid_index = i;
    if (opts.ledger) append_ledger(*opts.ledger, r);
    if (opts.on_cell) opts.on_cell(r, false);
    results.push_back(r);
  }
  sort_by_error(results);
  return results;
}

}  // namespace

std::string ledger_row(const SearchResult& r) {
  std::ostringstream os;
  os << arch::family_letter(r.spec.family) << ',' << r.spec.conv_blocks << ',' << r.spec.first_filters << ','
     << r.spec.dense_layers << ',' << r.spec.dense_size << ',' << real(r.augment.shift_range) << ','
     << real(r.augment.brightness_min) << ',' << real(r.augment.brightness_max) << ',' << real(r.augment.zoom_min)
     << ',' << real(r.augment.zoom_max) << ',' << real(r.eval.mae_tilt) << ',' << real(r.eval.mae_pan) << ','
     << real(r.eval.mean_error) << ',' << r.cost.trainable_params << ',' << r.cost.flops_forward << ',' << r.epochs
     << ',' << stop_reason_name(r.stop_reason) << ',' << r.seed;
  return os.str();
}

SearchResult parse_ledger_row(const std::string& line) {
  const auto f = split_csv(line);
  if (f.size() != 18) throw std::invalid_argument("expected 18 fields, got " + std::to_string(f.size()));
  SearchResult r;
  r.spec = {arch::parse_family(f[0]), static_cast<std::uint32_t>(parse_uint(f[1])),
            static_cast<std::uint32_t>(parse_uint(f[2])), static_cast<std::uint32_t>(parse_uint(f[3])),
            static_cast<std::uint32_t>(parse_uint(f[4]))};
  r.augment = {parse_real(f[5]), parse_real(f[6]), parse_real(f[7]), parse_real(f[8]), parse_real(f[9])};
  r.eval = {parse_real(f[10]), parse_real(f[11]), parse_real(f[12])};
  r.cost = {parse_uint(f[13]), parse_uint(f[14])};
  r.epochs = parse_uint(f[15]);
  r.stop_reason = parse_stop_reason(f[16]);
  r.seed = parse_uint(f[17]);
  return r;
}

std::vector<SearchResult> read_ledger(const fs::path& path) {
  std::vector<SearchResult> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == kLedgerHeader) continue;
    try {
      rows.push_back(parse_ledger_row(line));
      rows.back().grid_index = rows.size() - 1;
    } catch (const std::exception& e) {
      throw LedgerError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return rows;
}

void append_ledger(const fs::path& path, const SearchResult& r) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw LedgerError("cannot append to " + path.string());
  if (fresh) out << kLedgerHeader << '\n';
  out << ledger_row(r) << '\n';
  out.flush();
  if (!out) throw LedgerError("failed writing " + path.string());
}

bool same_cell(const SearchResult& a, const SearchResult& b) {
  return a.spec == b.spec && a.augment == b.augment && a.seed == b.seed;
}

void sort_by_error(std::vector<SearchResult>& results) {
  std::stable_sort(results.begin(), results.end(), [](const SearchResult& a, const SearchResult& b) {
    if (a.diverged() != b.diverged()) return !a.diverged();
    return a.eval.mean_error < b.eval.mean_error;
  });
}

std::vector<SearchResult> grid_search_arch(const std::vector<arch::ArchitectureSpec>& grid, const Partitions& data,
                                           const TrainConfig& cfg, const SearchOptions& opts) {
  std::vector<std::pair<arch::ArchitectureSpec, augment::AugmentConfig>> cells;
  for (const auto& spec : grid) cells.emplace_back(spec, augment::AugmentConfig{});
  return run_grid(cells, data, cfg, opts);
}

std::vector<SearchResult> grid_search_augment(const arch::ArchitectureSpec& spec,
                                              const std::vector<augment::AugmentConfig>& grid, const Partitions& data,
                                              const TrainConfig& cfg, const SearchOptions& opts) {
  std::vector<std::pair<arch::ArchitectureSpec, augment::AugmentConfig>> cells;
  for (const auto& aug : grid) {
    aug.validate();
    cells.emplace_back(spec, aug);
  }
  return run_grid(cells, data, cfg, opts);
}

SearchResult select_best(const std::vector<SearchResult>& results, double delta_deg, double flop_rel_tol) {
  if (!(delta_deg >= 0.0) || !(flop_rel_tol >= 0.0)) throw std::invalid_argument("tolerances must be non-negative");
  std::vector<const SearchResult*> usable;
  for (const auto& r : results)
    if (!r.diverged() && std::isfinite(r.eval.mean_error)) usable.push_back(&r);
  if (usable.empty()) throw std::invalid_argument("select_best needs at least one finished result");

  double best_error = std::numeric_limits<double>::infinity();
  for (const auto* r : usable) best_error = std::min(best_error, r->eval.mean_error);
  // Absorb decimal representation error in the published tables (e.g. 5.2 + 0.5).
  const double error_limit = best_error + delta_deg + 1e-9;

  std::vector<const SearchResult*> near;
  for (const auto* r : usable)
    if (r->eval.mean_error <= error_limit) near.push_back(r);
  std::uint64_t min_flops = std::numeric_limits<std::uint64_t>::max();
  for (const auto* r : near) min_flops = std::min(min_flops, r->cost.flops_forward);
  const double flop_limit = static_cast<double>(min_flops) * (1.0 + flop_rel_tol);

  const SearchResult* pick = nullptr;
  for (const auto* r : near) {
    if (static_cast<double>(r->cost.flops_forward) > flop_limit) continue;
    if (!pick || std::tie(r->eval.mean_error, r->cost.trainable_params, r->grid_index) <
                     std::tie(pick->eval.mean_error, pick->cost.trainable_params, pick->grid_index)) {
      pick = r;
    }
  }
  return *pick;
}

std::vector<arch::ArchitectureSpec> desk_subgrid() {
  using arch::Family;
  return {{Family::A, 6, 32, 1, 64},  {Family::A, 6, 32, 1, 512}, {Family::B, 6, 32, 1, 64},
          {Family::B, 6, 32, 1, 512}, {Family::C, 5, 32, 1, 512}, {Family::C, 6, 32, 1, 64},
          {Family::C, 6, 32, 1, 512}, {Family::C, 6, 32, 2, 512}};
}

}  // namespace hpe::trainsearch
