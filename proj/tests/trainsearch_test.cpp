#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <unistd.h>

#include "hpe/cli/synth.hpp"
#include "support/scheduler_script.hpp"
#include "support/selection_tables.hpp"
#include "hpe/trainsearch/search.hpp"

using namespace hpe::trainsearch;
using hpe::arch::ArchitectureSpec;
using hpe::arch::Family;
namespace fs = std::filesystem;
using hpe::testing::row;
using hpe::testing::run_script;
using hpe::testing::table2;
using hpe::testing::table3;
using hpe::testing::table4;
using hpe::testing::Trace;

namespace {

std::vector<double> repeat(double lr, std::size_t n) { return std::vector<double>(n, lr); }

std::vector<double> concat(std::initializer_list<std::vector<double>> parts) {
  std::vector<double> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// Small enough that a few epochs run in well under a second.
const ArchitectureSpec kTinySpec{Family::A, 6, 3, 1, 8};

std::vector<Sample> synth(std::size_t n, std::uint64_t seed) { return hpe::cli::synth_corpus({n, seed, 0.02}); }

TrainConfig quick_config(std::size_t epochs) {
  TrainConfig cfg;
  cfg.batch_size = 16;
  cfg.schedule.max_epochs = epochs;
  cfg.seed = 21;
  return cfg;
}

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& tag)
      : path(fs::temp_directory_path() / ("hpe_" + tag + "_" + std::to_string(::getpid()) + ".csv")) {
    fs::remove(path);
  }
  ~TempFile() { fs::remove(path); }
};

}  // namespace

TEST(Scheduler, StrictImprovementRunsToMaxEpochs) {
  std::vector<double> errors(500);
  for (std::size_t i = 0; i < errors.size(); ++i) errors[i] = 50.0 - 0.05 * static_cast<double>(i);
  const Trace t = run_script(errors, 500);
  EXPECT_EQ(t.reason, StopReason::max_epochs);
  EXPECT_EQ(t.epochs, 500u);
  EXPECT_TRUE(t.decays.empty());
  EXPECT_EQ(t.best_epoch, 500u);
}

TEST(Scheduler, ConstantErrorStopsAtElevenWithOneDecay) {
  const Trace t = run_script({7.0}, 500);
  EXPECT_EQ(t.reason, StopReason::patience);
  EXPECT_EQ(t.epochs, 11u);
  EXPECT_EQ(t.decays, std::vector<std::size_t>{11});
  EXPECT_EQ(t.lrs, repeat(1e-3, 11));
  EXPECT_EQ(t.best_epoch, 1u);
}

TEST(Scheduler, SubThresholdGainsDecayEveryTenEpochs) {
  std::vector<double> errors(35);
  for (std::size_t i = 0; i < errors.size(); ++i) errors[i] = 5.0 - 1e-6 * static_cast<double>(i);
  const Trace t = run_script(errors, 35);
  EXPECT_EQ(t.reason, StopReason::max_epochs);
  EXPECT_EQ(t.decays, (std::vector<std::size_t>{11, 21, 31}));
  EXPECT_EQ(t.lrs, concat({repeat(1e-3, 11), repeat(1e-3 * 0.1, 10), repeat(1e-3 * 0.1 * 0.1, 10),
                           repeat(1e-3 * 0.1 * 0.1 * 0.1, 4)}));
}

TEST(Scheduler, PlateauAfterImprovement) {
  const Trace t = run_script({5, 4, 3, 2, 1}, 500);
  EXPECT_EQ(t.reason, StopReason::patience);
  EXPECT_EQ(t.epochs, 15u);
  EXPECT_EQ(t.decays, std::vector<std::size_t>{15});
  EXPECT_EQ(t.best_epoch, 5u);
}

TEST(Scheduler, CountersDesynchroniseOnSmallGain) {
  // Epoch 12 is a new best for early stopping but not for the LR monitor.
  const auto errors = concat({{5.0, 4.0}, repeat(4.0, 9), {3.99995}});
  const Trace t = run_script(errors, 500);
  EXPECT_EQ(t.reason, StopReason::patience);
  EXPECT_EQ(t.epochs, 22u);
  EXPECT_EQ(t.decays, (std::vector<std::size_t>{12, 22}));
  EXPECT_EQ(t.lrs, concat({repeat(1e-3, 12), repeat(1e-3 * 0.1, 10)}));
  EXPECT_EQ(t.best_epoch, 12u);
}

TEST(Scheduler, NonFiniteLossDiverges) {
  ScheduleConfig cfg;
  try {
    run_schedule(cfg, [](std::size_t epoch, double) {
      return EpochOutcome{epoch == 4 ? std::numeric_limits<double>::quiet_NaN() : 1.0, 3.0};
    });
    FAIL() << "expected TrainingDiverged";
  } catch (const TrainingDiverged& e) {
    EXPECT_EQ(e.history().epochs.size(), 3u);
    EXPECT_EQ(e.history().stop_reason, StopReason::diverged);
  }
}

TEST(Scheduler, RejectsBadConfig) {
  ScheduleConfig cfg;
  cfg.lr_factor = 1.0;
  EXPECT_THROW(PlateauScheduler{cfg}, std::invalid_argument);
  cfg = {};
  cfg.initial_lr = 0.0;
  EXPECT_THROW(PlateauScheduler{cfg}, std::invalid_argument);
}

TEST(Evaluate, ExactAndConstantOffset) {
  auto net = hpe::arch::network_skeleton<float>(kTinySpec);
  net.params().back().bias[0] = 0.02f;
  net.params().back().bias[1] = 0.04f;
  std::vector<Sample> zero_labels = synth(10, 1);
  for (auto& s : zero_labels) s.tilt = 0.0, s.pan = 0.0;
  const auto off = evaluate(net, zero_labels);
  EXPECT_NEAR(off.mae_tilt, 2.0, 1e-5);
  EXPECT_NEAR(off.mae_pan, 4.0, 1e-5);
  EXPECT_NEAR(off.mean_error, 3.0, 1e-5);

  std::vector<Sample> exact = zero_labels;
  for (auto& s : exact) s.tilt = 0.02f * kLabelScale, s.pan = 0.04f * kLabelScale;
  const auto zero = evaluate(net, exact);
  EXPECT_EQ(zero.mae_tilt, 0.0);
  EXPECT_EQ(zero.mae_pan, 0.0);
  EXPECT_EQ(zero.mean_error, 0.0);
}

TEST(Evaluate, MatchesPerSampleOracle) {
  const auto net = hpe::arch::build_network<float>(kTinySpec, 3);
  const auto samples = synth(37, 4);
  const auto report = evaluate(net, samples, 8);
  double tilt = 0.0, pan = 0.0;
  for (std::size_t i = samples.size(); i-- > 0;) {
    hpe::engine::Tensor<float> in({1, 64, 64}, samples[i].image.pixels);
    const auto out = net.forward(in);
    tilt += std::abs(static_cast<double>(out[0]) * 100.0 - samples[i].tilt);
    pan += std::abs(static_cast<double>(out[1]) * 100.0 - samples[i].pan);
  }
  EXPECT_NEAR(report.mae_tilt, tilt / 37.0, 1e-9);
  EXPECT_NEAR(report.mae_pan, pan / 37.0, 1e-9);
  EXPECT_DOUBLE_EQ(report.mean_error, (report.mae_tilt + report.mae_pan) / 2.0);
  EXPECT_THROW(evaluate(net, {}), std::invalid_argument);
}

TEST(Train, DeterministicAndRestoresBestWeights) {
  const auto tr = synth(96, 5), va = synth(32, 6);
  const TrainConfig cfg = quick_config(6);
  const auto a = train(kTinySpec, tr, va, cfg);
  const auto b = train(kTinySpec, tr, va, cfg);
  EXPECT_EQ(a.history, b.history);
  EXPECT_TRUE(a.network == b.network);
  ASSERT_EQ(a.history.epochs.size(), 6u);
  const double restored = evaluate(a.network, va, cfg.eval_batch_size).mean_error;
  for (const auto& e : a.history.epochs) EXPECT_LE(restored, e.val_error + 1e-9);
  EXPECT_EQ(restored, a.history.epochs.at(a.history.best_epoch - 1).val_error);
}

TEST(Train, LearningRateOnlyDropsByFactor) {
  const auto tr = synth(64, 7), va = synth(16, 8);
  TrainConfig cfg = quick_config(12);
  cfg.schedule.patience = 3;
  cfg.schedule.min_delta = 1000.0;  // the LR monitor never sees an improvement after epoch 1
  const auto r = train(kTinySpec, tr, va, cfg);
  std::size_t drops = 0;
  for (std::size_t i = 1; i < r.history.epochs.size(); ++i) {
    const double prev = r.history.epochs[i - 1].learning_rate, cur = r.history.epochs[i].learning_rate;
    if (cur != prev) {
      ++drops;
      EXPECT_EQ(cur, prev * cfg.schedule.lr_factor);
      EXPECT_TRUE(r.history.epochs[i - 1].lr_decayed);
    }
    EXPECT_LE(cur, prev);
  }
  EXPECT_GT(drops, 0u);
}

TEST(Train, AugmentationLeavesHeldOutDataUntouched) {
  const auto tr = synth(48, 9);
  const auto va = synth(16, 10);
  const auto va_copy = va;
  TrainConfig cfg = quick_config(2);
  cfg.augment = {0.2, 0.5, 1.5, 0.75, 1.25};
  const auto r = train(kTinySpec, tr, va, cfg);
  ASSERT_EQ(va.size(), va_copy.size());
  for (std::size_t i = 0; i < va.size(); ++i) EXPECT_EQ(va[i].image, va_copy[i].image);
  // Augmented training differs from plain training with the same seed.
  const auto plain = train(kTinySpec, tr, va, quick_config(2));
  EXPECT_NE(r.history.epochs[0].train_loss, plain.history.epochs[0].train_loss);
}

TEST(Train, NonFiniteInputDiverges) {
  auto tr = synth(16, 11);
  for (auto& s : tr) s.image.pixels[100] = std::numeric_limits<float>::infinity();
  EXPECT_THROW(train(kTinySpec, tr, synth(8, 12), quick_config(3)), TrainingDiverged);
}

TEST(Ledger, RowRoundTrip) {
  SearchResult r = row(Family::B, 4, 64, 2, 128, 7.25, 321, 0);
  r.augment = {0.1, 0.75, 1.25, 0.5, 1.5};
  r.eval = {6.5, 8.0, 7.25};
  r.epochs = 42;
  r.stop_reason = StopReason::patience;
  r.seed = 99;
  const auto back = parse_ledger_row(ledger_row(r));
  EXPECT_TRUE(same_cell(back, r));
  EXPECT_EQ(back.eval.mean_error, 7.25);
  EXPECT_EQ(back.cost, r.cost);
  EXPECT_EQ(back.epochs, 42u);
  EXPECT_EQ(back.stop_reason, StopReason::patience);
  EXPECT_EQ(ledger_row(back), ledger_row(r));
}

TEST(Ledger, HeaderAppendAndErrors) {
  TempFile file("ledger");
  EXPECT_TRUE(read_ledger(file.path).empty());
  append_ledger(file.path, row(Family::A, 1, 32, 1, 64, 9.0, 10, 0));
  append_ledger(file.path, row(Family::C, 6, 32, 1, 512, 5.0, 193, 1));
  std::ifstream in(file.path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, kLedgerHeader);
  EXPECT_EQ(read_ledger(file.path).size(), 2u);
  {
    std::ofstream out(file.path, std::ios::app);
    out << "C,6,32,1\n";
  }
  try {
    read_ledger(file.path);
    FAIL() << "expected LedgerError";
  } catch (const LedgerError& e) {
    EXPECT_NE(std::string(e.what()).find(":4:"), std::string::npos) << e.what();
  }
}

TEST(SelectBest, PublishedTables) {
  EXPECT_EQ(select_best(table2()).cost.flops_forward, 417000000u);
  EXPECT_EQ(select_best(table3()).cost.flops_forward, 366000000u);
  const auto c = select_best(table4());
  EXPECT_EQ(c.cost.flops_forward, 206000000u);
  EXPECT_EQ(c.spec, hpe::arch::realhepo_net_spec());
}

TEST(SelectBest, TwoRowExamples) {
  const std::vector<SearchResult> a{row(Family::A, 6, 256, 2, 256, 5.2, 1637, 0),
                                    row(Family::A, 6, 128, 3, 512, 5.64, 417, 1)};
  EXPECT_EQ(select_best(a).cost.flops_forward, 417000000u);
  const std::vector<SearchResult> c{row(Family::C, 6, 64, 2, 256, 5.62, 813, 0),
                                    row(Family::C, 6, 32, 1, 512, 5.69, 206, 1)};
  EXPECT_EQ(select_best(c).cost.flops_forward, 206000000u);
  EXPECT_EQ(select_best({c[0]}).grid_index, 0u);
  EXPECT_THROW(select_best({}), std::invalid_argument);
}

TEST(SelectBest, OutsideDeltaIsIgnoredAndDivergedSkipped) {
  std::vector<SearchResult> rows{row(Family::A, 6, 256, 2, 256, 5.0, 1637, 0),
                                 row(Family::A, 6, 32, 1, 64, 5.6, 50, 1),
                                 row(Family::A, 6, 32, 1, 64, 1.0, 10, 2)};
  rows[2].stop_reason = StopReason::diverged;
  EXPECT_EQ(select_best(rows).grid_index, 0u);
}

TEST(SelectBest, InvariantUnderFlopRescaling) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SearchResult> rows;
    for (std::size_t i = 0; i < 12; ++i) {
      rows.push_back(row(Family::C, 6, 32, 1 + static_cast<std::uint32_t>(rng() % 3), 64u << (rng() % 4),
                         5.0 + static_cast<double>(rng() % 100) / 100.0, 100 + rng() % 2000, i));
    }
    const auto base = select_best(rows).grid_index;
    for (std::uint64_t k : {2u, 7u, 1000u}) {
      auto scaled = rows;
      for (auto& r : scaled) r.cost.flops_forward *= k;
      ASSERT_EQ(select_best(scaled).grid_index, base);
    }
  }
}

TEST(GridSearch, SingleSpecSortedAndResumable) {
  Partitions data{synth(48, 14), synth(16, 15), synth(16, 16)};
  const TrainConfig cfg = quick_config(2);
  const auto one = grid_search_arch({kTinySpec}, data, cfg);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].cost, hpe::arch::cost_report(kTinySpec));

  const std::vector<ArchitectureSpec> grid{kTinySpec, {Family::B, 6, 3, 1, 8}, {Family::C, 6, 2, 2, 8}};
  TempFile file("search");
  SearchOptions opts;
  opts.ledger = file.path;
  const auto first = grid_search_arch(grid, data, cfg, opts);
  ASSERT_EQ(first.size(), 3u);
  for (std::size_t i = 1; i < first.size(); ++i) EXPECT_LE(first[i - 1].eval.mean_error, first[i].eval.mean_error);
  EXPECT_EQ(read_ledger(file.path).size(), 3u);

  // Drop the last row and rerun: only that cell trains again.
  std::vector<std::string> lines;
  {
    std::ifstream in(file.path);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
  }
  {
    std::ofstream out(file.path, std::ios::trunc);
    for (std::size_t i = 0; i + 1 < lines.size(); ++i) out << lines[i] << '\n';
  }
  std::size_t retrained = 0;
  opts.on_cell = [&](const SearchResult&, bool reused) { retrained += !reused; };
  const auto second = grid_search_arch(grid, data, cfg, opts);
  EXPECT_EQ(retrained, 1u);
  ASSERT_EQ(second.size(), first.size());
  for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(ledger_row(second[i]), ledger_row(first[i]));
  std::vector<std::string> reread;
  {
    std::ifstream in(file.path);
    for (std::string l; std::getline(in, l);) reread.push_back(l);
  }
  std::sort(lines.begin(), lines.end());
  std::sort(reread.begin(), reread.end());
  EXPECT_EQ(reread, lines);
}

TEST(GridSearch, AugmentGridTrainsEachConfig) {
  Partitions data{synth(32, 17), synth(16, 18), synth(16, 19)};
  const std::vector<hpe::augment::AugmentConfig> grid{{}, {0.0, 0.5, 1.5, 1.0, 1.0}};
  const auto results = grid_search_augment(kTinySpec, grid, data, quick_config(2));
  ASSERT_EQ(results.size(), 2u);
  EXPECT_LE(results[0].eval.mean_error, results[1].eval.mean_error);
  for (const auto& r : results) EXPECT_EQ(r.spec, kTinySpec);
  // The identity cell reproduces a plain phase-1 run of the same spec.
  const auto plain = grid_search_arch({kTinySpec}, data, quick_config(2));
  const auto& identity = results[0].augment.is_identity() ? results[0] : results[1];
  EXPECT_EQ(identity.eval.mean_error, plain[0].eval.mean_error);
}

TEST(GridSearch, DeskSubgrid) {
  const auto grid = desk_subgrid();
  EXPECT_EQ(grid.size(), 8u);
  for (const auto& s : grid) EXPECT_TRUE(hpe::arch::in_search_grid(s));
  EXPECT_NE(std::find(grid.begin(), grid.end(), hpe::arch::realhepo_net_spec()), grid.end());
  EXPECT_EQ(desk_scale(TrainConfig{}).schedule.max_epochs, 30u);
}
