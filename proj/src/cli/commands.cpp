#include "hpe/cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "hpe/arch/weights_io.hpp"
#include "hpe/cli/predict.hpp"
#include "hpe/common/random.hpp"

namespace hpe::cli {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void print_results(const std::vector<trainsearch::SearchResult>& rows, std::ostream& out) {
  out << "rank  config                          mean_err  tilt     pan      params      mflops\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    char line[200];
    std::snprintf(line, sizeof line, "%-5zu %-14s %4.2f %4.2f %4.2f %-3s %8s  %-8s %-8s %-11llu %.1f\n", i + 1,
                  r.spec.label().c_str(), r.augment.shift_range, r.augment.brightness_max, r.augment.zoom_max,
                  "", r.diverged() ? "diverged" : fixed(r.eval.mean_error, 3).c_str(), fixed(r.eval.mae_tilt, 3).c_str(),
                  fixed(r.eval.mae_pan, 3).c_str(), static_cast<unsigned long long>(r.cost.trainable_params),
                  static_cast<double>(r.cost.flops_forward) / 1e6);
    out << line;
  }
}

trainsearch::TrainConfig seeded(const RunConfig& cfg, std::uint64_t seed) {
  trainsearch::TrainConfig t = cfg.train;
  t.seed = seed;
  return t;
}

void print_epoch(std::ostream& out, const trainsearch::EpochRecord& e) {
  out << "  epoch " << e.epoch << "  loss " << fixed(e.train_loss, 6) << "  val " << fixed(e.val_error, 3)
      << "  lr " << e.learning_rate << (e.lr_decayed ? "  (lr decay)" : "") << '\n'
      << std::flush;
}

}  // namespace

datapipe::PreprocessResult cmd_preprocess(const fs::path& detections, const fs::path& annotations,
                                          const fs::path& out_dir, const datapipe::PipelineConfig& cfg,
                                          std::ostream& out, std::ostream& err) {
  const auto dets = datapipe::read_detections(detections);
  const auto anns = datapipe::read_annotations(annotations);
  auto result = datapipe::preprocess(anns, dets, cfg);
  for (const auto& p : result.unreadable_images) err << "warning: skipping unreadable image " << p.string() << '\n';
  if (result.rejected_out_of_bounds) {
    err << "warning: " << result.rejected_out_of_bounds << " matched boxes larger than their image were discarded\n";
  }
  datapipe::write_sample_store(out_dir, result.samples);
  out << "CT    valid_crops  T       F       samples\n"
      << fixed(cfg.confidence_threshold, 2) << "  " << result.stats.n_valid_crops << "  "
      << fixed(result.stats.t_ratio, 4) << "  " << fixed(result.stats.f_ratio, 4) << "  " << result.samples.size()
      << '\n';
  return result;
}

void cmd_synth(const SyntheticSpec& spec, const fs::path& out_dir, std::ostream& out) {
  const auto samples = synth_corpus(spec);
  datapipe::write_sample_store(out_dir, samples);
  out << "wrote " << samples.size() << " synthetic samples to " << out_dir.string() << '\n';
}

datapipe::SplitIndices cmd_split(const fs::path& store, const fs::path& out_dir, double test_frac, double val_frac,
                                 std::uint64_t seed, std::ostream& out) {
  const auto samples = datapipe::read_sample_store(store);
  std::vector<int> ids;
  for (const auto& s : samples) ids.push_back(s.class_id);
  const auto split = datapipe::stratified_split(ids, test_frac, val_frac, seed);
  const auto write = [&](const char* name, const std::vector<std::size_t>& idx) {
    std::vector<datapipe::Sample> part;
    part.reserve(idx.size());
    for (auto i : idx) part.push_back(samples[i]);
    datapipe::write_sample_store(out_dir / name, part);
  };
  write("train", split.train);
  write("val", split.val);
  write("test", split.test);
  out << "train " << split.train.size() << "  val " << split.val.size() << "  test " << split.test.size() << '\n';
  return split;
}

trainsearch::Partitions load_partitions(const fs::path& data_dir, bool need_test) {
  trainsearch::Partitions p;
  p.train = datapipe::read_sample_store(data_dir / "train");
  p.val = datapipe::read_sample_store(data_dir / "val");
  if (need_test || fs::exists(data_dir / "test" / datapipe::kSampleIndexName)) {
    p.test = datapipe::read_sample_store(data_dir / "test");
  }
  if (p.train.empty() || p.val.empty() || (need_test && p.test.empty())) {
    throw std::invalid_argument(data_dir.string() + ": partitions must be non-empty");
  }
  return p;
}

trainsearch::TrainResult cmd_train(const RunConfig& cfg, std::uint64_t seed, const fs::path& data_dir,
                                   const fs::path& weights, std::ostream& out) {
  const auto data = load_partitions(data_dir, false);
  out << "training " << cfg.architecture.label() << " on " << data.train.size() << " samples\n";
  auto result = trainsearch::train(cfg.architecture, data.train, data.val, seeded(cfg, seed),
                                   [&](const trainsearch::EpochRecord& e) { print_epoch(out, e); });
  if (weights.has_parent_path()) fs::create_directories(weights.parent_path());
  arch::save_weights(weights, cfg.architecture, result.network);

  std::ofstream hist(weights.string() + ".history.csv");
  hist << "epoch,train_loss,val_error,learning_rate,lr_decayed\n";
  for (const auto& e : result.history.epochs) {
    hist << e.epoch << ',' << e.train_loss << ',' << e.val_error << ',' << e.learning_rate << ',' << e.lr_decayed
         << '\n';
  }
  out << "stopped: " << trainsearch::stop_reason_name(result.history.stop_reason) << " after "
      << result.history.epochs.size() << " epochs; best epoch " << result.history.best_epoch << '\n';
  if (!data.test.empty()) {
    const auto ev = trainsearch::evaluate(result.network, data.test, cfg.train.eval_batch_size);
    out << "test: tilt " << fixed(ev.mae_tilt, 3) << "  pan " << fixed(ev.mae_pan, 3) << "  mean "
        << fixed(ev.mean_error, 3) << '\n';
  }
  out << "weights: " << weights.string() << '\n';
  return result;
}

std::vector<trainsearch::SearchResult> cmd_search_arch(const RunConfig& cfg, std::uint64_t seed,
                                                       const fs::path& data_dir, const fs::path& out_dir,
                                                       std::ostream& out) {
  const auto data = load_partitions(data_dir, true);
  fs::create_directories(out_dir);
  trainsearch::SearchOptions opts;
  opts.ledger = out_dir / "arch_ledger.csv";
  opts.on_cell = [&](const trainsearch::SearchResult& r, bool reused) {
    out << (reused ? "reused  " : "trained ") << r.spec.label() << "  mean error "
        << (r.diverged() ? std::string("diverged") : fixed(r.eval.mean_error, 3)) << '\n'
        << std::flush;
  };
  const auto results = trainsearch::grid_search_arch(cfg.arch_grid, data, seeded(cfg, seed), opts);
  print_results(results, out);
  const auto best = trainsearch::select_best(results);
  out << "selected: " << best.spec.label() << " (" << fixed(best.eval.mean_error, 3) << " deg, "
      << fixed(static_cast<double>(best.cost.flops_forward) / 1e6, 1) << " Mflop)\n";
  return results;
}

std::vector<trainsearch::SearchResult> cmd_search_aug(const RunConfig& cfg, std::uint64_t seed,
                                                      const fs::path& data_dir, const fs::path& out_dir,
                                                      std::ostream& out) {
  const auto data = load_partitions(data_dir, true);
  fs::create_directories(out_dir);
  trainsearch::SearchOptions opts;
  opts.ledger = out_dir / "augment_ledger.csv";
  opts.on_cell = [&](const trainsearch::SearchResult& r, bool reused) {
    out << (reused ? "reused  " : "trained ") << "shift " << r.augment.shift_range << " brightness "
        << r.augment.brightness_min << "-" << r.augment.brightness_max << " zoom " << r.augment.zoom_min << "-"
        << r.augment.zoom_max << "  mean error "
        << (r.diverged() ? std::string("diverged") : fixed(r.eval.mean_error, 3)) << '\n'
        << std::flush;
  };
  const auto results =
      trainsearch::grid_search_augment(cfg.architecture, cfg.augment_grid, data, seeded(cfg, seed), opts);
  print_results(results, out);
  return results;
}

trainsearch::EvalReport cmd_eval(const fs::path& weights, const fs::path& store, std::ostream& out) {
  const auto model = arch::load_weights(weights);
  const auto samples = datapipe::read_sample_store(store);
  const auto ev = trainsearch::evaluate(model.network, samples);
  out << "{\"samples\": " << samples.size() << ", \"mae_tilt\": " << fixed(ev.mae_tilt, 6)
      << ", \"mae_pan\": " << fixed(ev.mae_pan, 6) << ", \"mean_error\": " << fixed(ev.mean_error, 6) << "}\n";
  return ev;
}

std::size_t cmd_predict(const fs::path& weights, const fs::path& input, const fs::path& out_jsonl,
                        const datapipe::PipelineConfig& cfg, std::ostream& err) {
  const auto model = arch::load_weights(weights);
  const auto boxes = read_head_boxes(input);
  std::ofstream out(out_jsonl);
  if (!out) throw std::runtime_error("cannot write " + out_jsonl.string());

  fs::path loaded_path;
  std::optional<datapipe::Image> frame;
  std::size_t written = 0;
  for (const auto& head : boxes) {
    if (head.confidence && *head.confidence < cfg.confidence_threshold) continue;
    if (!frame || loaded_path != head.image) {
      loaded_path = head.image;
      try {
        frame = datapipe::read_netpbm(head.image);
      } catch (const datapipe::ImageIoError& e) {
        frame.reset();
        err << "skipped " << head.image.string() << ": " << e.what() << '\n';
        continue;
      }
    }
    const auto start = std::chrono::steady_clock::now();
    const auto pose = estimate_pose(model.network, *frame, head.bbox, cfg);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (!pose) {
      err << "skipped " << head.image.string() << " [" << head.bbox.x << ", " << head.bbox.y << ", " << head.bbox.w
          << ", " << head.bbox.h << "]: box does not fit inside the image\n";
      continue;
    }
    out << prediction_to_json({head.image, head.bbox, (*pose)[0], (*pose)[1], ms}) << '\n';
    ++written;
  }
  return written;
}

BenchReport cmd_bench(const std::optional<fs::path>& weights, std::size_t n_heads, std::size_t batch,
                      std::uint64_t seed, std::ostream& out) {
  const auto net = weights ? arch::load_weights(*weights).network
                           : arch::build_network<float>(arch::realhepo_net_spec(), seed);
  const auto r = run_bench(net, n_heads, batch, seed);
  out << "heads " << r.n_heads << "  batch " << batch << "\n"
      << "mean " << fixed(r.mean_ms_per_head, 4) << " ms/head  p50 " << fixed(r.p50_ms, 4) << "  p95 "
      << fixed(r.p95_ms, 4) << "  (" << fixed(r.heads_per_second, 1) << " heads/s)\n"
      << "for reference: the original model was measured at ~0.26 ms/head (network only) and ~166 full\n"
      << "pose estimations/s on a GTX 1060 GPU; CPU figures are not directly comparable\n";
  return r;
}

}  // namespace hpe::cli
