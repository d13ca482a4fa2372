// Command-line entry point: hpe <subcommand> [options]
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "hpe/cli/commands.hpp"

namespace fs = std::filesystem;
using namespace hpe::cli;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> config;
};

void add_common(CLI::App* cmd, Common& c, const std::string& out_help) {
  cmd->add_option("--seed", c.seed, "Random seed (default 1)");
  cmd->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, out_help);
}

RunConfig load(const Common& c) { return c.config ? load_run_config(*c.config) : RunConfig{}; }

std::uint64_t seed_of(const Common& c, const RunConfig& cfg) {
  return resolve_option<std::uint64_t>("--seed", c.seed, cfg.seed, 1);
}

fs::path out_of(const Common& c, const RunConfig& cfg) {
  const auto out = resolve_option<std::string>("--out", c.out, cfg.out, "");
  if (out.empty()) throw ConfigError("an output path is required (--out or \"out\" in the config)");
  return out;
}

template <typename T>
void override(RunConfig& cfg, const std::optional<T>& flag, const std::string& key, const std::string& flag_name,
              T& target) {
  check_flag_conflict(cfg, key, flag.has_value(), flag_name);
  if (flag) target = *flag;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Head pose estimation toolkit: data preparation, training, search and inference"};
  app.require_subcommand(1);

  Common pre_c, synth_c, split_c, train_c, arch_c, aug_c, eval_c, pred_c, bench_c;
  std::string detections, annotations, data, weights_path, input;
  std::optional<double> ct, min_iou, test_frac, val_frac;
  std::optional<std::string> resize;
  std::size_t n_samples = 1000, n_heads = 1000, batch = 1;
  double noise = 0.02;
  std::optional<std::string> bench_weights;

  auto* pre = app.add_subcommand("preprocess", "Crop matched detections into a 64x64 sample store");
  add_common(pre, pre_c, "Output sample-store directory");
  pre->add_option("--detections", detections, "Detections JSON-lines file")->required()->check(CLI::ExistingFile);
  pre->add_option("--annotations", annotations, "Annotations JSON-lines file")->required()->check(CLI::ExistingFile);
  pre->add_option("--ct", ct, "Confidence threshold (default 0.65)");
  pre->add_option("--min-iou", min_iou, "Minimum IoU for a match (default 0)");
  pre->add_option("--resize", resize, "bilinear or pixel_area");

  auto* synth = app.add_subcommand("synth", "Render a synthetic sample store");
  add_common(synth, synth_c, "Output sample-store directory");
  synth->add_option("-n,--samples", n_samples, "Number of samples")->check(CLI::PositiveNumber);
  synth->add_option("--noise", noise, "Uniform noise amplitude in [0, 1]")->check(CLI::Range(0.0, 1.0));

  auto* split = app.add_subcommand("split", "Stratified train/val/test split of a sample store");
  add_common(split, split_c, "Output directory for train/, val/ and test/");
  split->add_option("--data", data, "Sample-store directory")->required()->check(CLI::ExistingDirectory);
  split->add_option("--test-frac", test_frac, "Test fraction (default 0.2)");
  split->add_option("--val-frac", val_frac, "Validation fraction of the remainder (default 0.2)");

  auto* train = app.add_subcommand("train", "Train one architecture");
  add_common(train, train_c, "Output weight file");
  train->add_option("--data", data, "Directory with train/, val/ and optional test/")->required()->check(CLI::ExistingDirectory);

  auto* search_arch = app.add_subcommand("search-arch", "Architecture grid search");
  add_common(search_arch, arch_c, "Output directory for the results ledger");
  search_arch->add_option("--data", data, "Directory with train/, val/ and test/")->required()->check(CLI::ExistingDirectory);

  auto* search_aug = app.add_subcommand("search-aug", "Augmentation grid search");
  add_common(search_aug, aug_c, "Output directory for the results ledger");
  search_aug->add_option("--data", data, "Directory with train/, val/ and test/")->required()->check(CLI::ExistingDirectory);

  auto* eval = app.add_subcommand("eval", "Mean absolute error of a weight file on a sample store");
  add_common(eval, eval_c, "Optional file for the JSON report");
  eval->add_option("--weights", weights_path, "Weight file")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data, "Sample-store directory")->required()->check(CLI::ExistingDirectory);

  auto* predict = app.add_subcommand("predict", "Estimate head poses for detections or a manifest");
  add_common(predict, pred_c, "Output predictions JSON-lines file");
  predict->add_option("--weights", weights_path, "Weight file")->required()->check(CLI::ExistingFile);
  predict->add_option("--input", input, "Detections or manifest JSON-lines file")->required()->check(CLI::ExistingFile);
  predict->add_option("--ct", ct, "Confidence threshold for detections (default 0.65)");
  predict->add_option("--resize", resize, "bilinear or pixel_area");

  auto* bench = app.add_subcommand("bench", "Time forward passes of a model");
  add_common(bench, bench_c, "Optional file for the JSON report");
  bench->add_option("--weights", bench_weights, "Weight file (default: untrained production model)")
      ->check(CLI::ExistingFile);
  bench->add_option("-n,--heads", n_heads, "Number of heads to time")->check(CLI::PositiveNumber);
  bench->add_option("--batch", batch, "Heads per forward pass")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    auto pipeline_flags = [&](RunConfig& cfg) {
      override(cfg, ct, "pipeline.confidence_threshold", "--ct", cfg.pipeline.confidence_threshold);
      override(cfg, min_iou, "pipeline.min_match_iou", "--min-iou", cfg.pipeline.min_match_iou);
      check_flag_conflict(cfg, "pipeline.resize_method", resize.has_value(), "--resize");
      if (resize) cfg.pipeline.resize_method = hpe::datapipe::parse_resize_method(*resize);
    };

    if (pre->parsed()) {
      RunConfig cfg = load(pre_c);
      pipeline_flags(cfg);
      cmd_preprocess(detections, annotations, out_of(pre_c, cfg), cfg.pipeline, std::cout, std::cerr);
    } else if (synth->parsed()) {
      RunConfig cfg = load(synth_c);
      cmd_synth({n_samples, seed_of(synth_c, cfg), noise}, out_of(synth_c, cfg), std::cout);
    } else if (split->parsed()) {
      RunConfig cfg = load(split_c);
      override(cfg, test_frac, "split.test_frac", "--test-frac", cfg.test_frac);
      override(cfg, val_frac, "split.val_frac", "--val-frac", cfg.val_frac);
      cmd_split(data, out_of(split_c, cfg), cfg.test_frac, cfg.val_frac, seed_of(split_c, cfg), std::cout);
    } else if (train->parsed()) {
      RunConfig cfg = load(train_c);
      cmd_train(cfg, seed_of(train_c, cfg), data, out_of(train_c, cfg), std::cout);
    } else if (search_arch->parsed()) {
      RunConfig cfg = load(arch_c);
      cmd_search_arch(cfg, seed_of(arch_c, cfg), data, out_of(arch_c, cfg), std::cout);
    } else if (search_aug->parsed()) {
      RunConfig cfg = load(aug_c);
      cmd_search_aug(cfg, seed_of(aug_c, cfg), data, out_of(aug_c, cfg), std::cout);
    } else if (eval->parsed()) {
      RunConfig cfg = load(eval_c);
      const auto out = resolve_option<std::string>("--out", eval_c.out, cfg.out, "");
      if (out.empty()) {
        cmd_eval(weights_path, data, std::cout);
      } else {
        std::ofstream report(out);
        cmd_eval(weights_path, data, report);
      }
    } else if (predict->parsed()) {
      RunConfig cfg = load(pred_c);
      pipeline_flags(cfg);
      const auto n = cmd_predict(weights_path, input, out_of(pred_c, cfg), cfg.pipeline, std::cerr);
      std::cout << "wrote " << n << " predictions\n";
    } else if (bench->parsed()) {
      RunConfig cfg = load(bench_c);
      const auto report = cmd_bench(bench_weights ? std::optional<fs::path>(*bench_weights) : std::nullopt, n_heads,
                                    batch, seed_of(bench_c, cfg), std::cout);
      const auto out = resolve_option<std::string>("--out", bench_c.out, cfg.out, "");
      if (!out.empty()) {
        std::ofstream f(out);
        f << "{\"n_heads\": " << report.n_heads << ", \"mean_ms_per_head\": " << report.mean_ms_per_head
          << ", \"p50_ms\": " << report.p50_ms << ", \"p95_ms\": " << report.p95_ms
          << ", \"heads_per_second\": " << report.heads_per_second << "}\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
