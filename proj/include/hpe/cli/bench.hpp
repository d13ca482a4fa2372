#pragma once

#include <cstdint>
#include <vector>

#include "hpe/engine/network.hpp"

namespace hpe::cli {

struct BenchReport {
  std::size_t n_heads = 0;
  double mean_ms_per_head = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double heads_per_second = 0.0;
};

/// Summary of per-head latencies; percentiles use the nearest-rank method.
BenchReport summarize_latencies(std::vector<double> per_head_ms);

/// Times forward passes over random 64x64 inputs in batches of `batch`; each
/// head is charged its batch time divided by the batch size. One untimed
/// warm-up batch runs first.
BenchReport run_bench(const engine::Network<float>& net, std::size_t n_heads, std::size_t batch, std::uint64_t seed);

}  // namespace hpe::cli
