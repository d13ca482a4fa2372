#include "hpe/cli/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "hpe/common/random.hpp"

namespace hpe::cli {

BenchReport summarize_latencies(std::vector<double> per_head_ms) {
  if (per_head_ms.empty()) throw std::invalid_argument("no latencies to summarize");
  std::sort(per_head_ms.begin(), per_head_ms.end());
  const auto rank = [&](double q) {
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(per_head_ms.size())));
    return per_head_ms[std::clamp<std::size_t>(k, 1, per_head_ms.size()) - 1];
  };
  BenchReport r;
  r.n_heads = per_head_ms.size();
  r.mean_ms_per_head = std::accumulate(per_head_ms.begin(), per_head_ms.end(), 0.0) / static_cast<double>(r.n_heads);
  r.p50_ms = rank(0.50);
  r.p95_ms = rank(0.95);
  r.heads_per_second = r.mean_ms_per_head > 0.0 ? 1000.0 / r.mean_ms_per_head : 0.0;
  return r;
}

BenchReport run_bench(const engine::Network<float>& net, std::size_t n_heads, std::size_t batch, std::uint64_t seed) {
  if (n_heads == 0) throw std::invalid_argument("n_heads must be at least 1");
  if (batch == 0) throw std::invalid_argument("batch must be at least 1");
  const auto in = net.input_shape();
  std::mt19937_64 rng(seed);
  auto random_batch = [&](std::size_t n) {
    engine::Tensor<float> t({n, in.channels, in.height, in.width});
    for (auto& v : t.values()) v = static_cast<float>(uniform01(rng));
    return t;
  };

  net.forward(random_batch(std::min(batch, n_heads)));
  std::vector<double> per_head;
  per_head.reserve(n_heads);
  for (std::size_t done = 0; done < n_heads;) {
    const std::size_t n = std::min(batch, n_heads - done);
    const auto input = random_batch(n);
    const auto start = std::chrono::steady_clock::now();
    const auto out = net.forward(input);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (out.size() == 0) throw std::runtime_error("empty network output");
    per_head.insert(per_head.end(), n, ms / static_cast<double>(n));
    done += n;
  }
  return summarize_latencies(std::move(per_head));
}

}  // namespace hpe::cli
