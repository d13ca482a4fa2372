#include "hpe/datapipe/split.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "hpe/common/random.hpp"

namespace hpe::datapipe {

namespace {

std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

}  // namespace

SplitIndices stratified_split(std::span<const int> class_ids, double test_frac, double val_frac_of_rest,
                              std::uint64_t seed) {
  if (!(test_frac > 0.0 && test_frac < 1.0) || !(val_frac_of_rest > 0.0 && val_frac_of_rest < 1.0)) {
    throw std::invalid_argument("split fractions must lie in (0, 1)");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < class_ids.size(); ++i) by_class[class_ids[i]].push_back(i);

  SplitIndices split;
  for (auto& [class_id, members] : by_class) {
    std::mt19937_64 rng(derive_seed({seed, static_cast<std::uint64_t>(class_id)}));
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t n = members.size();
    const std::size_t n_test = std::min(n, round_half_up(test_frac * static_cast<double>(n)));
    const std::size_t n_val = std::min(n - n_test, round_half_up(val_frac_of_rest * static_cast<double>(n - n_test)));
    auto it = members.begin();
    split.test.insert(split.test.end(), it, it + static_cast<std::ptrdiff_t>(n_test));
    it += static_cast<std::ptrdiff_t>(n_test);
    split.val.insert(split.val.end(), it, it + static_cast<std::ptrdiff_t>(n_val));
    it += static_cast<std::ptrdiff_t>(n_val);
    split.train.insert(split.train.end(), it, members.end());
  }
  return split;
}

SamplePartitions stratified_split(const std::vector<Sample>& samples, double test_frac, double val_frac_of_rest,
                                  std::uint64_t seed) {
  std::vector<int> ids;
  ids.reserve(samples.size());
  for (const auto& s : samples) ids.push_back(s.class_id);
  const SplitIndices idx = stratified_split(ids, test_frac, val_frac_of_rest, seed);
  SamplePartitions parts;
  for (auto i : idx.train) parts.train.push_back(samples[i]);
  for (auto i : idx.val) parts.val.push_back(samples[i]);
  for (auto i : idx.test) parts.test.push_back(samples[i]);
  return parts;
}

BalancedSampler::BalancedSampler(std::span<const BucketKey> keys, std::size_t batch_size, std::uint64_t seed)
    : total_(keys.size()), batch_size_(batch_size), seed_(seed) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
  std::map<BucketKey, std::vector<std::size_t>> grouped;
  for (std::size_t i = 0; i < keys.size(); ++i) grouped[keys[i]].push_back(i);
  for (auto& [key, members] : grouped) buckets_.push_back(std::move(members));
}

std::size_t BalancedSampler::batches_per_epoch() const { return (total_ + batch_size_ - 1) / batch_size_; }

std::vector<std::vector<std::size_t>> BalancedSampler::epoch_batches(std::uint64_t epoch) const {
  std::vector<std::vector<std::size_t>> batches;
  if (buckets_.empty()) return batches;
  std::mt19937_64 rng(derive_seed({seed_, epoch}));
  std::size_t remaining = total_;
  while (remaining > 0) {
    const std::size_t n = std::min(batch_size_, remaining);
    std::vector<std::size_t> batch(n);
    for (auto& slot : batch) {
      const auto& bucket = buckets_[static_cast<std::size_t>(
          uniform_int(rng, 0, static_cast<std::int64_t>(buckets_.size()) - 1))];
      slot = bucket[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(bucket.size()) - 1))];
    }
    batches.push_back(std::move(batch));
    remaining -= n;
  }
  return batches;
}

std::vector<BalancedSampler::BucketKey> bucket_keys(const std::vector<Sample>& samples) {
  std::vector<BalancedSampler::BucketKey> keys;
  keys.reserve(samples.size());
  for (const auto& s : samples) keys.emplace_back(s.class_id, s.source);
  return keys;
}

}  // namespace hpe::datapipe
