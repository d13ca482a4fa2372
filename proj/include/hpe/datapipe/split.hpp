#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "hpe/datapipe/sample.hpp"

namespace hpe::datapipe {

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

/// Per class: shuffle by seed, move round(test_frac * n) to test, then
/// round(val_frac_of_rest * remaining) to validation, the rest to train.
/// Rounding is half-up. Classes are emitted in ascending id order.
SplitIndices stratified_split(std::span<const int> class_ids, double test_frac, double val_frac_of_rest,
                              std::uint64_t seed);

struct SamplePartitions {
  std::vector<Sample> train, val, test;
};

SamplePartitions stratified_split(const std::vector<Sample>& samples, double test_frac, double val_frac_of_rest,
                                  std::uint64_t seed);

/// Epoch batches drawn uniformly over occupied (class_id, source) buckets,
/// then uniformly with replacement inside the chosen bucket.
class BalancedSampler {
 public:
  using BucketKey = std::pair<int, Source>;

  BalancedSampler(std::span<const BucketKey> keys, std::size_t batch_size, std::uint64_t seed);

  /// ceil(n / batch_size) batches holding n draws in total, n = number of keys.
  /// Identical for identical (seed, epoch).
  std::vector<std::vector<std::size_t>> epoch_batches(std::uint64_t epoch) const;

  std::size_t bucket_count() const { return buckets_.size(); }
  std::size_t batches_per_epoch() const;

 private:
  std::vector<std::vector<std::size_t>> buckets_;
  std::size_t total_ = 0;
  std::size_t batch_size_;
  std::uint64_t seed_;
};

std::vector<BalancedSampler::BucketKey> bucket_keys(const std::vector<Sample>& samples);

}  // namespace hpe::datapipe
