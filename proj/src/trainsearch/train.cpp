#include "hpe/trainsearch/train.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hpe/common/random.hpp"
#include "hpe/datapipe/split.hpp"
#include "hpe/engine/adam.hpp"

namespace hpe::trainsearch {

namespace {

constexpr std::size_t kSide = datapipe::kCropSide;

// Stream tags for derive_seed.
enum : std::uint64_t { kInitStream = 1, kSamplerStream = 2, kAugmentStream = 3 };

}  // namespace

void TrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (eval_batch_size == 0) throw std::invalid_argument("eval_batch_size must be positive");
  schedule.validate();
  augment.validate();
}

TrainConfig desk_scale(TrainConfig cfg) {
  cfg.schedule.max_epochs = 30;
  return cfg;
}

engine::Tensor<float> image_batch(const std::vector<const datapipe::Image*>& images) {
  engine::Tensor<float> batch({images.size(), 1, kSide, kSide});
  float* out = batch.data();
  for (const auto* img : images) {
    if (img->width != static_cast<int>(kSide) || img->height != static_cast<int>(kSide) || img->channels != 1) {
      throw std::invalid_argument("network input must be a 64x64 gray image");
    }
    out = std::copy(img->pixels.begin(), img->pixels.end(), out);
  }
  return batch;
}

std::vector<std::array<double, 2>> predict_degrees(const engine::Network<float>& net,
                                                   const std::vector<Sample>& samples, std::size_t batch_size) {
  std::vector<std::array<double, 2>> out;
  out.reserve(samples.size());
  for (std::size_t start = 0; start < samples.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, samples.size() - start);
    std::vector<const datapipe::Image*> images;
    for (std::size_t i = 0; i < n; ++i) images.push_back(&samples[start + i].image);
    const auto pred = net.forward(image_batch(images));
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back({pred[i * 2] * kLabelScale, pred[i * 2 + 1] * kLabelScale});
    }
  }
  return out;
}

EvalReport evaluate(const engine::Network<float>& net, const std::vector<Sample>& samples, std::size_t batch_size) {
  if (samples.empty()) throw std::invalid_argument("cannot evaluate on an empty partition");
  const auto pred = predict_degrees(net, samples, batch_size);
  double tilt = 0.0, pan = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    tilt += std::abs(pred[i][0] - samples[i].tilt);
    pan += std::abs(pred[i][1] - samples[i].pan);
  }
  EvalReport r;
  r.mae_tilt = tilt / static_cast<double>(samples.size());
  r.mae_pan = pan / static_cast<double>(samples.size());
  r.mean_error = (r.mae_tilt + r.mae_pan) / 2.0;
  return r;
}

TrainResult train(engine::Network<float> initial, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.empty() || val_set.empty()) throw std::invalid_argument("train and validation sets must be non-empty");
  initial.validate_head();

  const auto keys = datapipe::bucket_keys(train_set);
  const datapipe::BalancedSampler sampler(keys, cfg.batch_size, derive_seed({cfg.seed, kSamplerStream}));
  const bool augmenting = !cfg.augment.is_identity();

  TrainResult result{initial, {}};
  engine::Network<float>& net = initial;
  engine::AdamState<float> adam;

  auto run_epoch = [&](std::size_t epoch, double lr) {
    adam.learning_rate = lr;
    double loss_sum = 0.0;
    std::size_t seen = 0;
    const auto batches = sampler.epoch_batches(epoch);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto& idx = batches[b];
      std::vector<datapipe::Image> augmented;
      std::vector<const datapipe::Image*> images;
      if (augmenting) {
        std::mt19937_64 rng(derive_seed({cfg.seed, kAugmentStream, epoch, b}));
        augmented.reserve(idx.size());
        for (auto i : idx) {
          augmented.push_back(augment::apply_augmentation(train_set[i].image, augment::sample_augmentation(cfg.augment, rng)));
        }
        for (const auto& img : augmented) images.push_back(&img);
      } else {
        for (auto i : idx) images.push_back(&train_set[i].image);
      }
      engine::Tensor<float> target({idx.size(), 2});
      for (std::size_t k = 0; k < idx.size(); ++k) {
        target[k * 2] = static_cast<float>(train_set[idx[k]].tilt / kLabelScale);
        target[k * 2 + 1] = static_cast<float>(train_set[idx[k]].pan / kLabelScale);
      }
      const auto bp = engine::backprop(net, image_batch(images), target);
      if (!std::isfinite(bp.loss)) throw engine::NumericError(net.layers().size(), "non-finite loss");
      engine::adam_step(net.params(), bp.grads, adam);
      loss_sum += static_cast<double>(bp.loss) * static_cast<double>(idx.size());
      seen += idx.size();
    }
    const double val_error = evaluate(net, val_set, cfg.eval_batch_size).mean_error;
    return EpochOutcome{seen ? loss_sum / static_cast<double>(seen) : 0.0, val_error};
  };

  result.history = run_schedule(
      cfg.schedule, run_epoch, [&](std::size_t) { result.network = net; }, on_epoch);
  return result;
}

TrainResult train(const arch::ArchitectureSpec& spec, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  return train(arch::build_network<float>(spec, derive_seed({cfg.seed, kInitStream})), train_set, val_set, cfg,
               on_epoch);
}

}  // namespace hpe::trainsearch
