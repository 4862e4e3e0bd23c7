#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "pttr/harness/tracker.hpp"
#include "pttr/numcore/optim.hpp"

namespace pttr {

struct TrainConfig {
  int epochs = 60;
  int batch_size = 8;
  double lr = 1e-3;
  int lr_period = 40;
  double lr_factor = 5.0;
  double distort_range = 0.3;
};

/// One (template, search) pair in canonical frames with its targets.
struct TrainingSample {
  TrackInput input;
  Box3D gt;   // ground truth at frame t in the reference frame
  Box3D ref;  // the reference box in its own frame
  std::size_t sequence = 0;
  std::size_t frame = 0;
};

/// Pair (t-1, t) of `seq`: the reference is the distorted previous box, the
/// template is cropped around it in frame t-1 and the search region around it
/// in frame t. Returns nothing when either crop is empty.
std::optional<TrainingSample> make_training_pair(const TrackletSequence& seq, std::size_t t, const TrackConfig& track,
                                                 double distort_range, RandomState& rng);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
  std::size_t samples = 0;
};

/// Writes a batch as PCD files plus a text summary for post-mortems.
void dump_batch(const std::vector<TrainingSample>& batch, const std::filesystem::path& dir);

/// Adam over shuffled consecutive-frame pairs with step-decay learning rate
/// and gradient accumulation over `batch_size` pairs. A non-finite loss
/// aborts with NumericError after writing the batch to `diag_dir` (if set).
template <typename Scalar>
std::vector<EpochRecord> train(TrackerNet<Scalar>& net, const std::vector<TrackletSequence>& data,
                               const TrainConfig& cfg, const TrackConfig& track, std::uint64_t seed,
                               const std::optional<std::filesystem::path>& diag_dir = std::nullopt,
                               const std::function<void(const EpochRecord&)>& on_epoch = {}) {
  if (data.empty()) throw EmptyInputError("train: empty dataset");
  if (cfg.epochs < 0 || cfg.batch_size < 1) throw ConfigError("train: epochs must be >= 0 and batch_size >= 1");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t s = 0; s < data.size(); ++s) {
    for (std::size_t t = 1; t < data[s].frames.size(); ++t) pairs.emplace_back(s, t);
  }
  if (pairs.empty()) throw EmptyInputError("train: no consecutive frame pairs");

  Adam<Scalar> adam(net.parameters(), AdamOptions{cfg.lr});
  const RandomState root(seed);
  std::vector<EpochRecord> curve;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    RandomState rng = root.fork(static_cast<std::uint64_t>(epoch));
    const double lr = step_decay_lr(cfg.lr, epoch, cfg.lr_period, cfg.lr_factor);
    adam.set_learning_rate(lr);
    std::shuffle(pairs.begin(), pairs.end(), rng.engine());
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t start = 0; start < pairs.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(pairs.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<TrainingSample> batch;
      for (std::size_t i = start; i < stop; ++i) {
        auto sample = make_training_pair(data[pairs[i].first], pairs[i].second, track, cfg.distort_range, rng);
        if (!sample) continue;
        sample->sequence = pairs[i].first;
        batch.push_back(std::move(*sample));
      }
      if (batch.empty()) continue;
      adam.zero_grad();
      const auto weight = static_cast<Scalar>(1.0 / static_cast<double>(batch.size()));
      try {
        for (const auto& sample : batch) {
          const auto out = net.forward(sample.input, rng);
          Tensor<Scalar> loss = net.loss(out, sample.gt, sample.ref);
          total += static_cast<double>(loss.item());
          ++count;
          backward(scale(loss, weight));
        }
      } catch (const NumericError& e) {
        std::string where;
        if (diag_dir) {
          dump_batch(batch, *diag_dir);
          where = "; batch written to " + diag_dir->string();
        }
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what() + where);
      }
      adam.step();
    }
    EpochRecord rec{epoch, lr, count > 0 ? total / static_cast<double>(count) : 0.0, count};
    curve.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return curve;
}

}  // namespace pttr
