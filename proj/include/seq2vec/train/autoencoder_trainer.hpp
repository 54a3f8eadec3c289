#pragma once

#include <chrono>
#include <functional>
#include <limits>
#include <span>
#include <sstream>

#include "seq2vec/nn/autoencoder.hpp"
#include "seq2vec/train/batch.hpp"
#include "seq2vec/train/history.hpp"
#include "seq2vec/train/optim.hpp"

namespace seq2vec::train {

struct AutoencoderTrainConfig {
  int batch_size = 64;
  double initial_lr = 0.7;
  double decay = 0.99;
  int check_interval = 500;  // batches per checkpoint
  int plateau_window = 3;    // checkpoints compared for lr decay
  double clip_ratio = 5.0;
  int patience = 20;         // non-improving checkpoints before stopping
  std::uint64_t seed = 0;
  int max_checkpoints = 0;   // 0 = no cap

  void validate() const {
    if (batch_size <= 0 || check_interval <= 0 || plateau_window <= 0 || patience <= 0)
      throw ConfigError("autoencoder training: counts must be positive");
    if (initial_lr < 0.0 || !(decay > 0.0) || decay > 1.0 || !(clip_ratio > 0.0))
      throw ConfigError("autoencoder training: invalid learning rate, decay or clipping ratio");
    if (patience <= plateau_window) throw ConfigError("autoencoder training: patience must exceed the plateau window");
    if (max_checkpoints < 0) throw ConfigError("autoencoder training: max_checkpoints must be >= 0");
  }
};

struct AutoencoderTrainResult {
  nn::EncoderDecoderModel model;  // snapshot at the best checkpoint
  TrainHistory history;
};

using CheckpointCallback = std::function<void(const Checkpoint&)>;

/// SGD with global-norm clipping over length-bucketed mini-batches.
///
/// Every `check_interval` batches the mean batch loss becomes a checkpoint.
/// The learning rate is multiplied by `decay` whenever the newest checkpoint
/// is no better than the best of the `plateau_window` before it; training
/// stops after `patience` consecutive checkpoints without a new best.
inline AutoencoderTrainResult train_autoencoder(std::span<const FeatureSequence> data, nn::ModelShape shape,
                                                const AutoencoderTrainConfig& cfg,
                                                const CheckpointCallback& on_checkpoint = {}) {
  cfg.validate();
  if (data.empty()) throw DataError("train_autoencoder: empty dataset");
  const Eigen::Index d = data[0].dim();
  for (const auto& s : data)
    if (s.dim() != d || s.frame_count() < 1) throw DataError("train_autoencoder: sequences must be non-empty with equal dimension");

  nn::EncoderDecoderModel model = nn::EncoderDecoderModel::create(static_cast<int>(d), shape, mix_seed(cfg.seed, 1));
  Rng rng(mix_seed(cfg.seed, 2));
  const auto start = std::chrono::steady_clock::now();

  AutoencoderTrainResult result;
  result.model = model;
  double lr = cfg.initial_lr;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  long batches = 0;
  double window_sum = 0.0;
  int window_count = 0;
  nn::EncoderDecoderModel grads;

  for (;;) {
    for (const auto& idx : bucketed_batches(data, cfg.batch_size, rng)) {
      const PaddedBatch batch = pad_batch(data, idx);
      const nn::BatchLoss bl = nn::autoencoder_forward_backward(model, batch.steps, batch.lengths, &grads);
      if (!std::isfinite(bl.loss))
        throw NumericError("train_autoencoder: loss became non-finite at batch " + std::to_string(batches) + " (lr " + (std::ostringstream() << lr).str() + ")");
      clip_global_norm(grads, cfg.clip_ratio);
      sgd_step(model, grads, lr);
      window_sum += bl.loss;
      ++window_count;
      ++batches;
      if (window_count < cfg.check_interval) continue;

      Checkpoint cp;
      cp.index = static_cast<int>(result.history.checkpoints.size());
      cp.batches = batches;
      cp.loss = window_sum / window_count;
      cp.lr = lr;
      cp.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      window_sum = 0.0;
      window_count = 0;

      auto& cps = result.history.checkpoints;
      if (cps.size() >= static_cast<std::size_t>(cfg.plateau_window)) {
        double prior_min = std::numeric_limits<double>::infinity();
        for (std::size_t k = cps.size() - static_cast<std::size_t>(cfg.plateau_window); k < cps.size(); ++k)
          prior_min = std::min(prior_min, cps[k].loss);
        if (cp.loss >= prior_min) lr *= cfg.decay;
      }
      cps.push_back(cp);
      if (on_checkpoint) on_checkpoint(cp);

      if (cp.loss < best) {
        best = cp.loss;
        since_best = 0;
        result.model = model;
        result.history.best_checkpoint = cp.index;
      } else if (++since_best >= cfg.patience) {
        result.history.stopped_early = true;
        return result;
      }
      if (cfg.max_checkpoints > 0 && static_cast<int>(cps.size()) >= cfg.max_checkpoints) return result;
    }
  }
}

}  // namespace seq2vec::train
