#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "seq2vec/nn/classifier.hpp"
#include "seq2vec/train/optim.hpp"
#include "seq2vec/train/upsample.hpp"

namespace seq2vec::train {

struct ClassifierTrainConfig {
  double initial_lr = 1e-4;
  long decay_every = 10000;  // optimizer steps
  double decay_rate = 0.96;
  double clip_ratio = 1.2;
  int batch_size = 128;
  int epochs = 500;
  int hidden_units = 128;
  bool upsample = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(initial_lr > 0.0) || decay_every <= 0 || !(decay_rate > 0.0) || !(clip_ratio > 0.0) || batch_size <= 0 ||
        epochs <= 0 || hidden_units <= 0)
      throw ConfigError("classifier training: all settings must be positive");
  }
};

struct ClassifierTrainResult {
  nn::GruClassifier model;
  std::vector<double> epoch_loss;      // mean batch loss per epoch
  std::vector<double> epoch_accuracy;  // training accuracy after each epoch
};

/// Trains on representations given as rows (N x D) with labels in [0, K).
/// Adam with a staircase-decayed learning rate and global-norm clipping;
/// the training set is class-balanced by upsampling first.
inline ClassifierTrainResult train_gru_classifier(const Matrix& reps, std::span<const int> labels, int num_classes,
                                                  const ClassifierTrainConfig& cfg) {
  cfg.validate();
  if (reps.rows() == 0 || static_cast<Eigen::Index>(labels.size()) != reps.rows())
    throw DataError("train_gru_classifier: need one label per representation");
  if (num_classes < 2) throw DataError("train_gru_classifier: need at least 2 classes");
  for (int y : labels)
    if (y < 0 || y >= num_classes) throw DataError("train_gru_classifier: label " + std::to_string(y) + " out of range");
  if (!reps.allFinite()) throw NumericError("train_gru_classifier: non-finite representation");

  std::vector<std::size_t> pool(labels.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  if (cfg.upsample) pool = upsample_balanced(labels, mix_seed(cfg.seed, 3));

  ClassifierTrainResult res;
  res.model = nn::GruClassifier::create(static_cast<int>(reps.cols()), cfg.hidden_units, num_classes, mix_seed(cfg.seed, 4));
  AdamState<nn::GruClassifier> adam(res.model);
  nn::GruClassifier grads;
  Rng rng(mix_seed(cfg.seed, 5));
  const Matrix all = reps.transpose();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(pool);
    double sum = 0.0;
    int count = 0;
    for (std::size_t start = 0; start < pool.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(pool.size(), start + static_cast<std::size_t>(cfg.batch_size));
      Matrix x(all.rows(), static_cast<Eigen::Index>(end - start));
      std::vector<int> y;
      for (std::size_t i = start; i < end; ++i) {
        x.col(static_cast<Eigen::Index>(i - start)) = all.col(static_cast<Eigen::Index>(pool[i]));
        y.push_back(labels[pool[i]]);
      }
      const double loss = nn::classifier_loss(res.model, x, y, &grads);
      if (!std::isfinite(loss)) throw NumericError("train_gru_classifier: loss became non-finite");
      clip_global_norm(grads, cfg.clip_ratio);
      adam_step(res.model, grads, adam, exponential_decay(cfg.initial_lr, adam.step, cfg.decay_every, cfg.decay_rate));
      sum += loss;
      ++count;
    }
    res.epoch_loss.push_back(sum / count);
    const auto pred = nn::classifier_predict(res.model, all);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i];
    res.epoch_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(pred.size()));
  }
  return res;
}

}  // namespace seq2vec::train
