#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "seq2vec/audio/features.hpp"
#include "seq2vec/random.hpp"

namespace seq2vec::train {

using audio::FeatureSequence;

/// B sequences zero-padded to the longest one. Stored time-major: steps[t]
/// is the d x B slice at time t, which is what the recurrent layers consume.
struct PaddedBatch {
  std::vector<Matrix> steps;
  std::vector<int> lengths;
  std::vector<int> labels;  // empty when unlabeled

  Eigen::Index batch_size() const { return static_cast<Eigen::Index>(lengths.size()); }
  Eigen::Index max_length() const { return static_cast<Eigen::Index>(steps.size()); }
  Eigen::Index dim() const { return steps.empty() ? 0 : steps[0].rows(); }

  bool mask(Eigen::Index b, Eigen::Index t) const { return t < lengths[static_cast<std::size_t>(b)]; }
  double at(Eigen::Index b, Eigen::Index t, Eigen::Index j) const { return steps[static_cast<std::size_t>(t)](j, b); }
};

/// Pads the selected sequences of `data` (all of them when `indices` is empty).
inline PaddedBatch pad_batch(std::span<const FeatureSequence> data, std::span<const std::size_t> indices = {},
                             std::span<const int> labels = {}) {
  std::vector<std::size_t> all;
  if (indices.empty()) {
    all.resize(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    indices = all;
  }
  if (indices.empty()) throw DataError("pad_batch: empty batch");
  if (!labels.empty() && labels.size() != data.size()) throw DataError("pad_batch: one label per sequence required");

  const Eigen::Index d = data[indices[0]].dim();
  Eigen::Index T = 0;
  for (std::size_t i : indices) {
    const auto& s = data[i];
    if (s.dim() != d) throw DataError("pad_batch: sequences have different feature dimensions");
    if (s.frame_count() < 1) throw DataError("pad_batch: empty sequence");
    T = std::max(T, s.frame_count());
  }

  PaddedBatch batch;
  const auto B = static_cast<Eigen::Index>(indices.size());
  batch.steps.assign(static_cast<std::size_t>(T), Matrix::Zero(d, B));
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto& s = data[indices[static_cast<std::size_t>(b)]];
    for (Eigen::Index t = 0; t < s.frame_count(); ++t) batch.steps[static_cast<std::size_t>(t)].col(b) = s.frames.row(t).transpose();
    batch.lengths.push_back(static_cast<int>(s.frame_count()));
    if (!labels.empty()) batch.labels.push_back(labels[indices[static_cast<std::size_t>(b)]]);
  }
  return batch;
}

/// One epoch of batches: shuffled, grouped by length so that batches hold
/// similar-length sequences, then the batch order shuffled.
inline std::vector<std::vector<std::size_t>> bucketed_batches(std::span<const FeatureSequence> data, int batch_size, Rng& rng) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data[a].frame_count() < data[b].frame_count(); });
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(batch_size))
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + static_cast<std::size_t>(batch_size))));
  rng.shuffle(batches);
  return batches;
}

}  // namespace seq2vec::train
