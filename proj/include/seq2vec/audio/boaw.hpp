#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "seq2vec/audio/features.hpp"
#include "seq2vec/audio/kmeans.hpp"

namespace seq2vec::audio {

/// Audio-word codebook: V centroids, each frame votes for its a nearest.
struct BoawCodebook {
  Matrix centroids;  // V x d
  int assignments_per_frame = 1;

  Eigen::Index vocab_size() const { return centroids.rows(); }
  Eigen::Index dim() const { return centroids.cols(); }

  template <class F>
  void visit(F&& f) {
    f(std::string_view("centroids"), flat(centroids));
  }
};

inline constexpr int kDefaultVocabSize = 2048;
inline constexpr int kDefaultAssignments = 256;

inline Matrix pool_frames(std::span<const FeatureSequence> seqs) {
  Eigen::Index total = 0, d = -1;
  for (const auto& s : seqs) {
    if (s.frame_count() == 0) continue;
    if (d >= 0 && s.dim() != d) throw DataError("sequences have different feature dimensions");
    d = s.dim();
    total += s.frame_count();
  }
  Matrix pooled(total, std::max<Eigen::Index>(d, 0));
  Eigen::Index row = 0;
  for (const auto& s : seqs) {
    if (s.frame_count() == 0) continue;
    pooled.middleRows(row, s.frame_count()) = s.frames;
    row += s.frame_count();
  }
  return pooled;
}

/// k-means codebook over the pooled (standardized) training frames.
inline BoawCodebook fit_boaw_codebook(std::span<const FeatureSequence> train, int vocab_size, std::uint64_t seed,
                                      int assignments_per_frame = kDefaultAssignments, KMeansOptions opt = {}) {
  if (assignments_per_frame < 1 || assignments_per_frame > vocab_size)
    throw ConfigError("BoAW: need 1 <= assignments per frame <= vocabulary size");
  const Matrix pooled = pool_frames(train);
  if (pooled.rows() < vocab_size)
    throw DataError("BoAW: " + std::to_string(pooled.rows()) + " frames are too few for " + std::to_string(vocab_size) + " words");
  BoawCodebook cb;
  cb.centroids = kmeans(pooled, vocab_size, seed, opt).centroids;
  cb.assignments_per_frame = assignments_per_frame;
  return cb;
}

/// Normalized histogram of each frame's `a` nearest words (ties broken by
/// lower word index). Sums to 1.
inline Vector boaw_encode(const FeatureSequence& seq, const BoawCodebook& cb) {
  if (seq.dim() != cb.dim()) throw DataError("boaw_encode: dimension mismatch");
  if (seq.frame_count() == 0) throw DataError("boaw_encode: empty sequence");
  const Eigen::Index V = cb.vocab_size();
  const auto a = static_cast<std::size_t>(cb.assignments_per_frame);
  Vector hist = Vector::Zero(V);
  std::vector<std::pair<double, Eigen::Index>> d(static_cast<std::size_t>(V));
  for (Eigen::Index t = 0; t < seq.frame_count(); ++t) {
    for (Eigen::Index v = 0; v < V; ++v) d[static_cast<std::size_t>(v)] = {(cb.centroids.row(v) - seq.frames.row(t)).squaredNorm(), v};
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(a), d.end());
    for (std::size_t i = 0; i < a; ++i) hist(d[i].second) += 1.0;
  }
  return hist / hist.sum();
}

}  // namespace seq2vec::audio
