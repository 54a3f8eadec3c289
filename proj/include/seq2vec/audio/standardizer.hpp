#pragma once

#include <span>
#include <string_view>

#include "seq2vec/audio/features.hpp"

namespace seq2vec::audio {

inline constexpr double kStdFloor = 1e-8;

/// Per-dimension z-scoring with statistics pooled over training frames.
struct Standardizer {
  Vector mean;
  Vector std;

  Eigen::Index dim() const { return mean.size(); }

  template <class F>
  void visit(F&& f) {
    f(std::string_view("mean"), flat(mean));
    f(std::string_view("std"), flat(std));
  }
};

/// Population mean and standard deviation over all frames of all sequences.
/// Standard deviations below kStdFloor are raised to it.
inline Standardizer fit_standardizer(std::span<const FeatureSequence> train) {
  Eigen::Index d = -1, total = 0;
  for (const auto& s : train) {
    if (s.frame_count() == 0) continue;
    if (d >= 0 && s.dim() != d) throw DataError("fit_standardizer: sequences have different dimensions");
    d = s.dim();
    total += s.frame_count();
  }
  if (total < 2) throw DataError("fit_standardizer: need at least 2 frames, got " + std::to_string(total));

  // Two-pass for accuracy.
  Vector sum = Vector::Zero(d);
  for (const auto& s : train)
    if (s.frame_count() > 0) sum += s.frames.colwise().sum().transpose();
  Standardizer st;
  st.mean = sum / static_cast<double>(total);
  Vector sq = Vector::Zero(d);
  for (const auto& s : train)
    if (s.frame_count() > 0) sq += (s.frames.rowwise() - st.mean.transpose()).array().square().colwise().sum().matrix().transpose();
  st.std = (sq / static_cast<double>(total)).cwiseSqrt().cwiseMax(kStdFloor);
  return st;
}

inline FeatureSequence apply_standardizer(const FeatureSequence& seq, const Standardizer& s) {
  if (seq.dim() != s.dim()) throw DataError("apply_standardizer: dimension mismatch");
  FeatureSequence out;
  out.frames = (seq.frames.rowwise() - s.mean.transpose()).array().rowwise() / s.std.transpose().array();
  return out;
}

inline FeatureSequence invert_standardizer(const FeatureSequence& seq, const Standardizer& s) {
  if (seq.dim() != s.dim()) throw DataError("invert_standardizer: dimension mismatch");
  FeatureSequence out;
  out.frames = (seq.frames.array().rowwise() * s.std.transpose().array()).matrix().rowwise() + s.mean.transpose();
  return out;
}

}  // namespace seq2vec::audio
