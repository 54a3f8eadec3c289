#pragma once

#include "seq2vec/tensor.hpp"

namespace seq2vec::audio {

/// T x d matrix of per-frame feature vectors, one frame per row.
struct FeatureSequence {
  Matrix frames;

  Eigen::Index frame_count() const { return frames.rows(); }
  Eigen::Index dim() const { return frames.cols(); }
};

}  // namespace seq2vec::audio
