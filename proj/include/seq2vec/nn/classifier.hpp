#pragma once

#include <cmath>
#include <span>
#include <string_view>
#include <vector>

#include "seq2vec/nn/affine.hpp"
#include "seq2vec/nn/gru.hpp"

namespace seq2vec::nn {

/// One GRU layer over a length-1 sequence (the fixed-length input vector),
/// followed by an affine layer and softmax over K classes.
struct GruClassifier {
  GruLayerParams gru;
  AffineParams output;

  int input_dim() const { return gru.input_dim(); }
  int hidden_units() const { return gru.hidden(); }
  int num_classes() const { return output.output_dim(); }

  static GruClassifier zeros(int input_dim, int hidden, int classes) {
    return {GruLayerParams::zeros(input_dim, hidden), AffineParams::zeros(hidden, classes)};
  }

  static GruClassifier create(int input_dim, int hidden, int classes, std::uint64_t seed) {
    if (input_dim <= 0 || hidden <= 0 || classes < 2) throw ConfigError("classifier needs positive sizes and at least 2 classes");
    Rng rng(seed);
    GruClassifier c;
    c.gru = GruLayerParams::glorot(input_dim, hidden, rng);
    c.output = AffineParams::glorot(hidden, classes, rng);
    return c;
  }

  void validate() const {
    if (!gru.shapes_consistent() || output.input_dim() != gru.hidden() || output.b.size() != output.output_dim())
      throw DataError("classifier parameters have inconsistent shapes");
  }

  template <class F>
  void visit(F&& f) {
    gru.visit([&](std::string_view name, std::span<double> d) { f(std::string_view("gru/" + std::string(name)), d); });
    output.visit([&](std::string_view name, std::span<double> d) { f(std::string_view("output/" + std::string(name)), d); });
  }
};

/// Column-wise softmax with max-shift.
inline Matrix softmax_columns(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double mx = logits.col(c).maxCoeff();
    double z = 0.0;
    for (Eigen::Index k = 0; k < logits.rows(); ++k) z += out(k, c) = std::exp(logits(k, c) - mx);
    out.col(c) /= z;
  }
  return out;
}

/// Class probabilities for inputs given as columns (D x B); result is K x B.
inline Matrix classifier_probabilities(const GruClassifier& clf, const Matrix& inputs) {
  if (inputs.rows() != clf.input_dim()) throw DataError("classifier: input dimension mismatch");
  const std::vector<Matrix> steps{inputs};
  const std::vector<int> lengths(static_cast<std::size_t>(inputs.cols()), 1);
  auto fwd = gru_forward(clf.gru, steps, lengths, Matrix::Zero(clf.hidden_units(), inputs.cols()), false);
  return softmax_columns(affine_forward(fwd.h_final, clf.output));
}

/// Mean cross-entropy over the batch; fills `grads` when given.
inline double classifier_loss(const GruClassifier& clf, const Matrix& inputs, std::span<const int> labels,
                              GruClassifier* grads = nullptr) {
  if (inputs.rows() != clf.input_dim()) throw DataError("classifier: input dimension mismatch");
  if (static_cast<Eigen::Index>(labels.size()) != inputs.cols()) throw DataError("classifier: one label per column required");
  const Eigen::Index B = inputs.cols();
  for (int y : labels)
    if (y < 0 || y >= clf.num_classes()) throw DataError("classifier: label " + std::to_string(y) + " out of range");

  const std::vector<Matrix> steps{inputs};
  const std::vector<int> lengths(static_cast<std::size_t>(B), 1);
  const Matrix h0 = Matrix::Zero(clf.hidden_units(), B);
  auto fwd = gru_forward(clf.gru, steps, lengths, h0, grads != nullptr);
  const Matrix probs = softmax_columns(affine_forward(fwd.h_final, clf.output));

  double loss = 0.0;
  for (Eigen::Index b = 0; b < B; ++b) loss -= std::log(probs(labels[static_cast<std::size_t>(b)], b));
  loss /= static_cast<double>(B);
  if (!grads) return loss;

  Matrix dlogits = probs;
  for (Eigen::Index b = 0; b < B; ++b) dlogits(labels[static_cast<std::size_t>(b)], b) -= 1.0;
  dlogits /= static_cast<double>(B);
  AffineBackward ab = affine_backward(fwd.h_final, dlogits, clf.output);
  GruBackwardResult gb = gru_backward(clf.gru, fwd.cache, {}, ab.input_grad);
  grads->gru = std::move(gb.grads);
  grads->output = std::move(ab.grads);
  return loss;
}

/// Argmax class per column; ties go to the lower class index.
inline std::vector<int> classifier_predict(const GruClassifier& clf, const Matrix& inputs) {
  const Matrix p = classifier_probabilities(clf, inputs);
  std::vector<int> out(static_cast<std::size_t>(p.cols()));
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < p.rows(); ++k)
      if (p(k, c) > p(best, c)) best = k;
    out[static_cast<std::size_t>(c)] = static_cast<int>(best);
  }
  return out;
}

}  // namespace seq2vec::nn
