#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <span>
#include <vector>

#include "seq2vec/error.hpp"
#include "seq2vec/tensor.hpp"

namespace seq2vec::eval {

struct LdaProjection {
  Matrix directions;  // out_dims x D
  Vector eigenvalues;  // descending
  Matrix points;       // N x out_dims
  std::vector<int> labels;
};

/// Fisher discriminant directions: leading generalized eigenvectors of
/// S_b v = lambda (S_w + ridge I) v, with ridge = 1e-6 trace(S_w) / D.
/// Directions are scaled to unit within-class variance (v^T S_w v = 1), which
/// makes the projection independent of any invertible affine change of the
/// input coordinates.
inline LdaProjection lda_fit(const Matrix& reps, std::span<const int> labels, int out_dims = 2) {
  const Eigen::Index N = reps.rows(), D = reps.cols();
  if (static_cast<Eigen::Index>(labels.size()) != N) throw DataError("LDA: need one label per row");
  if (D < out_dims) throw DataError("LDA: dimension is smaller than the number of output directions");
  if (out_dims < 1) throw ConfigError("LDA: need at least one output direction");
  if (!reps.allFinite()) throw NumericError("LDA: non-finite input");
  int K = 0;
  for (int v : labels) {
    if (v < 0) throw DataError("LDA: negative class id");
    K = std::max(K, v + 1);
  }
  std::vector<Eigen::Index> count(static_cast<std::size_t>(K), 0);
  for (int v : labels) ++count[static_cast<std::size_t>(v)];
  const auto present = std::count_if(count.begin(), count.end(), [](Eigen::Index c) { return c > 0; });
  if (present - 1 < out_dims)
    throw DataError("LDA: " + std::to_string(present) + " classes give fewer than " + std::to_string(out_dims) +
                    " discriminant directions");
  if (N <= present) throw DataError("LDA: need more points than classes");

  Matrix means = Matrix::Zero(K, D);
  for (Eigen::Index i = 0; i < N; ++i) means.row(labels[static_cast<std::size_t>(i)]) += reps.row(i);
  for (int k = 0; k < K; ++k)
    if (count[static_cast<std::size_t>(k)] > 0) means.row(k) /= static_cast<double>(count[static_cast<std::size_t>(k)]);
  const RowVector grand = reps.colwise().mean();

  Matrix centered(N, D);
  for (Eigen::Index i = 0; i < N; ++i) centered.row(i) = reps.row(i) - means.row(labels[static_cast<std::size_t>(i)]);
  Matrix Sw = centered.transpose() * centered;
  Matrix Sb = Matrix::Zero(D, D);
  for (int k = 0; k < K; ++k) {
    if (count[static_cast<std::size_t>(k)] == 0) continue;
    const Vector diff = (means.row(k) - grand).transpose();
    Sb.noalias() += static_cast<double>(count[static_cast<std::size_t>(k)]) * diff * diff.transpose();
  }
  const double ridge = 1e-6 * Sw.trace() / static_cast<double>(D);
  if (!(ridge > 0.0)) throw NumericError("LDA: within-class scatter is zero");
  Sw.diagonal().array() += ridge;

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(Sb, Sw);
  if (solver.info() != Eigen::Success) throw NumericError("LDA: scatter matrix is singular after regularization");

  LdaProjection out;
  out.directions.resize(out_dims, D);
  out.eigenvalues.resize(out_dims);
  for (int j = 0; j < out_dims; ++j) {
    const Eigen::Index col = D - 1 - j;  // eigenvalues come back ascending
    Vector v = solver.eigenvectors().col(col);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;  // fix the sign so output is reproducible
    out.directions.row(j) = v.transpose();
    out.eigenvalues(j) = solver.eigenvalues()(col);
  }
  out.points = reps * out.directions.transpose();
  out.labels.assign(labels.begin(), labels.end());
  return out;
}

inline LdaProjection lda_project(const Matrix& reps, std::span<const int> labels, int out_dims = 2) {
  return lda_fit(reps, labels, out_dims);
}

}  // namespace seq2vec::eval
