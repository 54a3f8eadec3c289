#pragma once

// Primal subgradient descent on 1/2 (|w|^2 + b^2) + C * sum hinge, with a
// diminishing step and best-iterate tracking. Slow but shares no code with
// the dual solver.

#include <algorithm>
#include <cmath>
#include <span>

#include "seq2vec/train/svm.hpp"

namespace seq2vec::oracle {

struct SubgradientResult {
  Vector w;
  double b = 0.0;
  double objective = 0.0;
};

inline SubgradientResult subgradient_svm(const Matrix& X, std::span<const int> y, double C, long iterations = 200000) {
  const Eigen::Index N = X.rows(), D = X.cols();
  double radius = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) radius = std::max(radius, X.row(i).norm());
  const double scale = 1.0 + C * static_cast<double>(N) * (radius + 1.0);

  Vector w = Vector::Zero(D);
  double b = 0.0;
  SubgradientResult best{w, b, train::svm_objective(w, b, X, y, C)};
  Vector g(D);
  for (long t = 1; t <= iterations; ++t) {
    g = w;
    double gb = b;
    for (Eigen::Index i = 0; i < N; ++i) {
      const double yi = y[static_cast<std::size_t>(i)];
      if (yi * (X.row(i).dot(w) + b) < 1.0) {
        g -= C * yi * X.row(i).transpose();
        gb -= C * yi;
      }
    }
    const double eta = 1.0 / (std::sqrt(static_cast<double>(t)) * scale);
    w -= eta * g;
    b -= eta * gb;
    const double f = train::svm_objective(w, b, X, y, C);
    if (f < best.objective) best = {w, b, f};
  }
  return best;
}

/// Random 50-point binary problem with partially overlapping classes.
inline void random_svm_problem(Rng& rng, Eigen::Index n, Eigen::Index d, Matrix& X, std::vector<int>& y) {
  X.resize(n, d);
  y.resize(static_cast<std::size_t>(n));
  Vector dir(d);
  for (auto& v : dir) v = rng.normal();
  dir.normalize();
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = rng.uniform() < 0.5 ? 1 : -1;
    y[static_cast<std::size_t>(i)] = label;
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = rng.normal() + 0.75 * label * dir(j);
  }
  // guarantee both classes
  y[0] = 1;
  y[1] = -1;
}

}  // namespace seq2vec::oracle
