#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "seq2vec/random.hpp"
#include "seq2vec/tensor.hpp"

namespace seq2vec::train {

/// The complexity grid searched on validation data.
inline constexpr double kSvmComplexityGrid[] = {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1, 2, 5};

/// One-vs-rest linear SVMs; row k of W with b(k) scores class k.
struct SvmModel {
  Matrix W;  // K x D
  Vector b;  // K
  double C = 1.0;

  int num_classes() const { return static_cast<int>(W.rows()); }
  int dim() const { return static_cast<int>(W.cols()); }

  template <class F>
  void visit(F&& f) {
    f(std::string_view("W"), flat(W));
    f(std::string_view("b"), flat(b));
  }
};

struct SvmOptions {
  double tolerance = 1e-6;   // on the spread of projected dual gradients
  int max_sweeps = 100000;
  std::uint64_t seed = 0;
};

struct BinarySvm {
  Vector w;
  double b = 0.0;
  int sweeps = 0;
};

/// Primal objective 1/2 (|w|^2 + b^2) + C * sum_i max(0, 1 - y_i (w.x_i + b)).
/// The bias is learned as the weight of a constant feature 1 and is
/// therefore regularized along with w.
inline double svm_objective(const Vector& w, double b, const Matrix& X, std::span<const int> y, double C) {
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    hinge += std::max(0.0, 1.0 - y[static_cast<std::size_t>(i)] * (X.row(i).dot(w) + b));
  return 0.5 * (w.squaredNorm() + b * b) + C * hinge;
}

/// Dual coordinate descent for the L1-loss linear SVM. Rows of X are
/// instances, y holds +1 / -1.
inline BinarySvm train_binary_svm(const Matrix& X, std::span<const int> y, double C, SvmOptions opt = {}) {
  if (!(C > 0.0)) throw ConfigError("SVM complexity C must be positive");
  const Eigen::Index N = X.rows(), D = X.cols();
  if (N == 0 || static_cast<Eigen::Index>(y.size()) != N) throw DataError("SVM: need one label per instance");
  bool has_pos = false, has_neg = false;
  for (int v : y) {
    if (v != 1 && v != -1) throw DataError("SVM: binary labels must be +1 or -1");
    (v > 0 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw DataError("SVM: training data contains a single class");

  std::vector<double> alpha(static_cast<std::size_t>(N), 0.0), qdiag(static_cast<std::size_t>(N));
  for (Eigen::Index i = 0; i < N; ++i) qdiag[static_cast<std::size_t>(i)] = X.row(i).squaredNorm() + 1.0;
  Vector w = Vector::Zero(D);
  double b = 0.0;
  std::vector<std::size_t> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(opt.seed);

  BinarySvm out;
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    rng.shuffle(order);
    double pg_max = -std::numeric_limits<double>::infinity(), pg_min = std::numeric_limits<double>::infinity();
    for (std::size_t i : order) {
      const auto row = static_cast<Eigen::Index>(i);
      const double yi = y[i];
      const double G = yi * (X.row(row).dot(w) + b) - 1.0;
      double pg = G;
      if (alpha[i] == 0.0) pg = std::min(G, 0.0);
      else if (alpha[i] == C) pg = std::max(G, 0.0);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg == 0.0) continue;
      const double old = alpha[i];
      alpha[i] = std::clamp(old - G / qdiag[i], 0.0, C);
      const double delta = (alpha[i] - old) * yi;
      w += delta * X.row(row).transpose();
      b += delta;
    }
    out.sweeps = sweep + 1;
    if (pg_max - pg_min < opt.tolerance) break;
  }
  out.w = std::move(w);
  out.b = b;
  return out;
}

/// One binary machine per class (class k vs the rest).
inline SvmModel train_svm(const Matrix& X, std::span<const int> labels, int num_classes, double C, SvmOptions opt = {}) {
  if (num_classes < 2) throw DataError("SVM: need at least 2 classes");
  if (static_cast<Eigen::Index>(labels.size()) != X.rows()) throw DataError("SVM: need one label per instance");
  if (!X.allFinite()) throw NumericError("SVM: non-finite features");
  for (int v : labels)
    if (v < 0 || v >= num_classes) throw DataError("SVM: label " + std::to_string(v) + " out of range");
  SvmModel m;
  m.C = C;
  m.W.resize(num_classes, X.cols());
  m.b.resize(num_classes);
  std::vector<int> y(labels.size());
  for (int k = 0; k < num_classes; ++k) {
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == k ? 1 : -1;
    SvmOptions o = opt;
    o.seed = mix_seed(opt.seed, static_cast<std::uint64_t>(k));
    const BinarySvm bin = train_binary_svm(X, y, C, o);
    m.W.row(k) = bin.w.transpose();
    m.b(k) = bin.b;
  }
  return m;
}

inline Vector svm_decision_values(const SvmModel& m, const Vector& x) {
  if (x.size() != m.dim()) throw DataError("SVM: input dimension mismatch");
  return m.W * x + m.b;
}

/// Highest decision value wins; ties go to the lowest class index.
inline int svm_predict(const SvmModel& m, const Vector& x) {
  const Vector s = svm_decision_values(m, x);
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < s.size(); ++k)
    if (s(k) > s(best)) best = k;
  return static_cast<int>(best);
}

inline std::vector<int> svm_predict(const SvmModel& m, const Matrix& X) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) out.push_back(svm_predict(m, Vector(X.row(i).transpose())));
  return out;
}

}  // namespace seq2vec::train
