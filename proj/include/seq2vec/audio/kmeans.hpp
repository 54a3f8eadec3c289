#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "seq2vec/random.hpp"
#include "seq2vec/tensor.hpp"

namespace seq2vec::audio {

struct KMeansOptions {
  int max_iterations = 25;
  double tolerance = 1e-6;  // stop once no centroid moves further than this
};

struct KMeansResult {
  Matrix centroids;                // k x d
  std::vector<int> assignment;     // per point
  std::vector<double> objective;   // sum of squared distances after each assignment step
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline int nearest(const Matrix& centroids, const Eigen::Ref<const RowVector>& x, double* dist) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const double d = (centroids.row(c) - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (dist) *dist = best_d;
  return best;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding over the rows of `points`.
/// Clusters that lose all members are re-seeded at the point farthest from
/// its current centroid.
inline KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, KMeansOptions opt = {}) {
  const Eigen::Index N = points.rows();
  if (k < 1) throw ConfigError("k-means: k must be positive");
  if (N < k) throw DataError("k-means: " + std::to_string(N) + " points cannot fill " + std::to_string(k) + " clusters");
  if (!points.allFinite()) throw NumericError("k-means: non-finite input");

  Rng rng(seed);
  KMeansResult res;
  res.centroids.resize(k, points.cols());

  // k-means++ seeding.
  std::vector<double> d2(static_cast<std::size_t>(N), std::numeric_limits<double>::infinity());
  Eigen::Index first = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(N)));
  res.centroids.row(0) = points.row(first);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], (points.row(i) - res.centroids.row(c - 1)).squaredNorm());
      total += d2[static_cast<std::size_t>(i)];
    }
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      pick = N - 1;
      for (Eigen::Index i = 0; i < N; ++i) {
        target -= d2[static_cast<std::size_t>(i)];
        if (target < 0.0 && d2[static_cast<std::size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(N)));  // all points coincide
    }
    res.centroids.row(c) = points.row(pick);
  }

  res.assignment.assign(static_cast<std::size_t>(N), 0);
  std::vector<double> dist(static_cast<std::size_t>(N));
  for (int it = 0; it < opt.max_iterations; ++it) {
    double obj = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      res.assignment[static_cast<std::size_t>(i)] = detail::nearest(res.centroids, points.row(i), &dist[static_cast<std::size_t>(i)]);
      obj += dist[static_cast<std::size_t>(i)];
    }
    res.objective.push_back(obj);
    ++res.iterations;

    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < N; ++i) {
      const int a = res.assignment[static_cast<std::size_t>(i)];
      sums.row(a) += points.row(i);
      ++counts[static_cast<std::size_t>(a)];
    }
    Matrix next = res.centroids;
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0) next.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      const auto far = static_cast<Eigen::Index>(std::max_element(dist.begin(), dist.end()) - dist.begin());
      next.row(c) = points.row(far);
      dist[static_cast<std::size_t>(far)] = 0.0;
    }
    const double shift = (next - res.centroids).rowwise().norm().maxCoeff();
    res.centroids = std::move(next);
    if (shift < opt.tolerance) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace seq2vec::audio
