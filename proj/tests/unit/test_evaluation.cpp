#include <gtest/gtest.h>

#include <sstream>

#include "seq2vec/eval/export.hpp"
#include "seq2vec/random.hpp"

using namespace seq2vec;
using namespace seq2vec::eval;

namespace {

ConfusionMatrix from_rows(const std::vector<std::vector<long long>>& rows) {
  ConfusionMatrix cm(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j) cm.at(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  return cm;
}

// Straight transcription of the metric definitions over a nested table.
struct BruteForce {
  double ua, f1;
};

BruteForce brute_force(const std::vector<std::vector<long long>>& m) {
  const std::size_t K = m.size();
  std::vector<double> recall, precision;
  for (std::size_t k = 0; k < K; ++k) {
    long long row = 0, col = 0;
    for (std::size_t j = 0; j < K; ++j) row += m[k][j];
    for (std::size_t i = 0; i < K; ++i) col += m[i][k];
    if (row == 0) continue;
    recall.push_back(static_cast<double>(m[k][k]) / static_cast<double>(row));
    precision.push_back(col == 0 ? 0.0 : static_cast<double>(m[k][k]) / static_cast<double>(col));
  }
  if (recall.empty()) return {0.0, 0.0};
  double r = 0, p = 0;
  for (double v : recall) r += v;
  for (double v : precision) p += v;
  r /= static_cast<double>(recall.size());
  p /= static_cast<double>(precision.size());
  return {r, p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r)};
}

struct Blobs {
  Matrix X;
  std::vector<int> y;
};

Blobs gaussian_blobs(Rng& rng, int K, int per_class, int D, double spread) {
  Matrix centers(K, D);
  for (Eigen::Index i = 0; i < centers.size(); ++i) centers.data()[i] = spread * rng.normal();
  Blobs b;
  b.X.resize(K * per_class, D);
  for (int i = 0; i < K * per_class; ++i) {
    const int k = i % K;
    b.y.push_back(k);
    for (int j = 0; j < D; ++j) b.X(i, j) = centers(k, j) + rng.normal();
  }
  return b;
}

// Mean pairwise distance of projected class centroids over the mean distance
// of projected points to their own centroid.
double separation_ratio(const LdaProjection& p, int K) {
  Matrix c = Matrix::Zero(K, 2);
  std::vector<int> n(static_cast<std::size_t>(K), 0);
  for (Eigen::Index i = 0; i < p.points.rows(); ++i) {
    c.row(p.labels[static_cast<std::size_t>(i)]) += p.points.row(i);
    ++n[static_cast<std::size_t>(p.labels[static_cast<std::size_t>(i)])];
  }
  for (int k = 0; k < K; ++k) c.row(k) /= n[static_cast<std::size_t>(k)];
  double within = 0;
  for (Eigen::Index i = 0; i < p.points.rows(); ++i)
    within += (p.points.row(i) - c.row(p.labels[static_cast<std::size_t>(i)])).norm();
  within /= static_cast<double>(p.points.rows());
  double between = 0;
  int pairs = 0;
  for (int a = 0; a < K; ++a)
    for (int b = a + 1; b < K; ++b, ++pairs) between += (c.row(a) - c.row(b)).norm();
  return between / pairs / within;
}

}  // namespace

TEST(Confusion, Counts) {
  const std::vector<int> preds{0, 1, 1}, truth{0, 0, 1};
  EXPECT_EQ(confusion(preds, truth, 2), from_rows({{1, 1}, {0, 1}}));
  EXPECT_EQ(confusion(truth, truth, 2), from_rows({{2, 0}, {0, 1}}));
  const auto empty = confusion(std::vector<int>{}, std::vector<int>{}, 3);
  EXPECT_EQ(empty.total(), 0);
}

TEST(Confusion, Errors) {
  EXPECT_THROW(confusion(std::vector<int>{0, 1}, std::vector<int>{0}, 2), DataError);
  EXPECT_THROW(confusion(std::vector<int>{2}, std::vector<int>{0}, 2), DataError);
  EXPECT_THROW(confusion(std::vector<int>{0}, std::vector<int>{-1}, 2), DataError);
}

TEST(Confusion, RelabelingPermutesRowsAndColumns) {
  Rng rng(1);
  std::vector<int> preds(200), truth(200), perm{2, 0, 3, 1};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    preds[i] = static_cast<int>(rng.index(4));
    truth[i] = static_cast<int>(rng.index(4));
  }
  const auto cm = confusion(preds, truth, 4);
  for (auto& v : preds) v = perm[static_cast<std::size_t>(v)];
  for (auto& v : truth) v = perm[static_cast<std::size_t>(v)];
  const auto permuted = confusion(preds, truth, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(permuted.at(perm[i], perm[j]), cm.at(i, j));
}

TEST(Metrics, HandCases) {
  const auto cm = from_rows({{8, 2}, {4, 6}});
  EXPECT_DOUBLE_EQ(unweighted_accuracy(cm), 0.7);
  EXPECT_NEAR(macro_f1(cm), 0.7042, 1e-4);
  EXPECT_NEAR(evaluate(cm).macro_precision, (8.0 / 12 + 6.0 / 8) / 2, 1e-15);

  const auto one_class = from_rows({{5, 0}, {5, 0}});
  EXPECT_DOUBLE_EQ(unweighted_accuracy(one_class), 0.5);
  EXPECT_DOUBLE_EQ(evaluate(one_class).macro_precision, 0.25);
  EXPECT_NEAR(macro_f1(one_class), 1.0 / 3.0, 1e-15);

  const auto diag = from_rows({{3, 0, 0}, {0, 4, 0}, {0, 0, 1}});
  EXPECT_EQ(unweighted_accuracy(diag), 1.0);
  EXPECT_EQ(macro_f1(diag), 1.0);
}

TEST(Metrics, NothingRightGivesZero) {
  const auto cm = from_rows({{0, 3}, {2, 0}});
  EXPECT_EQ(unweighted_accuracy(cm), 0.0);
  EXPECT_EQ(macro_f1(cm), 0.0);
}

TEST(Metrics, ZeroSupportClassExcludedWithWarning) {
  const auto cm = from_rows({{4, 0, 1}, {0, 0, 0}, {1, 0, 4}});
  const auto r = evaluate(cm);
  EXPECT_TRUE(r.warning());
  EXPECT_EQ(r.excluded, std::vector<int>{1});
  EXPECT_DOUBLE_EQ(r.unweighted_accuracy, 0.8);
  EXPECT_FALSE(evaluate(from_rows({{1, 0}, {0, 1}})).warning());
  const auto none = evaluate(ConfusionMatrix(3));
  EXPECT_EQ(none.excluded.size(), 3u);
  EXPECT_EQ(none.macro_f1, 0.0);
}

TEST(Metrics, MatchBruteForceOnRandomMatrices) {
  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto K = 2 + rng.index(9);
    std::vector<std::vector<long long>> m(K, std::vector<long long>(K));
    for (auto& row : m)
      for (auto& v : row) v = rng.uniform() < 0.2 ? 0 : static_cast<long long>(rng.index(50));
    const auto cm = from_rows(m);
    const auto expected = brute_force(m);
    const auto r = evaluate(cm);
    EXPECT_EQ(r.unweighted_accuracy, expected.ua);
    EXPECT_EQ(r.macro_f1, expected.f1);
    EXPECT_GE(r.macro_f1, 0.0);
    EXPECT_LE(r.macro_f1, 1.0);
    EXPECT_GE(r.unweighted_accuracy, 0.0);
    EXPECT_LE(r.unweighted_accuracy, 1.0);
  }
}

TEST(Metrics, UniformGuessingGivesChanceAccuracy) {
  Rng rng(3);
  for (int K : {2, 5, 10}) {
    const int per_class = 400;
    std::vector<int> truth, preds;
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < per_class; ++i) {
        truth.push_back(k);
        preds.push_back(static_cast<int>(rng.index(static_cast<std::uint64_t>(K))));
      }
    const double p = 1.0 / K;
    // each recall has variance p(1-p)/n; UA averages K of them
    const double sigma = std::sqrt(p * (1 - p) / per_class / K);
    EXPECT_NEAR(unweighted_accuracy(confusion(preds, truth, K)), p, 3 * sigma) << "K=" << K;
  }
}

TEST(Lda, SeparatesGaussianBlobs) {
  Rng rng(4);
  const auto b = gaussian_blobs(rng, 3, 50, 16, 3.0);
  const auto p = lda_project(b.X, b.y);
  EXPECT_EQ(p.points.rows(), 150);
  EXPECT_GT(separation_ratio(p, 3), 5.0);
  EXPECT_GE(p.eigenvalues(0), p.eigenvalues(1));
}

TEST(Lda, TwoDimensionalInputKeepsFullRank) {
  Rng rng(5);
  const auto b = gaussian_blobs(rng, 4, 30, 2, 5.0);
  const auto p = lda_project(b.X, b.y);
  Eigen::FullPivLU<Matrix> lu(p.directions);
  EXPECT_EQ(lu.rank(), 2);
}

TEST(Lda, ShuffledLabelsShowNoStructure) {
  Rng rng(6);
  auto b = gaussian_blobs(rng, 3, 200, 16, 3.0);
  rng.shuffle(b.y);
  EXPECT_LT(separation_ratio(lda_project(b.X, b.y), 3), 2.0);
}

TEST(Lda, AffineReparameterizationKeepsCentroidDistanceOrder) {
  Rng rng(7);
  const auto b = gaussian_blobs(rng, 4, 40, 6, 3.0);
  Matrix A(6, 6);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = rng.normal();
  A.diagonal().array() += 3.0;
  const RowVector shift = RowVector::Constant(6, 2.5);
  const Matrix Y = (b.X * A.transpose()).rowwise() + shift;

  auto centroid_order = [&](const LdaProjection& p) {
    Matrix c = Matrix::Zero(4, 2);
    for (Eigen::Index i = 0; i < p.points.rows(); ++i) c.row(p.labels[static_cast<std::size_t>(i)]) += p.points.row(i);
    std::vector<std::pair<double, int>> d;
    int id = 0;
    for (int a = 0; a < 4; ++a)
      for (int bb = a + 1; bb < 4; ++bb) d.emplace_back((c.row(a) - c.row(bb)).norm(), id++);
    std::sort(d.begin(), d.end());
    std::vector<int> order;
    for (auto& [dist, i] : d) order.push_back(i);
    return order;
  };
  EXPECT_EQ(centroid_order(lda_project(b.X, b.y)), centroid_order(lda_project(Y, b.y)));
}

TEST(Lda, Errors) {
  Rng rng(8);
  const auto two = gaussian_blobs(rng, 2, 10, 4, 3.0);
  EXPECT_THROW(lda_project(two.X, two.y), DataError);
  const auto three = gaussian_blobs(rng, 3, 10, 4, 3.0);
  EXPECT_THROW(lda_project(three.X, std::vector<int>(5, 0)), DataError);
  Matrix same = Matrix::Ones(9, 4);
  std::vector<int> y{0, 1, 2, 0, 1, 2, 0, 1, 2};
  EXPECT_THROW(lda_project(same, y), NumericError);
}

TEST(Export, ConfusionRoundTrip) {
  const auto cm = from_rows({{8, 2}, {4, 6}});
  const auto text = to_csv(cm);
  EXPECT_EQ(text, "true,pred,count\n0,0,8\n0,1,2\n1,0,4\n1,1,6\n");
  std::istringstream in(text);
  EXPECT_EQ(parse_confusion_csv(in), cm);
}

TEST(Export, LdaRoundTripAndEmpty) {
  Rng rng(9);
  const auto b = gaussian_blobs(rng, 3, 10, 4, 3.0);
  const auto p = lda_project(b.X, b.y);
  std::istringstream in(to_csv(p));
  const auto back = parse_lda_csv(in);
  EXPECT_EQ(back.points, p.points);
  EXPECT_EQ(back.labels, p.labels);

  LdaProjection empty;
  empty.points.resize(0, 2);
  EXPECT_EQ(to_csv(empty), "x,y,class\n");
}

TEST(Export, HistoryRoundTrip) {
  train::TrainHistory h;
  h.checkpoints.push_back({0, 10, 0.123456789012345, 0.7, 1.5});
  h.checkpoints.push_back({1, 20, 1e-300, 0.693, 2.5});
  std::istringstream in(to_csv(h));
  const auto back = parse_history_csv(in);
  ASSERT_EQ(back.checkpoints.size(), 2u);
  EXPECT_EQ(back.checkpoints[0].loss, 0.123456789012345);
  EXPECT_EQ(back.checkpoints[1].loss, 1e-300);
  EXPECT_EQ(back.checkpoints[1].lr, 0.693);
}

TEST(Export, MalformedInput) {
  std::istringstream ragged("true,pred,count\n0,0\n");
  EXPECT_THROW(parse_confusion_csv(ragged), FormatError);
  std::istringstream incomplete("true,pred,count\n0,0,1\n0,1,1\n");
  EXPECT_THROW(parse_confusion_csv(incomplete), FormatError);
  EXPECT_THROW(export_plot_csv(ConfusionMatrix(2), "/nonexistent-dir/cm.csv"), IoError);
}
