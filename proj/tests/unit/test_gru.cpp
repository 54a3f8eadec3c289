#include <gtest/gtest.h>

#include "seq2vec/nn/affine.hpp"
#include "seq2vec/nn/autoencoder.hpp"
#include "seq2vec/nn/gradient_check.hpp"
#include "seq2vec/nn/gradient_suite.hpp"
#include "seq2vec/nn/gru.hpp"
#include "seq2vec/nn/reference.hpp"

using namespace seq2vec;
using namespace seq2vec::nn;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

GruLayerParams random_layer(int m, int n, Rng& rng, double scale = 0.8) {
  GruLayerParams p = GruLayerParams::zeros(m, n);
  p.visit([&](std::string_view, std::span<double> d) {
    for (double& v : d) v = rng.uniform(-scale, scale);
  });
  return p;
}

// Linear functional of all hidden states; its gradient w.r.t. h_t is G_t.
struct ProbeLoss {
  std::vector<Matrix> inputs;
  std::vector<int> lengths;
  Matrix h0;
  std::vector<Matrix> g_hidden;
  Matrix g_final;

  double operator()(const GruLayerParams& p) const {
    auto r = gru_forward(p, inputs, lengths, h0, false);
    double s = (r.h_final.array() * g_final.array()).sum();
    for (std::size_t t = 0; t < inputs.size(); ++t) s += (r.hidden[t].array() * g_hidden[t].array()).sum();
    return s;
  }
};

ProbeLoss make_probe(int m, int n, int T, std::vector<int> lengths, Rng& rng) {
  ProbeLoss probe;
  const auto B = static_cast<Eigen::Index>(lengths.size());
  for (int t = 0; t < T; ++t) probe.inputs.push_back(random_matrix(m, B, rng));
  probe.lengths = std::move(lengths);
  probe.h0 = random_matrix(n, B, rng, 0.5);
  for (int t = 0; t < T; ++t) probe.g_hidden.push_back(random_matrix(n, B, rng));
  probe.g_final = random_matrix(n, B, rng);
  return probe;
}

}  // namespace

TEST(GruCell, ClosedUpdateGateKeepsPreviousState) {
  Rng rng(1);
  GruLayerParams p = random_layer(3, 4, rng);
  p.b_z.setConstant(-50.0);
  const Vector x = random_matrix(3, 1, rng).col(0);
  const Vector h = random_matrix(4, 1, rng).col(0);
  const auto out = gru_cell_forward(x, h, p);
  EXPECT_LT((out.h - h).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(GruCell, OpenUpdateGateTakesCandidate) {
  Rng rng(2);
  GruLayerParams p = random_layer(3, 4, rng);
  p.b_z.setConstant(50.0);
  const Vector x = random_matrix(3, 1, rng).col(0);
  const Vector h = random_matrix(4, 1, rng).col(0);
  const auto out = gru_cell_forward(x, h, p);
  EXPECT_LT((out.h - out.cache.h_cand.col(0)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(GruCell, ZeroParametersHalveTheState) {
  const GruLayerParams p = GruLayerParams::zeros(2, 3);
  const Vector h0 = Vector::LinSpaced(3, -1.0, 2.0);
  const auto out = gru_cell_forward(Vector::Constant(2, 0.7), h0, p);
  EXPECT_TRUE(out.cache.z.isConstant(0.5));
  EXPECT_TRUE(out.cache.r.isConstant(0.5));
  EXPECT_TRUE(out.cache.h_cand.isZero());
  EXPECT_TRUE(out.h.isApprox(0.5 * h0));
}

TEST(GruCell, RejectsBadShapesAndNonFiniteInput) {
  const GruLayerParams p = GruLayerParams::zeros(2, 3);
  EXPECT_THROW(gru_cell_forward(Vector::Zero(3), Vector::Zero(3), p), DataError);
  EXPECT_THROW(gru_cell_forward(Vector::Zero(2), Vector::Zero(2), p), DataError);
  Vector x = Vector::Zero(2);
  x(0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(gru_cell_forward(x, Vector::Zero(3), p), NumericError);
  GruLayerParams broken = p;
  broken.b_r.resize(2);
  EXPECT_THROW(gru_cell_forward(Vector::Zero(2), Vector::Zero(3), broken), DataError);
}

TEST(GruSequence, SingleStepMatchesCell) {
  Rng rng(3);
  const GruLayerParams p = random_layer(2, 3, rng);
  const Matrix seq = random_matrix(1, 2, rng);
  const Vector h0 = random_matrix(3, 1, rng).col(0);
  const auto seq_out = gru_sequence_forward(seq, {true}, p, h0);
  const auto cell_out = gru_cell_forward(seq.row(0).transpose(), h0, p);
  EXPECT_EQ(Vector(seq_out.h_final.col(0)), cell_out.h);
}

TEST(GruSequence, PaddingLeavesFinalStateBitwiseUnchanged) {
  Rng rng(4);
  const GruLayerParams p = random_layer(3, 5, rng);
  const Vector h0 = Vector::Zero(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int T = 1 + static_cast<int>(rng.index(8));
    const int pad = static_cast<int>(rng.index(11));
    Matrix seq = random_matrix(T, 3, rng);
    Matrix padded = Matrix::Zero(T + pad, 3);
    padded.topRows(T) = seq;
    padded.bottomRows(pad) = random_matrix(pad, 3, rng, 10.0);  // garbage must be ignored
    std::vector<bool> mask(static_cast<std::size_t>(T + pad), false);
    std::fill_n(mask.begin(), T, true);
    const auto a = gru_sequence_forward(seq, full_mask(T), p, h0);
    const auto b = gru_sequence_forward(padded, mask, p, h0);
    ASSERT_EQ(a.h_final, b.h_final) << "T=" << T << " pad=" << pad;
  }
}

TEST(GruSequence, AllMaskedReturnsInitialState) {
  Rng rng(5);
  const GruLayerParams p = random_layer(2, 3, rng);
  const Vector h0 = random_matrix(3, 1, rng).col(0);
  const auto out = gru_sequence_forward(random_matrix(4, 2, rng), {false, false, false, false}, p, h0);
  EXPECT_EQ(Vector(out.h_final.col(0)), h0);
}

TEST(GruSequence, RejectsNonPrefixMask) {
  const GruLayerParams p = GruLayerParams::zeros(2, 3);
  EXPECT_THROW(gru_sequence_forward(Matrix::Zero(3, 2), {true, false, true}, p, Vector::Zero(3)), DataError);
}

TEST(GruSequence, GateRangesHoldOnRandomInputs) {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const GruLayerParams p = random_layer(4, 6, rng, 1.5);
    const auto out = gru_sequence_forward(random_matrix(12, 4, rng, 3.0), full_mask(12), p, Vector::Zero(6));
    for (const auto& s : out.cache.steps) {
      EXPECT_GT(s.z.minCoeff(), 0.0);
      EXPECT_LT(s.z.maxCoeff(), 1.0);
      EXPECT_GT(s.r.minCoeff(), 0.0);
      EXPECT_LT(s.r.maxCoeff(), 1.0);
      EXPECT_GT(s.h_cand.minCoeff(), -1.0);
      EXPECT_LT(s.h_cand.maxCoeff(), 1.0);
    }
  }
}

TEST(GruSequence, Deterministic) {
  Rng a(7), b(7);
  const GruLayerParams pa = GruLayerParams::glorot(3, 4, a), pb = GruLayerParams::glorot(3, 4, b);
  Rng data(8);
  const Matrix seq = random_matrix(6, 3, data);
  EXPECT_EQ(gru_sequence_forward(seq, full_mask(6), pa, Vector::Zero(4)).h_final,
            gru_sequence_forward(seq, full_mask(6), pb, Vector::Zero(4)).h_final);
}

TEST(GruBackward, ZeroUpstreamGivesZeroGradients) {
  Rng rng(9);
  auto probe = make_probe(2, 3, 4, {4, 2}, rng);
  const GruLayerParams p = random_layer(2, 3, rng);
  const auto fwd = gru_forward(p, probe.inputs, probe.lengths, probe.h0);
  std::vector<Matrix> zeros(4, Matrix::Zero(3, 2));
  const auto back = gru_backward(p, fwd.cache, zeros, Matrix::Zero(3, 2));
  GruLayerParams g = back.grads;
  for (const auto& t : tensors(g))
    for (double v : t.data) EXPECT_EQ(v, 0.0);
  for (const auto& dx : back.input_grads) EXPECT_TRUE(dx.isZero(0.0));
  EXPECT_TRUE(back.grad_h0.isZero(0.0));
}

TEST(GruBackward, MatchesFiniteDifferences) {
  Rng rng(10);
  auto probe = make_probe(2, 3, 4, {4}, rng);
  GruLayerParams p = random_layer(2, 3, rng);
  const auto fwd = gru_forward(p, probe.inputs, probe.lengths, probe.h0);
  auto back = gru_backward(p, fwd.cache, probe.g_hidden, probe.g_final);
  const auto report = gradient_check<GruLayerParams>(p, back.grads, probe, 1e-5, 1e-6);
  EXPECT_TRUE(report.passed()) << "max rel err " << report.max_rel_error;
}

TEST(GruBackward, InputAndInitialStateGradientsMatchFiniteDifferences) {
  Rng rng(11);
  auto probe = make_probe(3, 4, 5, {5, 3, 1}, rng);
  const GruLayerParams p = random_layer(3, 4, rng);
  const auto fwd = gru_forward(p, probe.inputs, probe.lengths, probe.h0);
  const auto back = gru_backward(p, fwd.cache, probe.g_hidden, probe.g_final);
  const double delta = 1e-5;
  auto fd = [&](double& slot) {
    const double saved = slot;
    slot = saved + delta;
    const double up = probe(p);
    slot = saved - delta;
    const double down = probe(p);
    slot = saved;
    return (up - down) / (2 * delta);
  };
  for (Eigen::Index i = 0; i < probe.h0.size(); ++i)
    EXPECT_LT(relative_error(back.grad_h0.data()[i], fd(probe.h0.data()[i])), 1e-6);
  for (std::size_t t = 0; t < probe.inputs.size(); ++t)
    for (Eigen::Index i = 0; i < probe.inputs[t].size(); ++i)
      EXPECT_LT(relative_error(back.input_grads[t].data()[i], fd(probe.inputs[t].data()[i])), 1e-6);
}

TEST(GruBackward, PaddedStepsContributeNothing) {
  Rng rng(12);
  auto probe = make_probe(2, 3, 6, {3}, rng);
  GruLayerParams p = random_layer(2, 3, rng);
  auto fwd = gru_forward(p, probe.inputs, probe.lengths, probe.h0);
  // Upstream gradient only on padded steps: flows to h0 but not into parameters.
  std::vector<Matrix> g(6, Matrix::Zero(3, 1));
  g[4] = random_matrix(3, 1, rng);
  auto back = gru_backward(p, fwd.cache, g, Matrix::Zero(3, 1));
  std::vector<Matrix> g_valid(6, Matrix::Zero(3, 1));
  auto back_valid = gru_backward(p, fwd.cache, g_valid, g[4]);
  EXPECT_TRUE(back.grads.W_hh.isApprox(back_valid.grads.W_hh));
  EXPECT_TRUE(back.input_grads[4].isZero(0.0));
  EXPECT_TRUE(back.input_grads[5].isZero(0.0));
}

TEST(GruBackward, AllMaskedPassesFinalGradientToInitialState) {
  Rng rng(13);
  auto probe = make_probe(2, 3, 4, {0}, rng);
  const GruLayerParams p = random_layer(2, 3, rng);
  const auto fwd = gru_forward(p, probe.inputs, probe.lengths, probe.h0);
  const auto back = gru_backward(p, fwd.cache, {}, probe.g_final);
  EXPECT_EQ(back.grad_h0, probe.g_final);
}

TEST(GruBackward, RejectsMismatchedCache) {
  Rng rng(14);
  auto probe = make_probe(2, 3, 2, {2}, rng);
  const GruLayerParams p = random_layer(2, 3, rng);
  const auto fwd = gru_forward(p, probe.inputs, probe.lengths, probe.h0);
  const GruLayerParams other = random_layer(2, 4, rng);
  EXPECT_THROW(gru_backward(other, fwd.cache, {}, Matrix::Zero(4, 1)), DataError);
  EXPECT_THROW(gru_backward(p, fwd.cache, {}, Matrix::Zero(3, 2)), DataError);
}

TEST(GruBackward, RandomSmallInstancesMatchFiniteDifferences) {
  Rng rng(15);
  for (int trial = 0; trial < 15; ++trial) {
    const int m = 1 + static_cast<int>(rng.index(8));
    const int n = 1 + static_cast<int>(rng.index(8));
    const int T = 1 + static_cast<int>(rng.index(6));
    std::vector<int> lengths{T, 1 + static_cast<int>(rng.index(static_cast<std::size_t>(T)))};
    auto probe = make_probe(m, n, T, lengths, rng);
    GruLayerParams p = random_layer(m, n, rng);
    const auto fwd = gru_forward(p, probe.inputs, probe.lengths, probe.h0);
    auto back = gru_backward(p, fwd.cache, probe.g_hidden, probe.g_final);
    const auto report = gradient_check<GruLayerParams>(p, back.grads, probe, 1e-5, 1e-5);
    EXPECT_TRUE(report.passed()) << "m=" << m << " n=" << n << " T=" << T << " err=" << report.max_rel_error;
  }
}

TEST(Affine, IdentityAndBias) {
  AffineParams p = AffineParams::zeros(3, 3);
  p.W.setIdentity();
  const Vector x(Vector::LinSpaced(3, 1.0, 3.0));
  EXPECT_EQ(affine_forward(x, p), x);
  p.b << 4, 5, 6;
  EXPECT_EQ(affine_forward(Vector(Vector::Zero(3)), p), p.b);
  EXPECT_THROW(affine_forward(Vector(Vector::Zero(2)), p), DataError);
}

TEST(Affine, BackwardMatchesFiniteDifferences) {
  Rng rng(16);
  AffineParams p = AffineParams::glorot(7, 5, rng);
  p.b = random_matrix(5, 1, rng).col(0);
  const Matrix x = random_matrix(7, 1, rng);
  const Matrix g = random_matrix(5, 1, rng);
  auto loss = [&](const AffineParams& q) { return (affine_forward(x, q).array() * g.array()).sum(); };
  auto back = affine_backward(x, g, p);
  const auto report = gradient_check<AffineParams>(p, back.grads, loss, 1e-5, 1e-8);
  EXPECT_TRUE(report.passed()) << report.max_rel_error;
}

TEST(GradientCheck, QuadraticAffineLossIsExact) {
  Rng rng(17);
  AffineParams p = AffineParams::glorot(4, 3, rng);
  const Matrix x = random_matrix(4, 1, rng);
  const Matrix target = random_matrix(3, 1, rng);
  auto loss = [&](const AffineParams& q) { return 0.5 * (affine_forward(x, q) - target).squaredNorm(); };
  auto back = affine_backward(x, affine_forward(x, p) - target, p);
  const auto report = gradient_check<AffineParams>(p, back.grads, loss, 1e-5, 1e-9);
  EXPECT_TRUE(report.passed()) << report.max_rel_error;
}

TEST(GradientCheck, TwoLayerAutoencoder) {
  Rng rng(18);
  EncoderDecoderModel model = EncoderDecoderModel::zeros(3, ModelShape{4, 2});
  model.visit([&](std::string_view, std::span<double> d) {
    for (double& v : d) v = rng.uniform(-1.0, 1.0);
  });
  std::vector<Matrix> steps;
  for (int t = 0; t < 5; ++t) steps.push_back(random_matrix(3, 2, rng));
  const std::vector<int> lengths{5, 3};
  EncoderDecoderModel grads;
  autoencoder_forward_backward(model, steps, lengths, &grads);
  auto loss = [&](const EncoderDecoderModel& m) { return reference::autoencoder_loss<long double>(m, steps, lengths); };
  const auto report = gradient_check(model, grads, loss, 1e-5, 1e-5);
  EXPECT_TRUE(report.passed()) << report.max_rel_error;
    // Per stack: layer 0 has 3*(4*3) + 3*(4*4) + 3*4 entries, layer 1 has 3*(4*4) twice + 3*4.
  const std::size_t stack = (36 + 48 + 12) + (48 + 48 + 12);
  EXPECT_EQ(report.entries_checked, 2 * stack + (4 * 3 + 3));
}

TEST(GradientCheck, CorruptedGradientFails) {
  Rng rng(19);
  AffineParams p = AffineParams::glorot(4, 3, rng);
  const Matrix x = random_matrix(4, 1, rng);
  auto loss = [&](const AffineParams& q) { return 0.5 * affine_forward(x, q).squaredNorm(); };
  auto back = affine_backward(x, affine_forward(x, p), p);
  back.grads.W(1, 2) *= 2.0;
  const auto report = gradient_check<AffineParams>(p, back.grads, loss, 1e-5, 1e-5);
  EXPECT_FALSE(report.passed());
}

TEST(GradientCheck, NonFiniteLossIsAnError) {
  AffineParams p = AffineParams::zeros(2, 2);
  AffineParams g = p;
  auto loss = [](const AffineParams&) { return std::numeric_limits<double>::infinity(); };
  EXPECT_THROW(gradient_check<AffineParams>(p, g, loss), NumericError);
}

TEST(GradientSuite, MixedInstancesPass) {
  const auto cases = run_gradient_suite(24, 11);
  ASSERT_EQ(cases.size(), 24u);
  for (const auto& c : cases) EXPECT_TRUE(c.report.passed()) << c.kind << " " << c.dims << " " << c.report.max_rel_error;
}
