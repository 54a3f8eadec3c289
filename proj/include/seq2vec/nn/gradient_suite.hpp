#pragma once

#include <string>
#include <vector>

#include "seq2vec/nn/gradient_check.hpp"
#include "seq2vec/nn/reference.hpp"
#include "seq2vec/random.hpp"

namespace seq2vec::nn {

/// Outcome of one randomly drawn gradient-check instance.
struct GradientCase {
  std::string kind;  // gru-cell | autoencoder | classifier | affine
  std::string dims;
  GradientCheckReport report;
};

namespace detail {

template <ParameterSet P>
void fill_uniform(P& p, Rng& rng) {
  p.visit([&](std::string_view, std::span<double> d) {
    for (double& v : d) v = rng.uniform(-1.0, 1.0);
  });
}

inline Matrix uniform_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

inline int draw(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.index(static_cast<std::size_t>(hi - lo + 1))); }

}  // namespace detail

/// Random small instances cycling through the GRU cell, the stacked
/// encoder-decoder (L <= 2, n <= 4, d = 3, T <= 5), the GRU classifier and
/// the affine projection. Analytic gradients are compared with central
/// differences of the long-double reference forward pass.
inline std::vector<GradientCase> run_gradient_suite(int instances, std::uint64_t seed, double delta = 1e-5,
                                                    double tol = 1e-5) {
  using detail::draw;
  std::vector<GradientCase> out;
  for (int i = 0; i < instances; ++i) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    GradientCase c;
    switch (i % 4) {
      case 0: {
        const int d = 3, n = draw(rng, 1, 4);
        auto p = GruLayerParams::zeros(d, n);
        detail::fill_uniform(p, rng);
        const Matrix x = detail::uniform_matrix(d, 1, rng), h0 = detail::uniform_matrix(n, 1, rng);
        const Matrix weight = detail::uniform_matrix(n, 1, rng);
        const std::vector<Matrix> xs{x};
        const int len[1] = {1};
        const auto fwd = gru_forward(p, xs, len, h0);
        auto grads = gru_backward(p, fwd.cache, {}, weight).grads;
        auto loss = [&](const GruLayerParams& q) {
          const auto h = reference::gru_step<long double>(q, reference::column<long double>(x, 0),
                                                          reference::column<long double>(h0, 0));
          long double s = 0;
          for (int j = 0; j < n; ++j) s += static_cast<long double>(weight(j, 0)) * h[static_cast<std::size_t>(j)];
          return s;
        };
        c = {"gru-cell", "m=3 n=" + std::to_string(n), gradient_check(p, grads, loss, delta, tol)};
        break;
      }
      case 1: {
        const int L = draw(rng, 1, 2), n = draw(rng, 1, 4), T = draw(rng, 1, 5);
        auto model = EncoderDecoderModel::zeros(3, ModelShape{n, L});
        detail::fill_uniform(model, rng);
        std::vector<Matrix> steps;
        for (int t = 0; t < T; ++t) steps.push_back(detail::uniform_matrix(3, 2, rng));
        const std::vector<int> lengths{T, draw(rng, 1, T)};
        EncoderDecoderModel grads;
        autoencoder_forward_backward(model, steps, lengths, &grads);
        auto loss = [&](const EncoderDecoderModel& m) { return reference::autoencoder_loss<long double>(m, steps, lengths); };
        c = {"autoencoder",
             "d=3 shape=" + ModelShape{n, L}.str() + " T=" + std::to_string(T) + " lengths=" +
                 std::to_string(lengths[0]) + "," + std::to_string(lengths[1]),
             gradient_check(model, grads, loss, delta, tol)};
        break;
      }
      case 2: {
        const int D = draw(rng, 2, 6), n = draw(rng, 1, 4), K = draw(rng, 2, 4);
        auto clf = GruClassifier::zeros(D, n, K);
        detail::fill_uniform(clf, rng);
        const Matrix x = detail::uniform_matrix(D, 3, rng);
        std::vector<int> labels;
        for (int b = 0; b < 3; ++b) labels.push_back(draw(rng, 0, K - 1));
        GruClassifier grads;
        classifier_loss(clf, x, labels, &grads);
        auto loss = [&](const GruClassifier& q) { return reference::classifier_loss<long double>(q, x, labels); };
        c = {"classifier", "D=" + std::to_string(D) + " n=" + std::to_string(n) + " K=" + std::to_string(K),
             gradient_check(clf, grads, loss, delta, tol)};
        break;
      }
      default: {
        const int n = draw(rng, 1, 4), d = 3;
        auto p = AffineParams::zeros(n, d);
        detail::fill_uniform(p, rng);
        const Matrix x = detail::uniform_matrix(n, 1, rng), target = detail::uniform_matrix(d, 1, rng);
        auto grads = affine_backward(x, affine_forward(x, p) - target, p).grads;
        auto loss = [&](const AffineParams& q) {
          const auto y = reference::affine<long double>(q, reference::column<long double>(x, 0));
          long double s = 0;
          for (int j = 0; j < d; ++j) {
            const long double e = y[static_cast<std::size_t>(j)] - static_cast<long double>(target(j, 0));
            s += 0.5L * e * e;
          }
          return s;
        };
        c = {"affine", "in=" + std::to_string(n) + " out=3", gradient_check(p, grads, loss, delta, tol)};
        break;
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace seq2vec::nn
