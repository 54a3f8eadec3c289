#pragma once

// Plain-loop forward passes evaluated in a caller-chosen scalar type. They
// share no code with the Eigen path and serve as the finite-difference
// oracle: evaluating the loss in long double keeps the central-difference
// quotient's rounding noise well below the 1e-5 relative tolerance even for
// gradient entries around 1e-9.

#include <cmath>
#include <span>
#include <vector>

#include "seq2vec/nn/autoencoder.hpp"
#include "seq2vec/nn/classifier.hpp"

namespace seq2vec::nn::reference {

template <class S>
using Vec = std::vector<S>;

template <class S>
Vec<S> matvec(const Matrix& W, const Vec<S>& x) {
  Vec<S> y(static_cast<std::size_t>(W.rows()), S(0));
  for (Eigen::Index i = 0; i < W.rows(); ++i)
    for (Eigen::Index j = 0; j < W.cols(); ++j) y[static_cast<std::size_t>(i)] += S(W(i, j)) * x[static_cast<std::size_t>(j)];
  return y;
}

template <class S>
Vec<S> gru_step(const GruLayerParams& p, const Vec<S>& x, const Vec<S>& h) {
  const std::size_t n = h.size();
  const Vec<S> xz = matvec<S>(p.W_xz, x), hz = matvec<S>(p.W_hz, h);
  const Vec<S> xr = matvec<S>(p.W_xr, x), hr = matvec<S>(p.W_hr, h);
  Vec<S> z(n), r(n), gated(n);
  for (std::size_t j = 0; j < n; ++j) {
    z[j] = S(1) / (S(1) + std::exp(-(xz[j] + hz[j] + S(p.b_z(static_cast<Eigen::Index>(j))))));
    r[j] = S(1) / (S(1) + std::exp(-(xr[j] + hr[j] + S(p.b_r(static_cast<Eigen::Index>(j))))));
    gated[j] = r[j] * h[j];
  }
  const Vec<S> xh = matvec<S>(p.W_xh, x), hh = matvec<S>(p.W_hh, gated);
  Vec<S> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const S cand = std::tanh(xh[j] + hh[j] + S(p.b_h(static_cast<Eigen::Index>(j))));
    out[j] = (S(1) - z[j]) * h[j] + z[j] * cand;
  }
  return out;
}

template <class S>
Vec<S> affine(const AffineParams& p, const Vec<S>& x) {
  Vec<S> y = matvec<S>(p.W, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += S(p.b(static_cast<Eigen::Index>(i)));
  return y;
}

template <class S>
Vec<S> column(const Matrix& m, Eigen::Index col) {
  Vec<S> v(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) v[static_cast<std::size_t>(i)] = S(m(i, col));
  return v;
}

/// Hidden states of one layer over the valid prefix of a single sequence.
template <class S>
std::vector<Vec<S>> gru_run(const GruLayerParams& p, const std::vector<Vec<S>>& xs, Vec<S> h) {
  std::vector<Vec<S>> out;
  for (const auto& x : xs) {
    h = gru_step<S>(p, x, h);
    out.push_back(h);
  }
  return out;
}

/// Masked reconstruction loss of a padded batch (same contract as
/// autoencoder_forward_backward), one sequence at a time.
template <class S>
S autoencoder_loss(const EncoderDecoderModel& model, std::span<const Matrix> steps, std::span<const int> lengths) {
  const auto n = static_cast<std::size_t>(model.shape.hidden_units);
  S total(0);
  for (std::size_t b = 0; b < lengths.size(); ++b) {
    const auto len = static_cast<std::size_t>(lengths[b]);
    std::vector<Vec<S>> x;
    for (std::size_t t = 0; t < len; ++t) x.push_back(column<S>(steps[t], static_cast<Eigen::Index>(b)));

    std::vector<Vec<S>> input(x.rbegin(), x.rend());
    std::vector<Vec<S>> finals;
    for (const auto& layer : model.encoder) {
      input = gru_run<S>(layer, input, Vec<S>(n, S(0)));
      finals.push_back(input.back());
    }

    std::vector<Vec<S>> dec_in;
    dec_in.push_back(Vec<S>(static_cast<std::size_t>(model.feature_dim), S(0)));
    for (std::size_t t = 0; t + 1 < len; ++t) dec_in.push_back(x[t]);
    for (std::size_t l = 0; l < model.decoder.size(); ++l) dec_in = gru_run<S>(model.decoder[l], dec_in, finals[l]);

    S seq_loss(0);
    for (std::size_t t = 0; t < len; ++t) {
      const Vec<S> y = affine<S>(model.projection, dec_in[t]);
      for (std::size_t j = 0; j < y.size(); ++j) seq_loss += (y[j] - x[t][j]) * (y[j] - x[t][j]);
    }
    total += seq_loss / S(len);
  }
  return total / S(lengths.size());
}

}  // namespace seq2vec::nn::reference

namespace seq2vec::nn::reference {

/// Mean cross-entropy of the GRU classifier, inputs as columns.
template <class S>
S classifier_loss(const GruClassifier& clf, const Matrix& inputs, std::span<const int> labels) {
  S total(0);
  for (Eigen::Index b = 0; b < inputs.cols(); ++b) {
    const Vec<S> h = gru_step<S>(clf.gru, column<S>(inputs, b), Vec<S>(static_cast<std::size_t>(clf.hidden_units()), S(0)));
    const Vec<S> logits = affine<S>(clf.output, h);
    S mx = logits[0];
    for (S v : logits) mx = std::max(mx, v);
    S z(0);
    for (S v : logits) z += std::exp(v - mx);
    total -= logits[static_cast<std::size_t>(labels[static_cast<std::size_t>(b)])] - mx - std::log(z);
  }
  return total / S(inputs.cols());
}

}  // namespace seq2vec::nn::reference
