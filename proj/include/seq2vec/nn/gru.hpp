#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string_view>
#include <vector>

#include "seq2vec/random.hpp"
#include "seq2vec/tensor.hpp"

namespace seq2vec::nn {

/// Parameters of one GRU layer with m inputs and n hidden units.
///
///   z_t  = sigm(W_xz x_t + W_hz h_{t-1} + b_z)
///   r_t  = sigm(W_xr x_t + W_hr h_{t-1} + b_r)
///   h~_t = tanh(W_xh x_t + W_hh (r_t * h_{t-1}) + b_h)
///   h_t  = (1 - z_t) * h_{t-1} + z_t * h~_t
///
/// The same type doubles as the gradient set of a layer.
struct GruLayerParams {
  Matrix W_xz, W_xr, W_xh;  // n x m
  Matrix W_hz, W_hr, W_hh;  // n x n
  Vector b_z, b_r, b_h;     // n

  static GruLayerParams zeros(int input_dim, int hidden) {
    GruLayerParams p;
    p.W_xz = p.W_xr = p.W_xh = Matrix::Zero(hidden, input_dim);
    p.W_hz = p.W_hr = p.W_hh = Matrix::Zero(hidden, hidden);
    p.b_z = p.b_r = p.b_h = Vector::Zero(hidden);
    return p;
  }

  /// Uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static GruLayerParams glorot(int input_dim, int hidden, Rng& rng) {
    GruLayerParams p = zeros(input_dim, hidden);
    auto fill = [&](Matrix& m) {
      const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-limit, limit);
    };
    fill(p.W_xz), fill(p.W_xr), fill(p.W_xh);
    fill(p.W_hz), fill(p.W_hr), fill(p.W_hh);
    return p;
  }

  int input_dim() const { return static_cast<int>(W_xz.cols()); }
  int hidden() const { return static_cast<int>(W_xz.rows()); }

  bool shapes_consistent() const {
    const auto n = W_xz.rows(), m = W_xz.cols();
    auto is = [](const Matrix& a, Eigen::Index r, Eigen::Index c) { return a.rows() == r && a.cols() == c; };
    return is(W_xr, n, m) && is(W_xh, n, m) && is(W_hz, n, n) && is(W_hr, n, n) && is(W_hh, n, n) &&
           b_z.size() == n && b_r.size() == n && b_h.size() == n;
  }

  template <class F>
  void visit(F&& f) {
    f(std::string_view("W_xz"), flat(W_xz));
    f(std::string_view("W_xr"), flat(W_xr));
    f(std::string_view("W_xh"), flat(W_xh));
    f(std::string_view("W_hz"), flat(W_hz));
    f(std::string_view("W_hr"), flat(W_hr));
    f(std::string_view("W_hh"), flat(W_hh));
    f(std::string_view("b_z"), flat(b_z));
    f(std::string_view("b_r"), flat(b_r));
    f(std::string_view("b_h"), flat(b_h));
  }
};

using GruLayerGrads = GruLayerParams;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Intermediates of one time step for a batch of B columns.
struct GruStepCache {
  Matrix x;       // m x B
  Matrix h_prev;  // n x B
  Matrix z, r, h_cand;
  std::vector<std::uint8_t> active;  // per column; inactive columns carry h_prev through
};

struct GruLayerCache {
  std::vector<GruStepCache> steps;
  int input_dim = 0;
  int hidden = 0;
  Eigen::Index batch = 0;
};

namespace detail {

inline void check_layer(const GruLayerParams& p) {
  if (!p.shapes_consistent()) throw DataError("GRU layer parameters have inconsistent shapes");
}

/// One batched step. Columns with active[b] == 0 keep their previous state.
inline Matrix gru_step(const Matrix& x, const Matrix& h_prev, const GruLayerParams& p,
                       std::vector<std::uint8_t> active, GruStepCache* cache) {
  Matrix z = p.W_xz * x;
  z.noalias() += p.W_hz * h_prev;
  z.colwise() += p.b_z;
  z = z.unaryExpr([](double v) { return sigmoid(v); });

  Matrix r = p.W_xr * x;
  r.noalias() += p.W_hr * h_prev;
  r.colwise() += p.b_r;
  r = r.unaryExpr([](double v) { return sigmoid(v); });

  const Matrix gated = r.cwiseProduct(h_prev);
  Matrix h_cand = p.W_xh * x;
  h_cand.noalias() += p.W_hh * gated;
  h_cand.colwise() += p.b_h;
  h_cand = h_cand.array().tanh().matrix();

  Matrix h = (1.0 - z.array()).matrix().cwiseProduct(h_prev) + z.cwiseProduct(h_cand);
  for (Eigen::Index b = 0; b < h.cols(); ++b)
    if (!active[static_cast<std::size_t>(b)]) h.col(b) = h_prev.col(b);

  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->z = std::move(z);
    cache->r = std::move(r);
    cache->h_cand = std::move(h_cand);
    cache->active = std::move(active);
  }
  return h;
}

inline std::vector<std::uint8_t> active_columns(std::span<const int> lengths, std::size_t t) {
  std::vector<std::uint8_t> a(lengths.size());
  for (std::size_t b = 0; b < lengths.size(); ++b) a[b] = static_cast<int>(t) < lengths[b] ? 1 : 0;
  return a;
}

}  // namespace detail

struct GruCellResult {
  Vector h;
  GruStepCache cache;
};

/// A single unmasked step on one sequence.
inline GruCellResult gru_cell_forward(const Vector& x, const Vector& h_prev, const GruLayerParams& p) {
  detail::check_layer(p);
  if (x.size() != p.input_dim() || h_prev.size() != p.hidden())
    throw DataError("gru_cell_forward: input or state has the wrong dimension");
  if (!x.allFinite() || !h_prev.allFinite()) throw NumericError("gru_cell_forward: non-finite input");
  GruCellResult out;
  out.h = detail::gru_step(Matrix(x), Matrix(h_prev), p, {1}, &out.cache).col(0);
  return out;
}

struct GruSequenceResult {
  std::vector<Matrix> hidden;  // T entries, each n x B
  Matrix h_final;              // n x B, state after each column's last valid step
  GruLayerCache cache;
};

/// Runs a layer over a padded batch. inputs holds T matrices of shape m x B;
/// column b is valid for steps t < lengths[b] and carries its state through
/// the remaining (padded) steps.
inline GruSequenceResult gru_forward(const GruLayerParams& p, std::span<const Matrix> inputs,
                                     std::span<const int> lengths, const Matrix& h0,
                                     bool keep_cache = true) {
  detail::check_layer(p);
  const auto B = static_cast<Eigen::Index>(lengths.size());
  if (h0.rows() != p.hidden() || h0.cols() != B) throw DataError("gru_forward: initial state shape mismatch");
  for (int len : lengths)
    if (len < 0 || len > static_cast<int>(inputs.size())) throw DataError("gru_forward: length out of range");

  GruSequenceResult out;
  out.cache.input_dim = p.input_dim();
  out.cache.hidden = p.hidden();
  out.cache.batch = B;
  if (keep_cache) out.cache.steps.resize(inputs.size());
  out.hidden.reserve(inputs.size());

  Matrix h = h0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const Matrix& x = inputs[t];
    if (x.rows() != p.input_dim() || x.cols() != B) throw DataError("gru_forward: input shape mismatch at step " + std::to_string(t));
    h = detail::gru_step(x, h, p, detail::active_columns(lengths, t), keep_cache ? &out.cache.steps[t] : nullptr);
    out.hidden.push_back(h);
  }
  out.h_final = std::move(h);
  return out;
}

/// Converts a boolean mask to its valid-prefix length, rejecting masks that
/// are not a run of true values followed by false values.
inline int prefix_length(const std::vector<bool>& mask) {
  int len = 0;
  while (len < static_cast<int>(mask.size()) && mask[static_cast<std::size_t>(len)]) ++len;
  for (std::size_t t = static_cast<std::size_t>(len); t < mask.size(); ++t)
    if (mask[t]) throw DataError("mask is not a contiguous valid prefix");
  return len;
}

/// Single-sequence convenience wrapper: seq is T x m (one frame per row).
inline GruSequenceResult gru_sequence_forward(const Matrix& seq, const std::vector<bool>& mask,
                                              const GruLayerParams& p, const Vector& h0) {
  if (static_cast<Eigen::Index>(mask.size()) != seq.rows()) throw DataError("gru_sequence_forward: mask length mismatch");
  const int len = prefix_length(mask);
  std::vector<Matrix> steps;
  steps.reserve(static_cast<std::size_t>(seq.rows()));
  for (Eigen::Index t = 0; t < seq.rows(); ++t) steps.emplace_back(seq.row(t).transpose());
  const int lengths[1] = {len};
  return gru_forward(p, steps, lengths, Matrix(h0));
}

struct GruBackwardResult {
  GruLayerGrads grads;
  std::vector<Matrix> input_grads;  // T entries, m x B
  Matrix grad_h0;                   // n x B
};

/// Backpropagation through time for one layer.
///
/// grad_hidden[t] is dL/dh_t coming from outside the recurrence (the layer
/// above or an output head; may be empty for "no gradient"), grad_hfinal
/// is dL/dh_final. Padded steps add nothing to the parameter gradients and
/// pass the state gradient straight through.
inline GruBackwardResult gru_backward(const GruLayerParams& p, const GruLayerCache& cache,
                                      std::span<const Matrix> grad_hidden, const Matrix& grad_hfinal) {
  detail::check_layer(p);
  const std::size_t T = cache.steps.size();
  const Eigen::Index n = p.hidden(), m = p.input_dim(), B = cache.batch;
  if (cache.hidden != n || cache.input_dim != m) throw DataError("gru_backward: cache does not match parameters");
  if (!grad_hidden.empty() && grad_hidden.size() != T) throw DataError("gru_backward: grad_hidden length mismatch");
  if (grad_hfinal.rows() != n || grad_hfinal.cols() != B) throw DataError("gru_backward: grad_hfinal shape mismatch");

  GruBackwardResult out;
  out.grads = GruLayerParams::zeros(static_cast<int>(m), static_cast<int>(n));
  out.input_grads.assign(T, Matrix::Zero(m, B));

  Matrix dh = grad_hfinal;
  for (std::size_t k = T; k-- > 0;) {
    const GruStepCache& c = cache.steps[k];
    if (!grad_hidden.empty()) {
      if (grad_hidden[k].rows() != n || grad_hidden[k].cols() != B) throw DataError("gru_backward: grad_hidden shape mismatch");
      dh += grad_hidden[k];
    }

    // Split the incoming gradient: active columns go through the cell,
    // inactive ones pass straight to h_{t-1}.
    Matrix dh_cell = dh;
    Matrix dh_prev = Matrix::Zero(n, B);
    for (Eigen::Index b = 0; b < B; ++b) {
      if (!c.active[static_cast<std::size_t>(b)]) {
        dh_prev.col(b) = dh.col(b);
        dh_cell.col(b).setZero();
      }
    }

    const Matrix dz = dh_cell.cwiseProduct(c.h_cand - c.h_prev);
    const Matrix dh_cand = dh_cell.cwiseProduct(c.z);
    dh_prev += dh_cell.cwiseProduct((1.0 - c.z.array()).matrix());

    const Matrix da_h = dh_cand.cwiseProduct((1.0 - c.h_cand.array().square()).matrix());
    const Matrix gated = c.r.cwiseProduct(c.h_prev);
    out.grads.W_xh.noalias() += da_h * c.x.transpose();
    out.grads.W_hh.noalias() += da_h * gated.transpose();
    out.grads.b_h += da_h.rowwise().sum();
    const Matrix dgated = p.W_hh.transpose() * da_h;
    const Matrix dr = dgated.cwiseProduct(c.h_prev);
    dh_prev += dgated.cwiseProduct(c.r);

    const Matrix da_z = dz.cwiseProduct(c.z.cwiseProduct((1.0 - c.z.array()).matrix()));
    const Matrix da_r = dr.cwiseProduct(c.r.cwiseProduct((1.0 - c.r.array()).matrix()));
    out.grads.W_xz.noalias() += da_z * c.x.transpose();
    out.grads.W_hz.noalias() += da_z * c.h_prev.transpose();
    out.grads.b_z += da_z.rowwise().sum();
    out.grads.W_xr.noalias() += da_r * c.x.transpose();
    out.grads.W_hr.noalias() += da_r * c.h_prev.transpose();
    out.grads.b_r += da_r.rowwise().sum();

    Matrix& dx = out.input_grads[k];
    dx.noalias() += p.W_xh.transpose() * da_h;
    dx.noalias() += p.W_xz.transpose() * da_z;
    dx.noalias() += p.W_xr.transpose() * da_r;
    dh_prev.noalias() += p.W_hz.transpose() * da_z;
    dh_prev.noalias() += p.W_hr.transpose() * da_r;

    dh = std::move(dh_prev);
  }
  out.grad_h0 = std::move(dh);
  return out;
}

}  // namespace seq2vec::nn
