#pragma once

#include <cmath>

#include "seq2vec/tensor.hpp"

namespace seq2vec::train {

template <ParameterSet P>
double global_norm(P& grads) {
  double sq = 0.0;
  grads.visit([&](std::string_view, std::span<double> d) {
    for (double v : d) sq += v * v;
  });
  return std::sqrt(sq);
}

/// Rescales all gradients by ratio / ||g|| when the global norm exceeds
/// `ratio`. Returns the norm before clipping.
template <ParameterSet P>
double clip_global_norm(P& grads, double ratio) {
  if (!(ratio > 0.0)) throw ConfigError("clipping ratio must be positive");
  const double norm = global_norm(grads);
  if (!std::isfinite(norm)) throw NumericError("non-finite gradient norm (training diverged)");
  if (norm > ratio) {
    const double scale = ratio / norm;
    grads.visit([&](std::string_view, std::span<double> d) {
      for (double& v : d) v *= scale;
    });
  }
  return norm;
}

template <ParameterSet P>
void sgd_step(P& params, P& grads, double lr) {
  auto p = tensors(params);
  auto g = tensors(grads);
  if (p.size() != g.size()) throw DataError("sgd_step: gradient set does not match parameters");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].data.size() != g[i].data.size()) throw DataError("sgd_step: shape mismatch in " + p[i].name);
    for (std::size_t j = 0; j < p[i].data.size(); ++j) p[i].data[j] -= lr * g[i].data[j];
  }
}

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moment estimates, shaped like the parameters.
template <ParameterSet P>
struct AdamState {
  P m;
  P v;
  long step = 0;

  explicit AdamState(const P& like) : m(like), v(like) {
    set_zero(m);
    set_zero(v);
  }
};

/// One bias-corrected Adam update; increments state.step first, so the
/// first call uses t = 1.
template <ParameterSet P>
void adam_step(P& params, P& grads, AdamState<P>& state, double lr, AdamOptions opt = {}) {
  auto p = tensors(params);
  auto g = tensors(grads);
  auto m = tensors(state.m);
  auto v = tensors(state.v);
  if (p.size() != g.size() || p.size() != m.size()) throw DataError("adam_step: tensor count mismatch");
  ++state.step;
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].data.size() != g[i].data.size() || p[i].data.size() != m[i].data.size())
      throw DataError("adam_step: shape mismatch in " + p[i].name);
    for (std::size_t j = 0; j < p[i].data.size(); ++j) {
      const double gj = g[i].data[j];
      m[i].data[j] = opt.beta1 * m[i].data[j] + (1.0 - opt.beta1) * gj;
      v[i].data[j] = opt.beta2 * v[i].data[j] + (1.0 - opt.beta2) * gj * gj;
      const double mhat = m[i].data[j] / c1;
      const double vhat = v[i].data[j] / c2;
      p[i].data[j] -= lr * mhat / (std::sqrt(vhat) + opt.epsilon);
    }
  }
}

/// Staircase exponential decay: lr0 * rate^floor(step / every).
inline double exponential_decay(double lr0, long step, long every, double rate) {
  return lr0 * std::pow(rate, static_cast<double>(step / every));
}

}  // namespace seq2vec::train
