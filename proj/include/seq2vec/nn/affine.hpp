#pragma once

#include <cmath>
#include <string_view>

#include "seq2vec/random.hpp"
#include "seq2vec/tensor.hpp"

namespace seq2vec::nn {

/// y = W x + b.
struct AffineParams {
  Matrix W;  // out x in
  Vector b;  // out

  static AffineParams zeros(int in, int out) {
    return {Matrix::Zero(out, in), Vector::Zero(out)};
  }

  static AffineParams glorot(int in, int out, Rng& rng) {
    AffineParams p = zeros(in, out);
    const double limit = std::sqrt(6.0 / (in + out));
    for (Eigen::Index i = 0; i < p.W.size(); ++i) p.W.data()[i] = rng.uniform(-limit, limit);
    return p;
  }

  int input_dim() const { return static_cast<int>(W.cols()); }
  int output_dim() const { return static_cast<int>(W.rows()); }

  template <class F>
  void visit(F&& f) {
    f(std::string_view("W"), flat(W));
    f(std::string_view("b"), flat(b));
  }
};

/// Column-batched forward: x is in x B, result is out x B.
inline Matrix affine_forward(const Matrix& x, const AffineParams& p) {
  if (x.rows() != p.W.cols())
    throw DataError("affine_forward: input has " + std::to_string(x.rows()) + " rows, expected " +
                    std::to_string(p.W.cols()));
  Matrix y = p.W * x;
  y.colwise() += p.b;
  return y;
}

inline Vector affine_forward(const Vector& x, const AffineParams& p) {
  return affine_forward(Matrix(x), p).col(0);
}

struct AffineBackward {
  AffineParams grads;
  Matrix input_grad;
};

/// Exact gradients for the batched forward; grad_out is out x B.
inline AffineBackward affine_backward(const Matrix& x, const Matrix& grad_out, const AffineParams& p) {
  if (grad_out.rows() != p.W.rows() || x.rows() != p.W.cols() || x.cols() != grad_out.cols())
    throw DataError("affine_backward: shape mismatch");
  AffineBackward out;
  out.grads.W.noalias() = grad_out * x.transpose();
  out.grads.b = grad_out.rowwise().sum();
  out.input_grad.noalias() = p.W.transpose() * grad_out;
  return out;
}

}  // namespace seq2vec::nn
