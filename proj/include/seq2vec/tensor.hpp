#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seq2vec/error.hpp"

namespace seq2vec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// One parameter (or gradient) tensor exposed as flat storage.
struct TensorRef {
  std::string name;
  std::span<double> data;
};

template <class P>
concept ParameterSet = requires(P& p) {
  p.visit([](std::string_view, std::span<double>) {});
};

/// Flat view over every tensor of a parameter set, in its fixed visiting order.
template <ParameterSet P>
std::vector<TensorRef> tensors(P& params) {
  std::vector<TensorRef> out;
  params.visit([&](std::string_view name, std::span<double> data) {
    out.push_back({std::string(name), data});
  });
  return out;
}

template <class Derived>
std::span<double> flat(Eigen::PlainObjectBase<Derived>& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

template <class Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

template <ParameterSet P>
bool all_finite(P& params) {
  bool ok = true;
  params.visit([&](std::string_view, std::span<double> d) {
    for (double v : d) ok = ok && std::isfinite(v);
  });
  return ok;
}

/// Sets every entry of a parameter set to zero; used to reset gradient buffers.
template <ParameterSet P>
void set_zero(P& params) {
  params.visit([](std::string_view, std::span<double> d) {
    for (double& v : d) v = 0.0;
  });
}

/// acc += g, tensor by tensor. Both sets must share a shape.
template <ParameterSet P>
void accumulate(P& acc, P& g) {
  auto a = tensors(acc);
  auto b = tensors(g);
  require(a.size() == b.size(), "accumulate: tensor count mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) {
    require(a[i].data.size() == b[i].data.size(), "accumulate: shape mismatch in " + a[i].name);
    for (std::size_t j = 0; j < a[i].data.size(); ++j) a[i].data[j] += b[i].data[j];
  }
}

}  // namespace seq2vec
