#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <string>
#include <vector>

#include "seq2vec/tensor.hpp"

namespace seq2vec::nn {

struct TensorCheck {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;  // at worst_index
  double numeric = 0.0;
};

struct GradientCheckReport {
  std::vector<TensorCheck> tensors;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::size_t entries_checked = 0;

  bool passed() const { return max_rel_error < tolerance; }
};

/// |a - n| / max(|a|, |n|, 1e-12)
inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
  return std::abs(analytic - numeric) / denom;
}

/// Compares analytic gradients against central differences
/// (L(p + d) - L(p - d)) / 2d for every entry of every tensor.
///
/// `loss` is evaluated on `params` after in-place perturbation; each entry is
/// restored bit-exactly afterwards. The loss may return long double, in which
/// case the difference quotient is formed in extended precision.
template <ParameterSet P, class Loss>
GradientCheckReport gradient_check(P& params, P& analytic, Loss&& loss, double delta = 1e-5,
                                   double tolerance = 1e-5) {
  using Real = decltype(loss(std::as_const(params)));
  GradientCheckReport report;
  report.tolerance = tolerance;
  if (!std::isfinite(loss(std::as_const(params)))) throw NumericError("gradient_check: loss is not finite at the base point");

  auto p = tensors(params);
  auto g = tensors(analytic);
  if (p.size() != g.size()) throw DataError("gradient_check: gradient set does not match parameters");

  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].data.size() != g[i].data.size()) throw DataError("gradient_check: shape mismatch in " + p[i].name);
    TensorCheck tc;
    tc.name = p[i].name;
    for (std::size_t j = 0; j < p[i].data.size(); ++j) {
      double& w = p[i].data[j];
      const double saved = w;
      w = saved + delta;
      const Real step_up = static_cast<Real>(w) - static_cast<Real>(saved);
      const Real up = loss(std::as_const(params));
      w = saved - delta;
      const Real step_down = static_cast<Real>(saved) - static_cast<Real>(w);
      const Real down = loss(std::as_const(params));
      w = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) throw NumericError("gradient_check: non-finite loss under perturbation");
      // The realized steps differ from delta by the rounding of saved +- delta.
      const double numeric = static_cast<double>((up - down) / (step_up + step_down));
      const double err = relative_error(g[i].data[j], numeric);
      if (err >= tc.max_rel_error) {
        tc.max_rel_error = err;
        tc.worst_index = j;
        tc.analytic = g[i].data[j];
        tc.numeric = numeric;
      }
      ++report.entries_checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, tc.max_rel_error);
    report.tensors.push_back(std::move(tc));
  }
  return report;
}

}  // namespace seq2vec::nn
