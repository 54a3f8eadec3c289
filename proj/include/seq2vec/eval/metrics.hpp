#pragma once

#include <span>
#include <string>
#include <vector>

#include "seq2vec/error.hpp"

namespace seq2vec::eval {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int num_classes)
      : k_(num_classes), counts_(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_classes), 0) {
    if (num_classes < 1) throw DataError("confusion matrix needs at least one class");
  }

  int num_classes() const { return k_; }
  long long& at(int truth, int pred) { return counts_[index(truth, pred)]; }
  long long at(int truth, int pred) const { return counts_[index(truth, pred)]; }

  long long row_sum(int truth) const {
    long long s = 0;
    for (int j = 0; j < k_; ++j) s += at(truth, j);
    return s;
  }
  long long col_sum(int pred) const {
    long long s = 0;
    for (int i = 0; i < k_; ++i) s += at(i, pred);
    return s;
  }
  long long total() const {
    long long s = 0;
    for (auto c : counts_) s += c;
    return s;
  }

  bool operator==(const ConfusionMatrix&) const = default;

private:
  std::size_t index(int i, int j) const {
    if (i < 0 || i >= k_ || j < 0 || j >= k_) throw DataError("confusion matrix index out of range");
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(j);
  }

  int k_ = 0;
  std::vector<long long> counts_;
};

inline ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> truth, int num_classes) {
  if (preds.size() != truth.size())
    throw DataError("confusion: " + std::to_string(preds.size()) + " predictions for " +
                    std::to_string(truth.size()) + " labels");
  ConfusionMatrix cm(num_classes);
  for (std::size_t n = 0; n < preds.size(); ++n) {
    if (preds[n] < 0 || preds[n] >= num_classes || truth[n] < 0 || truth[n] >= num_classes)
      throw DataError("confusion: class id out of range at position " + std::to_string(n));
    ++cm.at(truth[n], preds[n]);
  }
  return cm;
}

/// Macro statistics. Classes with no true instances are left out of every
/// mean and listed in `excluded`.
struct MetricReport {
  double unweighted_accuracy = 0.0;  // = macro recall
  double macro_precision = 0.0;
  double macro_f1 = 0.0;
  std::vector<int> excluded;

  bool warning() const { return !excluded.empty(); }
};

inline MetricReport evaluate(const ConfusionMatrix& cm) {
  MetricReport r;
  double recall_sum = 0.0, precision_sum = 0.0;
  int used = 0;
  for (int k = 0; k < cm.num_classes(); ++k) {
    const long long support = cm.row_sum(k);
    if (support == 0) {
      r.excluded.push_back(k);
      continue;
    }
    const long long predicted = cm.col_sum(k);
    const double tp = static_cast<double>(cm.at(k, k));
    recall_sum += tp / static_cast<double>(support);
    precision_sum += predicted == 0 ? 0.0 : tp / static_cast<double>(predicted);
    ++used;
  }
  if (used == 0) return r;
  r.unweighted_accuracy = recall_sum / used;
  r.macro_precision = precision_sum / used;
  const double denom = r.macro_precision + r.unweighted_accuracy;
  r.macro_f1 = denom == 0.0 ? 0.0 : 2.0 * r.macro_precision * r.unweighted_accuracy / denom;
  return r;
}

inline double unweighted_accuracy(const ConfusionMatrix& cm) { return evaluate(cm).unweighted_accuracy; }
inline double macro_f1(const ConfusionMatrix& cm) { return evaluate(cm).macro_f1; }

}  // namespace seq2vec::eval
