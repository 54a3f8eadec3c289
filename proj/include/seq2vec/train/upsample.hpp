#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <vector>

#include "seq2vec/random.hpp"

namespace seq2vec::train {

/// Indices of a class-balanced training list: every original index once,
/// followed by duplicates drawn with replacement (seeded) from each
/// minority class until all classes match the majority count.
inline std::vector<std::size_t> upsample_balanced(std::span<const int> labels, std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  if (by_class.empty()) return {};
  if (by_class.begin()->first < 0) throw DataError("upsample: negative class id");
  // Classes are dense from 0; a gap is a class with no instances.
  if (by_class.rbegin()->first + 1 != static_cast<int>(by_class.size()))
    throw DataError("upsample: some class has no training instances");

  std::size_t majority = 0;
  for (const auto& [_, idx] : by_class) majority = std::max(majority, idx.size());

  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  Rng rng(seed);
  for (const auto& [_, idx] : by_class)
    for (std::size_t k = idx.size(); k < majority; ++k) out.push_back(idx[rng.index(idx.size())]);
  return out;
}

}  // namespace seq2vec::train
