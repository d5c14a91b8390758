#pragma once

#include <cstdint>
#include <vector>

#include "aucm/dataset.hpp"
#include "aucm/error.hpp"
#include "aucm/rng.hpp"

namespace aucm {

using IndexBatch = std::vector<std::size_t>;

namespace detail {

/// Hands out `want` indices from `pool`, reshuffling the pool each time it is
/// exhausted. Within one pass this is sampling without replacement.
class CyclicDraw {
 public:
  CyclicDraw(std::vector<std::size_t> pool, Rng& rng) : pool_(std::move(pool)), rng_(rng) {
    rng_.shuffle(std::span<std::size_t>(pool_));
  }

  std::size_t next() {
    if (pos_ == pool_.size()) {
      rng_.shuffle(std::span<std::size_t>(pool_));
      pos_ = 0;
    }
    return pool_[pos_++];
  }

 private:
  std::vector<std::size_t> pool_;
  Rng& rng_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Minibatches with at least one sample of each class.
///
/// The epoch has B = ceil(n / batch_size) batches. A class with at least B
/// members is spread evenly (sizes differ by at most one, each member used
/// exactly once). A class with fewer than B members is oversampled: every
/// batch gets one of its members, drawn by cycling through reshuffled passes,
/// so each member is used at most ceil(B / n_class) times. Each batch lists
/// its positives first. The order depends only on (seed, epoch).
inline std::vector<IndexBatch> stratified_batches(std::span<const int> labels, std::size_t batch_size,
                                                  std::uint64_t seed, std::uint64_t epoch) {
  if (batch_size < 2) throw InvalidInput("batch_size must be >= 2 to hold both classes");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) {
    throw SingleClassError("stratified batching needs both classes in the training split");
  }
  const std::size_t n = labels.size();
  const std::size_t n_batches = (n + batch_size - 1) / batch_size;
  std::vector<IndexBatch> batches(n_batches);

  Rng rng(derive_seed(seed, "batches", epoch));
  for (auto* members : {&pos, &neg}) {
    detail::CyclicDraw draw(*members, rng);
    const std::size_t m = members->size();
    for (std::size_t b = 0; b < n_batches; ++b) {
      const std::size_t take = m >= n_batches ? m / n_batches + (b < m % n_batches ? 1 : 0) : 1;
      for (std::size_t k = 0; k < take; ++k) batches[b].push_back(draw.next());
    }
  }
  return batches;
}

inline std::vector<IndexBatch> stratified_batches(const LabeledDataset& ds, std::size_t batch_size,
                                                  std::uint64_t seed, std::uint64_t epoch) {
  return stratified_batches(std::span<const int>(ds.labels), batch_size, seed, epoch);
}

}  // namespace aucm
