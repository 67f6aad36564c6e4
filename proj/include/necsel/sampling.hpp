#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "necsel/error.hpp"
#include "necsel/rng.hpp"

namespace necsel {

struct WeightedItem {
  std::string id;
  double prob = 0.0;
};

/// n distinct ids drawn uniformly (every n-subset equally likely), returned
/// in ascending id order. Partial Fisher-Yates over positions.
std::vector<std::string> uniform_sample(std::span<const std::string> ids, std::size_t n,
                                        RngStream& rng);

// Algorithm R, push style. Single pass, O(n) memory.
class ReservoirSampler {
 public:
  ReservoirSampler(std::size_t n, RngStream& rng) : n_(n), rng_(rng) { reservoir_.reserve(n); }

  void offer(std::string item) {
    if (seen_ < n_) {
      reservoir_.push_back(std::move(item));
    } else {
      const auto j = rng_.below(seen_ + 1);
      if (j < n_) reservoir_[j] = std::move(item);
    }
    ++seen_;
  }

  std::size_t seen() const noexcept { return seen_; }

  /// The sample in ascending id order. Throws if fewer than n items were offered.
  std::vector<std::string> finish() && {
    if (seen_ < n_) {
      throw DataError("reservoir sample: stream has " + std::to_string(seen_) +
                      " items, fewer than the " + std::to_string(n_) + " requested");
    }
    std::sort(reservoir_.begin(), reservoir_.end());
    return std::move(reservoir_);
  }

 private:
  std::size_t n_;
  RngStream& rng_;
  std::size_t seen_ = 0;
  std::vector<std::string> reservoir_;
};

/// Pull-source form: `next()` returns std::optional<std::string> until
/// exhausted. Output in ascending id order.
template <class Next>
std::vector<std::string> reservoir_sample(Next&& next, std::size_t n, RngStream& rng) {
  ReservoirSampler sampler(n, rng);
  while (std::optional<std::string> item = next()) sampler.offer(std::move(*item));
  return std::move(sampler).finish();
}

/// Draws `quota` distinct positions where item i has log-weight
/// `log_weights[i]` (unnormalized). The outcome distribution equals drawing
/// one item at a time proportionally to weight, removing it, and
/// renormalizing. Implemented with Gumbel keys (log w_i - log(-log u_i)),
/// taking the `quota` largest; one uniform is consumed per item in order.
/// Returned positions are ascending.
std::vector<std::size_t> sample_log_weighted(std::span<const double> log_weights,
                                             std::size_t quota, RngStream& rng);

/// Probability-weighted sampling without replacement over explicit items.
/// Every prob must be in (0, 1] and the probs must sum to 1 within 1e-9.
/// Returns ids in ascending order.
std::vector<std::string> weighted_sample_without_replacement(std::span<const WeightedItem> items,
                                                             std::size_t quota, RngStream& rng);

}  // namespace necsel
