#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "necsel/config.hpp"
#include "necsel/sample.hpp"

namespace necsel {

struct Group {
  std::size_t index = 0;
  std::vector<ScoredSample> members;  // rank order, highest score first
  std::vector<double> probs;          // aligned with members
  std::size_t quota = 0;
};

struct GroupDraw {
  std::size_t group = 0;
  std::size_t size = 0;
  std::size_t quota = 0;
  std::vector<std::string> drawn;  // ascending id

  friend bool operator==(const GroupDraw&, const GroupDraw&) = default;
};

struct SelectionResult {
  std::vector<std::string> selected_ids;  // ascending id
  std::vector<GroupDraw> per_group;
  Strategy strategy = Strategy::nbgs;
  SelectionConfig config;

  friend bool operator==(const SelectionResult&, const SelectionResult&) = default;
};

/// Descending by score, ties by ascending id.
std::vector<ScoredSample> sort_scored(std::vector<ScoredSample> scored);

/// Consecutive runs of k; the last group holds the remainder.
std::vector<Group> partition_groups(std::span<const ScoredSample> sorted, std::size_t k);

/// Temperature softmax, stabilized by the group maximum:
///   p_i = exp((s_i - max_j s_j) / tau) / sum_j exp((s_j - max_j s_j) / tau)
std::vector<double> group_softmax(std::span<const double> scores, double tau);

/// Unnormalized log-weights (s_i - max_j s_j) / tau used for drawing. Unlike
/// the probabilities these never underflow for moderate inputs, so the draw
/// keeps the successive-draw semantics even at extreme temperatures.
std::vector<double> group_log_weights(std::span<const double> scores, double tau);

/// Per-group quotas summing to n2: floor(n2/N) each, the remainder one apiece
/// to the lowest group indices, then any excess over a group's capacity is
/// handed to groups with spare capacity in ascending index order.
std::vector<std::size_t> assign_quotas(std::span<const std::size_t> capacities, std::size_t n2);

/// Applies cfg.strategy to the candidates. nbgs draws group j with the stream
/// derive_stream(cfg.rng_seed, "group", j); random uses ("random", 0).
/// Results are identical for any `jobs` value.
SelectionResult select(std::span<const ScoredSample> candidates, const SelectionConfig& cfg,
                       unsigned jobs = 1);

}  // namespace necsel
