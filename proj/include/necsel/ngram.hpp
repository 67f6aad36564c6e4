#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "necsel/scoring.hpp"

namespace necsel {

// Byte-level n-gram model with add-one smoothing, used as the built-in seed
// scorer. Symbols are the 256 byte values plus an end-of-response marker
// (kEndOfResponse) appended after every gpt turn. Each sample is one symbol
// sequence (turns concatenated in order); the history resets between samples,
// and early positions use the shorter available history as their context.
//
//   p(sym | ctx) = (count(ctx, sym) + 1) / (count(ctx) + 257)
class NgramScorer final : public Scorer {
 public:
  using Symbol = std::uint16_t;
  static constexpr Symbol kEndOfResponse = 256;
  static constexpr std::uint32_t kVocabulary = 257;
  static constexpr unsigned kMaxOrder = 7;

  explicit NgramScorer(unsigned order = 3);

  unsigned order() const noexcept { return order_; }

  void add_sequence(std::span<const Symbol> symbols);
  void add_sample(const Sample& sample);

  /// Count of `sym` after the last (order-1) symbols of `history`.
  std::uint64_t count(std::span<const Symbol> history, Symbol sym) const;
  std::uint64_t context_total(std::span<const Symbol> history) const;
  /// Smoothed conditional probability.
  double probability(std::span<const Symbol> history, Symbol sym) const;

  std::size_t num_contexts() const noexcept { return rows_.size(); }

  std::vector<double> response_logprobs(const Sample& sample) const override;
  std::string descriptor() const override;

  /// Full symbol sequence of a sample and, per position, whether it is a
  /// response token.
  static std::pair<std::vector<Symbol>, std::vector<bool>> encode(const Sample& sample);

  friend bool operator==(const NgramScorer& a, const NgramScorer& b) {
    return a.order_ == b.order_ && a.rows_ == b.rows_;
  }

 private:
  struct Row {
    std::uint64_t total = 0;
    std::vector<std::pair<Symbol, std::uint64_t>> next;  // sorted by symbol

    friend bool operator==(const Row&, const Row&) = default;
  };

  std::uint64_t context_key(std::span<const Symbol> seq, std::size_t pos) const noexcept;
  const Row* find_row(std::uint64_t key) const;

  unsigned order_;
  std::unordered_map<std::uint64_t, Row> rows_;
};

/// Trains on the seed samples (instruction and response bytes). Counting
/// commutes, so the result does not depend on sample order.
NgramScorer train_ngram(std::span<const Sample> seed_samples, unsigned order = 3);

}  // namespace necsel
