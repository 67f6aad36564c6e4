#include "necsel/ngram.hpp"

#include <algorithm>
#include <cmath>

#include "necsel/error.hpp"

namespace necsel {

NgramScorer::NgramScorer(unsigned order) : order_(order) {
  if (order_ < 1 || order_ > kMaxOrder) {
    throw ConfigError(ConfigFault::bad_value,
                      "n-gram order must be in [1, " + std::to_string(kMaxOrder) + "]");
  }
}

// Key layout: history length in the low 3 bits, then 9 bits per symbol.
std::uint64_t NgramScorer::context_key(std::span<const Symbol> seq, std::size_t pos) const noexcept {
  const std::size_t len = std::min<std::size_t>(order_ - 1, pos);
  std::uint64_t key = len;
  for (std::size_t i = pos - len; i < pos; ++i) key = (key << 9) | seq[i];
  return key;
}

const NgramScorer::Row* NgramScorer::find_row(std::uint64_t key) const {
  auto it = rows_.find(key);
  return it == rows_.end() ? nullptr : &it->second;
}

void NgramScorer::add_sequence(std::span<const Symbol> symbols) {
  for (std::size_t pos = 0; pos < symbols.size(); ++pos) {
    const Symbol sym = symbols[pos];
    Row& row = rows_[context_key(symbols, pos)];
    ++row.total;
    auto it = std::lower_bound(row.next.begin(), row.next.end(), sym,
                               [](const auto& e, Symbol s) { return e.first < s; });
    if (it != row.next.end() && it->first == sym) {
      ++it->second;
    } else {
      row.next.insert(it, {sym, 1});
    }
  }
}

std::pair<std::vector<NgramScorer::Symbol>, std::vector<bool>> NgramScorer::encode(
    const Sample& sample) {
  std::vector<Symbol> seq;
  std::vector<bool> is_response;
  for (const auto& turn : sample.conversations) {
    const bool resp = turn.role == Role::gpt;
    for (unsigned char c : turn.value) {
      seq.push_back(c);
      is_response.push_back(resp);
    }
    if (resp) {
      seq.push_back(kEndOfResponse);
      is_response.push_back(true);
    }
  }
  return {std::move(seq), std::move(is_response)};
}

void NgramScorer::add_sample(const Sample& sample) { add_sequence(encode(sample).first); }

std::uint64_t NgramScorer::count(std::span<const Symbol> history, Symbol sym) const {
  const Row* row = find_row(context_key(history, history.size()));
  if (row == nullptr) return 0;
  auto it = std::lower_bound(row->next.begin(), row->next.end(), sym,
                             [](const auto& e, Symbol s) { return e.first < s; });
  return (it != row->next.end() && it->first == sym) ? it->second : 0;
}

std::uint64_t NgramScorer::context_total(std::span<const Symbol> history) const {
  const Row* row = find_row(context_key(history, history.size()));
  return row == nullptr ? 0 : row->total;
}

double NgramScorer::probability(std::span<const Symbol> history, Symbol sym) const {
  return static_cast<double>(count(history, sym) + 1) /
         static_cast<double>(context_total(history) + kVocabulary);
}

std::vector<double> NgramScorer::response_logprobs(const Sample& sample) const {
  const auto [seq, is_response] = encode(sample);
  std::vector<double> out;
  for (std::size_t pos = 0; pos < seq.size(); ++pos) {
    if (!is_response[pos]) continue;
    const std::span<const Symbol> history(seq.data(), pos);
    out.push_back(std::log(probability(history, seq[pos])));
  }
  return out;
}

std::string NgramScorer::descriptor() const {
  return "ngram-bytes:order=" + std::to_string(order_);
}

NgramScorer train_ngram(std::span<const Sample> seed_samples, unsigned order) {
  if (seed_samples.empty()) throw DataError("cannot train the n-gram scorer on an empty seed set");
  NgramScorer scorer(order);
  for (const auto& s : seed_samples) scorer.add_sample(s);
  return scorer;
}

}  // namespace necsel
