#include "necsel/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "necsel/error.hpp"

namespace necsel {

double necessity_score(std::span<const double> token_logprobs, Orientation orientation,
                       bool length_norm) {
  if (token_logprobs.empty()) throw DataError("necessity_score: empty token list");
  double sum = 0.0;
  for (double lp : token_logprobs) {
    if (!std::isfinite(lp)) throw DataError("necessity_score: non-finite log-probability");
    if (lp > 0.0) throw DataError("necessity_score: positive log-probability");
    sum += lp;
  }
  if (length_norm) sum /= static_cast<double>(token_logprobs.size());
  return orientation == Orientation::nll ? -sum : sum;
}

ScoredSample score_sample(const Scorer& scorer, const Sample& sample, const ScoreOptions& opts) {
  const bool has_gpt = std::any_of(sample.conversations.begin(), sample.conversations.end(),
                                   [](const Turn& t) { return t.role == Role::gpt; });
  if (!has_gpt) throw DataError("sample '" + sample.id + "' has no gpt turn");
  const auto lps = scorer.response_logprobs(sample);
  ScoredSample out;
  out.id = sample.id;
  try {
    out.score = necessity_score(lps, opts.orientation, opts.length_norm);
  } catch (const DataError& e) {
    throw DataError("sample '" + sample.id + "': " + e.what());
  }
  out.num_tokens = lps.size();
  return out;
}

std::vector<ScoredSample> score_pool(const Scorer& scorer, std::span<const Sample> pool,
                                     const ScoreOptions& opts, unsigned jobs) {
  std::vector<ScoredSample> out(pool.size());
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(pool.size(), 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < pool.size(); ++i) out[i] = score_sample(scorer, pool[i], opts);
    return out;
  }

  // Static interleaved partition; each slot is written by exactly one worker.
  std::vector<std::exception_ptr> errors(pool.size());
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < pool.size(); i += workers) {
        try {
          out[i] = score_sample(scorer, pool[i], opts);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  // Report the error of the first failing sample in pool order.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace necsel
