#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "necsel/config.hpp"
#include "necsel/sample.hpp"

namespace necsel {

// A seed-model stand-in. Given a sample, returns the log-probability of every
// response token, each conditioned on the image/instruction context and the
// preceding tokens. Implementations must be safe to call concurrently.
class Scorer {
 public:
  virtual ~Scorer() = default;

  /// Ordered per-token log-probs of all gpt turns; every entry finite, <= 0.
  virtual std::vector<double> response_logprobs(const Sample& sample) const = 0;

  /// Stable human-readable identifier written into score-file headers.
  virtual std::string descriptor() const = 0;
};

struct ScoreOptions {
  Orientation orientation = Orientation::nll;
  bool length_norm = false;
};

/// Reduces token log-probs to one score: nll -> -sum, loglik -> sum,
/// optionally divided by the token count.
double necessity_score(std::span<const double> token_logprobs, Orientation orientation,
                       bool length_norm = false);

ScoredSample score_sample(const Scorer& scorer, const Sample& sample, const ScoreOptions& opts);

/// Scores every sample; output is in input order and bit-identical for any
/// `jobs` value.
std::vector<ScoredSample> score_pool(const Scorer& scorer, std::span<const Sample> pool,
                                     const ScoreOptions& opts, unsigned jobs = 1);

}  // namespace necsel
