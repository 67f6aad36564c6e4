#include "necsel/sampling.hpp"

#include <cmath>
#include <numeric>

namespace necsel {

std::vector<std::string> uniform_sample(std::span<const std::string> ids, std::size_t n,
                                        RngStream& rng) {
  if (n > ids.size()) {
    throw DataError("uniform_sample: requested " + std::to_string(n) + " of " +
                    std::to_string(ids.size()) + " ids");
  }
  std::vector<std::size_t> pos(ids.size());
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + rng.below(pos.size() - i);
    std::swap(pos[i], pos[j]);
  }
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(ids[pos[i]]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> sample_log_weighted(std::span<const double> log_weights,
                                             std::size_t quota, RngStream& rng) {
  const std::size_t n = log_weights.size();
  if (quota > n) {
    throw DataError("weighted sample: quota " + std::to_string(quota) + " exceeds " +
                    std::to_string(n) + " items");
  }
  struct Keyed {
    double key;
    std::size_t pos;
  };
  std::vector<Keyed> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform_open01();
    keys[i] = {log_weights[i] - std::log(-std::log(u)), i};
  }
  if (quota < n) {
    auto larger = [](const Keyed& a, const Keyed& b) {
      return a.key != b.key ? a.key > b.key : a.pos < b.pos;
    };
    std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(quota), keys.end(),
                     larger);
  }
  std::vector<std::size_t> out;
  out.reserve(quota);
  for (std::size_t i = 0; i < quota; ++i) out.push_back(keys[i].pos);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> weighted_sample_without_replacement(std::span<const WeightedItem> items,
                                                             std::size_t quota, RngStream& rng) {
  if (quota > items.size()) {
    throw DataError("weighted sample: quota " + std::to_string(quota) + " exceeds " +
                    std::to_string(items.size()) + " items");
  }
  std::vector<double> log_w;
  log_w.reserve(items.size());
  double total = 0.0;
  for (const auto& it : items) {
    if (!(it.prob > 0.0) || it.prob > 1.0 || !std::isfinite(it.prob)) {
      throw DataError("weighted sample: probability of '" + it.id + "' outside (0, 1]");
    }
    total += it.prob;
    log_w.push_back(std::log(it.prob));
  }
  if (!items.empty() && std::abs(total - 1.0) > 1e-9) {
    throw DataError("weighted sample: probabilities sum to " + std::to_string(total));
  }
  std::vector<std::string> out;
  out.reserve(quota);
  for (auto pos : sample_log_weighted(log_w, quota, rng)) out.push_back(items[pos].id);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace necsel
