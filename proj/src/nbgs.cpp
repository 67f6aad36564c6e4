#include "necsel/nbgs.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "necsel/error.hpp"
#include "necsel/rng.hpp"
#include "necsel/sampling.hpp"

namespace necsel {
namespace {

// Neumaier-compensated sum.
double accurate_sum(std::span<const double> xs) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

std::vector<double> scores_of(std::span<const ScoredSample> members) {
  std::vector<double> s;
  s.reserve(members.size());
  for (const auto& m : members) s.push_back(m.score);
  return s;
}

}  // namespace

std::vector<ScoredSample> sort_scored(std::vector<ScoredSample> scored) {
  std::sort(scored.begin(), scored.end(), [](const ScoredSample& a, const ScoredSample& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  return scored;
}

std::vector<Group> partition_groups(std::span<const ScoredSample> sorted, std::size_t k) {
  if (k == 0) throw ConfigError(ConfigFault::zero_group_size, "group size k must be >= 1");
  std::vector<Group> groups;
  groups.reserve((sorted.size() + k - 1) / k);
  for (std::size_t begin = 0; begin < sorted.size(); begin += k) {
    const std::size_t end = std::min(sorted.size(), begin + k);
    Group g;
    g.index = groups.size();
    g.members.assign(sorted.begin() + static_cast<std::ptrdiff_t>(begin),
                     sorted.begin() + static_cast<std::ptrdiff_t>(end));
    groups.push_back(std::move(g));
  }
  return groups;
}

std::vector<double> group_log_weights(std::span<const double> scores, double tau) {
  if (!(tau > 0.0)) throw ConfigError(ConfigFault::nonpositive_temperature, "tau must be > 0");
  if (scores.empty()) return {};
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> lw;
  lw.reserve(scores.size());
  for (double s : scores) lw.push_back((s - top) / tau);
  return lw;
}

std::vector<double> group_softmax(std::span<const double> scores, double tau) {
  auto p = group_log_weights(scores, tau);
  for (double& x : p) x = std::exp(x);
  const double z = accurate_sum(p);
  for (double& x : p) x /= z;
  return p;
}

std::vector<std::size_t> assign_quotas(std::span<const std::size_t> capacities, std::size_t n2) {
  const std::size_t n = capacities.size();
  std::size_t total = 0;
  for (auto c : capacities) total += c;
  if (n2 > total) {
    throw DataError("cannot draw " + std::to_string(n2) + " from " + std::to_string(total) +
                    " candidates");
  }
  std::vector<std::size_t> quota(n, 0);
  if (n == 0) return quota;

  const std::size_t base = n2 / n;
  const std::size_t rem = n2 % n;
  std::size_t deficit = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t want = base + (j < rem ? 1 : 0);
    quota[j] = std::min(want, capacities[j]);
    deficit += want - quota[j];
  }
  for (std::size_t j = 0; j < n && deficit > 0; ++j) {
    const std::size_t give = std::min(deficit, capacities[j] - quota[j]);
    quota[j] += give;
    deficit -= give;
  }
  if (deficit != 0) throw InternalError("quota redistribution left a deficit");
  return quota;
}

namespace {

SelectionResult select_nbgs(std::span<const ScoredSample> candidates, const SelectionConfig& cfg,
                            unsigned jobs) {
  const auto sorted = sort_scored({candidates.begin(), candidates.end()});
  auto groups = partition_groups(sorted, cfg.k);

  std::vector<std::size_t> sizes;
  sizes.reserve(groups.size());
  for (const auto& g : groups) sizes.push_back(g.members.size());
  const auto quotas = assign_quotas(sizes, cfg.n2);

  SelectionResult result;
  result.strategy = Strategy::nbgs;
  result.config = cfg;
  result.per_group.resize(groups.size());

  auto draw_group = [&](std::size_t j) {
    Group& g = groups[j];
    g.quota = quotas[j];
    const auto scores = scores_of(g.members);
    g.probs = group_softmax(scores, cfg.tau);
    RngStream rng = derive_stream(cfg.rng_seed, "group", j);
    GroupDraw& d = result.per_group[j];
    d.group = j;
    d.size = g.members.size();
    d.quota = g.quota;
    for (auto pos : sample_log_weighted(group_log_weights(scores, cfg.tau), g.quota, rng)) {
      d.drawn.push_back(g.members[pos].id);
    }
    std::sort(d.drawn.begin(), d.drawn.end());
  };

  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(groups.size(), 1));
  if (workers == 1) {
    for (std::size_t j = 0; j < groups.size(); ++j) draw_group(j);
  } else {
    std::vector<std::exception_ptr> errors(groups.size());
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        for (std::size_t j = w; j < groups.size(); j += workers) {
          try {
            draw_group(j);
          } catch (...) {
            errors[j] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (const auto& d : result.per_group) {
    result.selected_ids.insert(result.selected_ids.end(), d.drawn.begin(), d.drawn.end());
  }
  std::sort(result.selected_ids.begin(), result.selected_ids.end());
  return result;
}

}  // namespace

SelectionResult select(std::span<const ScoredSample> candidates, const SelectionConfig& cfg,
                       unsigned jobs) {
  validate_parameters(cfg);
  if (cfg.n2 > candidates.size()) {
    throw ConfigError(ConfigFault::sizes_exceed_pool,
                      "n2 = " + std::to_string(cfg.n2) + " exceeds " +
                          std::to_string(candidates.size()) + " candidates");
  }
  if (cfg.strategy == Strategy::nbgs) return select_nbgs(candidates, cfg, jobs);

  SelectionResult result;
  result.strategy = cfg.strategy;
  result.config = cfg;

  switch (cfg.strategy) {
    case Strategy::top: {
      const auto sorted = sort_scored({candidates.begin(), candidates.end()});
      for (std::size_t i = 0; i < cfg.n2; ++i) result.selected_ids.push_back(sorted[i].id);
      break;
    }
    case Strategy::bottom: {
      std::vector<ScoredSample> asc(candidates.begin(), candidates.end());
      std::sort(asc.begin(), asc.end(), [](const ScoredSample& a, const ScoredSample& b) {
        return a.score != b.score ? a.score < b.score : a.id < b.id;
      });
      for (std::size_t i = 0; i < cfg.n2; ++i) result.selected_ids.push_back(asc[i].id);
      break;
    }
    case Strategy::random: {
      std::vector<std::string> ids;
      ids.reserve(candidates.size());
      for (const auto& c : candidates) ids.push_back(c.id);
      std::sort(ids.begin(), ids.end());
      RngStream rng = derive_stream(cfg.rng_seed, "random", 0);
      result.selected_ids = uniform_sample(ids, cfg.n2, rng);
      break;
    }
    case Strategy::nbgs:
      break;
  }
  std::sort(result.selected_ids.begin(), result.selected_ids.end());
  result.per_group.push_back({0, candidates.size(), cfg.n2, result.selected_ids});
  return result;
}

}  // namespace necsel
