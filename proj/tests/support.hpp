#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "necsel/rng.hpp"
#include "necsel/sample.hpp"

namespace necsel::testing {

// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("necsel-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Exact outcome-set distribution of drawing `quota` items one at a time
// proportionally to `weights`, without replacement, renormalizing after each
// draw. Keys are bitmasks over item positions. Brute force over every ordered
// draw sequence.
inline std::map<std::uint32_t, double> successive_draw_oracle(const std::vector<double>& weights,
                                                              std::size_t quota) {
  std::map<std::uint32_t, double> out;
  const auto recurse = [&](auto&& self, std::uint32_t taken, std::size_t depth, double p) -> void {
    if (depth == quota) {
      out[taken] += p;
      return;
    }
    double rest = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(taken >> i & 1u)) rest += weights[i];
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (taken >> i & 1u) continue;
      self(self, taken | (1u << i), depth + 1, p * weights[i] / rest);
    }
  };
  recurse(recurse, 0u, 0, 1.0);
  return out;
}

inline double total_variation(const std::map<std::uint32_t, double>& exact,
                              const std::map<std::uint32_t, std::size_t>& counts,
                              std::size_t trials) {
  double tv = 0.0;
  std::map<std::uint32_t, double> keys = exact;
  for (const auto& [k, c] : counts) keys.emplace(k, 0.0);
  for (const auto& [k, p] : keys) {
    const auto it = counts.find(k);
    const double f = it == counts.end() ? 0.0 : static_cast<double>(it->second) / trials;
    tv += std::abs(f - p);
  }
  return tv / 2.0;
}

// Chi-square upper tail via the regularized incomplete gamma (series form,
// adequate for the small degrees of freedom used here).
inline double chi_square_pvalue(double stat, double dof) {
  const double a = dof / 2.0, x = stat / 2.0;
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) {
    double sum = 1.0 / a, term = sum;
    for (int n = 1; n < 1000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (term < sum * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  // Continued fraction for the upper tail.
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline Sample make_sample(std::string id, std::string prompt, std::string response,
                          std::optional<std::string> source = std::nullopt) {
  Sample s;
  s.id = std::move(id);
  s.conversations = {{Role::human, std::move(prompt)}, {Role::gpt, std::move(response)}};
  s.source = std::move(source);
  return s;
}

}  // namespace necsel::testing
