#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace necsel {

enum class Strategy { nbgs, random, top, bottom };
enum class Orientation { nll, loglik };

std::string_view to_string(Strategy s);
std::string_view to_string(Orientation o);
std::optional<Strategy> parse_strategy(std::string_view text);
std::optional<Orientation> parse_orientation(std::string_view text);

// Selection parameters. Defaults follow the reference allocation
// (100k seed + 565k necessity samples, groups of 50k, unit temperature).
struct SelectionConfig {
  std::size_t n1 = 100'000;   // seed size
  std::size_t n2 = 565'000;   // necessity-selected size
  std::size_t k = 50'000;     // group size
  double tau = 1.0;           // softmax temperature
  Strategy strategy = Strategy::nbgs;
  Orientation orientation = Orientation::nll;
  std::uint64_t rng_seed = 0;
  bool length_norm = false;

  friend bool operator==(const SelectionConfig&, const SelectionConfig&) = default;
};

/// Throws ConfigError naming the first violated invariant.
const SelectionConfig& validate_config(const SelectionConfig& cfg, std::size_t pool_size);

/// Checks tau and k only; used before the pool size is known.
void validate_parameters(const SelectionConfig& cfg);

// Canonical `key = value` text, one field per line in declaration order.
std::string to_canonical_text(const SelectionConfig& cfg);
SelectionConfig parse_config_text(std::string_view text,
                                  const SelectionConfig& base = SelectionConfig{});
SelectionConfig load_config_file(const std::string& path,
                                 const SelectionConfig& base = SelectionConfig{});

/// Applies a single `key`/`value` pair (same grammar as the config file).
void set_config_field(SelectionConfig& cfg, std::string_view key, std::string_view value);

std::string format_double(double v);

}  // namespace necsel
