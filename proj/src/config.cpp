#include "necsel/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "necsel/error.hpp"

namespace necsel {
namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_unsigned(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    throw ConfigError(ConfigFault::bad_value,
                      "invalid value for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  double out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty() ||
      !std::isfinite(out)) {
    throw ConfigError(ConfigFault::bad_value,
                      "invalid value for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return out;
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::nbgs: return "nbgs";
    case Strategy::random: return "random";
    case Strategy::top: return "top";
    case Strategy::bottom: return "bottom";
  }
  return "nbgs";
}

std::string_view to_string(Orientation o) {
  return o == Orientation::nll ? "nll" : "loglik";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  for (auto s : {Strategy::nbgs, Strategy::random, Strategy::top, Strategy::bottom}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::optional<Orientation> parse_orientation(std::string_view text) {
  if (text == "nll") return Orientation::nll;
  if (text == "loglik") return Orientation::loglik;
  return std::nullopt;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

void validate_parameters(const SelectionConfig& cfg) {
  if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau)) {
    throw ConfigError(ConfigFault::nonpositive_temperature,
                      "temperature must satisfy tau > 0 (got " + format_double(cfg.tau) + ")");
  }
  if (cfg.k == 0) {
    throw ConfigError(ConfigFault::zero_group_size, "group size k must be >= 1");
  }
}

const SelectionConfig& validate_config(const SelectionConfig& cfg, std::size_t pool_size) {
  // n1 + n2 may overflow for absurd inputs; compare without adding.
  if (cfg.n1 > pool_size || cfg.n2 > pool_size - cfg.n1) {
    throw ConfigError(ConfigFault::sizes_exceed_pool,
                      "n1 + n2 exceeds pool size (" + std::to_string(cfg.n1) + " + " +
                          std::to_string(cfg.n2) + " > " + std::to_string(pool_size) + ")");
  }
  validate_parameters(cfg);
  return cfg;
}

std::string to_canonical_text(const SelectionConfig& cfg) {
  std::ostringstream out;
  out << "n1 = " << cfg.n1 << '\n'
      << "n2 = " << cfg.n2 << '\n'
      << "k = " << cfg.k << '\n'
      << "tau = " << format_double(cfg.tau) << '\n'
      << "strategy = " << to_string(cfg.strategy) << '\n'
      << "orientation = " << to_string(cfg.orientation) << '\n'
      << "rng_seed = " << cfg.rng_seed << '\n'
      << "length_norm = " << (cfg.length_norm ? "true" : "false") << '\n';
  return out.str();
}

void set_config_field(SelectionConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "n1") {
    cfg.n1 = parse_unsigned<std::size_t>(key, value);
  } else if (key == "n2") {
    cfg.n2 = parse_unsigned<std::size_t>(key, value);
  } else if (key == "k") {
    cfg.k = parse_unsigned<std::size_t>(key, value);
  } else if (key == "tau") {
    cfg.tau = parse_real(key, value);
  } else if (key == "strategy") {
    auto s = parse_strategy(value);
    if (!s) {
      throw ConfigError(ConfigFault::bad_value,
                        "strategy must be one of nbgs|random|top|bottom (got '" +
                            std::string(value) + "')");
    }
    cfg.strategy = *s;
  } else if (key == "orientation") {
    auto o = parse_orientation(value);
    if (!o) {
      throw ConfigError(ConfigFault::bad_value,
                        "orientation must be nll|loglik (got '" + std::string(value) + "')");
    }
    cfg.orientation = *o;
  } else if (key == "rng_seed") {
    cfg.rng_seed = parse_unsigned<std::uint64_t>(key, value);
  } else if (key == "length_norm") {
    if (value == "true") {
      cfg.length_norm = true;
    } else if (value == "false") {
      cfg.length_norm = false;
    } else {
      throw ConfigError(ConfigFault::bad_value,
                        "length_norm must be true|false (got '" + std::string(value) + "')");
    }
  } else {
    throw ConfigError(ConfigFault::unknown_key, "unknown config key '" + std::string(key) + "'");
  }
}

SelectionConfig parse_config_text(std::string_view text, const SelectionConfig& base) {
  SelectionConfig cfg = base;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(ConfigFault::bad_value,
                        "config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    set_config_field(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

SelectionConfig load_config_file(const std::string& path, const SelectionConfig& base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), base);
}

}  // namespace necsel
