#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace necsel {

enum class Role { human, gpt };

struct Turn {
  Role role = Role::human;
  std::string value;

  friend bool operator==(const Turn&, const Turn&) = default;
};

// One instruction-tuning record in the LLaVA-style conversation layout.
struct Sample {
  std::string id;
  std::optional<std::string> image;
  std::vector<Turn> conversations;
  std::optional<std::string> source;

  friend bool operator==(const Sample&, const Sample&) = default;
};

// Scalar necessity score attached to a sample id.
struct ScoredSample {
  std::string id;
  double score = 0.0;
  std::size_t num_tokens = 1;

  friend bool operator==(const ScoredSample&, const ScoredSample&) = default;
};

/// Returns a description of the first violated record invariant, or nullopt.
/// Id uniqueness is a pool-level property and is checked by the reader.
std::optional<std::string> check_sample(const Sample& s);

bool is_valid_utf8(std::string_view bytes) noexcept;

/// Parses one JSONL record. Throws DataError with a reason on any schema or
/// invariant violation.
Sample parse_sample_json(std::string_view line);

/// Canonical single-line JSON: sorted keys, no insignificant whitespace,
/// absent optionals omitted. No trailing newline.
std::string to_canonical_json(const Sample& s);

}  // namespace necsel
