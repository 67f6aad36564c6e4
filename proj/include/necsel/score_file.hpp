#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "necsel/config.hpp"
#include "necsel/sample.hpp"

namespace necsel {

// Score files are JSONL: a header row, then one row per sample.
//   {"length_norm":false,"orientation":"nll","scorer":"ngram-bytes:order=3"}
//   {"id":"fx-0000001","num_tokens":141,"score":412.84501239006472}
// Scores are printed with 17 significant digits so they round-trip exactly.
struct ScoreFileHeader {
  Orientation orientation = Orientation::nll;
  std::string scorer;
  bool length_norm = false;

  friend bool operator==(const ScoreFileHeader&, const ScoreFileHeader&) = default;
};

struct ScoreFile {
  ScoreFileHeader header;
  std::vector<ScoredSample> rows;
};

std::string format_score_row(const ScoredSample& row);

void write_scores(std::span<const ScoredSample> scored, const ScoreFileHeader& header,
                  const std::filesystem::path& path);

/// Loads and validates a score file. If `expected` is given, a header whose
/// orientation or length_norm differs is rejected (ConfigError::mismatch).
ScoreFile load_scores(const std::filesystem::path& path,
                      const std::optional<ScoreFileHeader>& expected = std::nullopt);

/// Throws DataError listing every score id absent from `pool_ids`.
void check_orphans(std::span<const ScoredSample> rows, const std::unordered_set<std::string>& pool_ids);

}  // namespace necsel
