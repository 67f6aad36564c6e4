#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "necsel/config.hpp"
#include "necsel/nbgs.hpp"
#include "necsel/sample.hpp"
#include "necsel/score_file.hpp"
#include "necsel/scoring.hpp"

namespace necsel {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Stage { none, seeded, scored, selected, merged };
std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view text);

// A pool either streamed from a JSONL file (strict reader, one record in
// memory at a time) or borrowed from memory.
class PoolSource {
 public:
  static PoolSource from_file(std::filesystem::path path);
  static PoolSource from_samples(std::span<const Sample> samples);

  void for_each(const std::function<void(const Sample&)>& fn) const;
  std::size_t count() const;

 private:
  std::optional<std::filesystem::path> path_;
  std::span<const Sample> samples_;
};

struct ScorerSpec {
  unsigned ngram_order = 3;
  std::optional<std::filesystem::path> external_scores;
};

struct Stage1Result {
  std::vector<std::string> seed_ids;  // ascending
  std::unique_ptr<Scorer> scorer;     // null when scores are external
  std::optional<ScoreFile> external;
};

/// Validates cfg against the pool size, draws the seed set by reservoir
/// sampling over ids in pool order with stream ("seed", 0), and trains the
/// built-in scorer on the seed samples (or loads the external score file).
Stage1Result run_stage1(const PoolSource& pool, const SelectionConfig& cfg, const ScorerSpec& spec);

/// Candidate scores in pool order (seed ids excluded).
std::vector<ScoredSample> score_candidates(const PoolSource& pool,
                                           std::span<const std::string> seed_ids,
                                           const Stage1Result& stage1, const SelectionConfig& cfg,
                                           unsigned jobs = 1);

struct Stage2Result {
  std::vector<ScoredSample> candidates;
  SelectionResult selection;
};

Stage2Result run_stage2(const PoolSource& pool, const Stage1Result& stage1,
                        const SelectionConfig& cfg, unsigned jobs = 1);

/// Writes seed + selected samples in ascending id order; returns the count.
std::size_t merge_and_emit(const PoolSource& pool, std::span<const std::string> seed_ids,
                           const SelectionResult& selection, const std::filesystem::path& dataset);

// ---------------------------------------------------------------------------
// Run directories

struct RunPaths {
  explicit RunPaths(std::filesystem::path dir);

  std::filesystem::path dir;
  std::filesystem::path seed_ids;
  std::filesystem::path scores;
  std::filesystem::path selection;
  std::filesystem::path dataset;
  std::filesystem::path manifest;
  std::filesystem::path lock;
};

struct RunOptions {
  std::filesystem::path pool;
  std::filesystem::path out_dir;
  SelectionConfig config;
  ScorerSpec scorer;
  unsigned jobs = 1;
  Stage stop_after = Stage::merged;
};

struct ResumeOptions {
  std::filesystem::path pool;
  std::filesystem::path out_dir;
  std::optional<SelectionConfig> config;  // must equal the stored config if given
  std::optional<std::filesystem::path> external_scores;
  unsigned jobs = 1;
  Stage stop_after = Stage::merged;
};

struct RunOutcome {
  Stage stage = Stage::none;
  std::string manifest_sha256;
  nlohmann::json manifest;
};

/// Fresh run; existing artifacts in out_dir are overwritten.
RunOutcome run_pipeline(const RunOptions& opts);

/// Continues a run from its last completed stage after verifying the stored
/// manifest hash, config, pool hash and every recorded artifact hash.
RunOutcome resume_pipeline(const ResumeOptions& opts);

/// Hash over the canonical (compact, key-sorted) manifest without its
/// "manifest_sha256" field.
std::string manifest_hash(const nlohmann::json& manifest);

/// Reads manifest.json and checks its stored hash.
nlohmann::json load_manifest(const std::filesystem::path& path);

std::vector<std::string> read_id_list(const std::filesystem::path& path);

}  // namespace necsel
