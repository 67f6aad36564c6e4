#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "necsel/config.hpp"
#include "necsel/nbgs.hpp"
#include "necsel/pipeline.hpp"
#include "necsel/sample.hpp"

namespace necsel {

// id -> source tag, for tagged records only.
using SourceIndex = std::unordered_map<std::string, std::string>;

SourceIndex build_source_index(const PoolSource& pool);

/// Shannon entropy (nats) of a count vector; zero counts are ignored.
double entropy_from_counts(std::span<const std::size_t> counts);

/// Entropy of the selection's source distribution. nullopt when the pool
/// carries no source tags at all; selected records without a tag are
/// counted under "(untagged)".
std::optional<double> source_entropy(std::span<const std::string> selected,
                                     const SourceIndex& sources);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;
};

/// Fixed-width bins over [lo, hi]; values at hi land in the last bin.
Histogram make_histogram(std::span<const double> values, double lo, double hi,
                         std::size_t bins = 50);

/// Rank deciles over the candidates (sorted by score, highest first) hit by
/// the selection; per-decile counts.
std::array<std::size_t, 10> decile_counts(std::span<const ScoredSample> candidates,
                                          std::span<const std::string> selected);

struct DiversityReport {
  std::map<std::string, std::size_t> per_source;
  std::optional<double> source_entropy;
  std::optional<double> coverage;  // sources hit / sources in pool
  Histogram histogram;
  std::vector<GroupDraw> per_group;
  std::array<std::size_t, 10> deciles{};
};

DiversityReport diversity_report(std::span<const ScoredSample> candidates,
                                 const SelectionResult& selection, const SourceIndex& sources);

nlohmann::json to_json(const DiversityReport& r);

struct Exemplars {
  std::vector<ScoredSample> top;     // highest first
  std::vector<ScoredSample> bottom;  // lowest first
  bool truncated = false;
};

/// n_top highest and n_bottom lowest scored, ties by id. If the two requests
/// overlap the list, bottom is shortened so the lists stay disjoint and
/// `truncated` is set.
Exemplars exemplars(std::span<const ScoredSample> scored, std::size_t n_top, std::size_t n_bottom);

std::string render_exemplars_markdown(const Exemplars& ex,
                                      const std::unordered_map<std::string, Sample>& samples);

struct StrategyMetrics {
  std::size_t selected = 0;
  std::optional<double> source_entropy;
  double mean_score = 0.0;
  double median_score = 0.0;
  std::size_t decile_occupancy = 0;
};

StrategyMetrics evaluate_selection(std::span<const ScoredSample> candidates,
                                   std::span<const std::string> selected,
                                   const SourceIndex& sources);

struct ComparisonRow {
  SelectionConfig config;
  std::optional<StrategyMetrics> metrics;
  std::string error;  // set when this row failed
};

/// Runs stage 1, scoring and selection in memory for every config. Configs
/// that share (n1, rng_seed, orientation, length_norm) share stage 1 and
/// scores. A failing row records its error and the rest continue.
std::vector<ComparisonRow> run_grid(const PoolSource& pool, std::span<const SelectionConfig> grid,
                                    const ScorerSpec& spec, unsigned jobs = 1);

/// The four strategies under one base config.
std::vector<ComparisonRow> compare_strategies(const PoolSource& pool, const SelectionConfig& base,
                                              const ScorerSpec& spec, unsigned jobs = 1);

/// Grid file: one `key = v1, v2, ...` line per varied field (config keys),
/// '#' comments. Expands to the cartesian product over `base`, keys in file
/// order, the last key varying fastest.
std::vector<SelectionConfig> parse_grid(std::string_view text, const SelectionConfig& base);

std::string csv_escape(std::string_view field);
std::string comparison_csv(std::span<const ComparisonRow> rows);
nlohmann::json comparison_json(std::span<const ComparisonRow> rows);

/// Writes report.json, groups.csv and exemplars.md into a finished run dir.
void write_run_report(const PoolSource& pool, const std::filesystem::path& run_dir,
                      std::size_t n_exemplars = 5);

}  // namespace necsel
