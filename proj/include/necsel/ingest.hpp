#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "necsel/sample.hpp"

namespace necsel {

struct PoolStats {
  std::size_t total = 0;  // records yielded
  std::map<std::string, std::size_t> per_source;
  std::size_t untagged = 0;
  std::size_t malformed = 0;
  std::size_t duplicate_ids = 0;
  std::size_t lines = 0;  // physical lines read

  friend bool operator==(const PoolStats&, const PoolStats&) = default;
};

std::string stats_to_json(const PoolStats& stats);

// Single-pass JSONL pool reader. Holds one record at a time plus the set of
// ids seen so far (needed for duplicate detection).
//
// Strict mode throws DataError on the first bad line ("<path>:<line>: ...").
// Lenient mode counts malformed lines and duplicate ids and skips them;
// the first occurrence of an id wins.
class PoolReader {
 public:
  PoolReader(std::filesystem::path path, bool strict = true);

  /// Next valid sample, or nullopt at end of file.
  std::optional<Sample> next();

  const PoolStats& stats() const noexcept { return stats_; }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  bool strict_;
  std::ifstream in_;
  std::string line_;
  std::unordered_set<std::string> seen_;
  PoolStats stats_;
};

struct PoolContents {
  std::vector<Sample> samples;
  PoolStats stats;
};

/// Materializes a whole pool. Prefer PoolReader for large files.
PoolContents read_pool(const std::filesystem::path& path, bool strict = true);

/// Writes canonical JSONL (one record per line, '\n' terminated).
std::size_t write_pool(std::span<const Sample> samples, const std::filesystem::path& path);

// Streaming writer used by the pipeline.
class PoolWriter {
 public:
  explicit PoolWriter(const std::filesystem::path& path);
  void write(const Sample& s);
  std::size_t count() const noexcept { return count_; }
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t count_ = 0;
};

/// Deterministic synthetic multi-source pool. Sources are assigned
/// round-robin; each source has its own response vocabulary and length
/// profile, so necessity scores correlate with source.
std::size_t make_fixture(std::size_t num_samples, std::size_t num_sources, std::uint64_t rng_seed,
                         const std::filesystem::path& path);

/// In-memory variant of make_fixture.
std::vector<Sample> generate_fixture(std::size_t num_samples, std::size_t num_sources,
                                     std::uint64_t rng_seed);

}  // namespace necsel
