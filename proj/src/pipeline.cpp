#include "necsel/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "necsel/error.hpp"
#include "necsel/hash.hpp"
#include "necsel/ingest.hpp"
#include "necsel/json_io.hpp"
#include "necsel/ngram.hpp"
#include "necsel/rng.hpp"
#include "necsel/sampling.hpp"

namespace necsel {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::none: return "none";
    case Stage::seeded: return "seeded";
    case Stage::scored: return "scored";
    case Stage::selected: return "selected";
    case Stage::merged: return "merged";
  }
  return "none";
}

std::optional<Stage> parse_stage(std::string_view text) {
  for (auto s : {Stage::none, Stage::seeded, Stage::scored, Stage::selected, Stage::merged}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

PoolSource PoolSource::from_file(fs::path path) {
  PoolSource p;
  p.path_ = std::move(path);
  return p;
}

PoolSource PoolSource::from_samples(std::span<const Sample> samples) {
  PoolSource p;
  p.samples_ = samples;
  return p;
}

void PoolSource::for_each(const std::function<void(const Sample&)>& fn) const {
  if (path_) {
    PoolReader reader(*path_, true);
    while (auto s = reader.next()) fn(*s);
    return;
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& s : samples_) {
    if (auto problem = check_sample(s)) throw DataError("sample '" + s.id + "': " + *problem);
    if (!seen.insert(s.id).second) throw DataError("duplicate id '" + s.id + "'");
    fn(s);
  }
}

std::size_t PoolSource::count() const {
  std::size_t n = 0;
  for_each([&](const Sample&) { ++n; });
  return n;
}

// ---------------------------------------------------------------------------
// Stages

namespace {

void build_scorer(const PoolSource& pool, std::span<const std::string> seed_ids,
                  const SelectionConfig& cfg, const ScorerSpec& spec, Stage1Result& out) {
  if (spec.external_scores) {
    out.external = load_scores(*spec.external_scores,
                               ScoreFileHeader{cfg.orientation, "", cfg.length_norm});
    return;
  }
  if (seed_ids.empty()) {
    throw ConfigError(ConfigFault::bad_value,
                      "the built-in scorer is trained on the seed set and needs n1 >= 1; "
                      "pass external scores for n1 = 0");
  }
  const std::unordered_set<std::string_view> wanted(seed_ids.begin(), seed_ids.end());
  auto scorer = std::make_unique<NgramScorer>(spec.ngram_order);
  pool.for_each([&](const Sample& s) {
    if (wanted.contains(s.id)) scorer->add_sample(s);
  });
  out.scorer = std::move(scorer);
}

std::string scorer_name(const Stage1Result& s1) {
  return s1.scorer ? s1.scorer->descriptor() : s1.external->header.scorer;
}

}  // namespace

Stage1Result run_stage1(const PoolSource& pool, const SelectionConfig& cfg, const ScorerSpec& spec) {
  validate_config(cfg, pool.count());

  RngStream rng = derive_stream(cfg.rng_seed, "seed", 0);
  ReservoirSampler sampler(cfg.n1, rng);
  pool.for_each([&](const Sample& s) { sampler.offer(s.id); });

  Stage1Result out;
  out.seed_ids = std::move(sampler).finish();
  build_scorer(pool, out.seed_ids, cfg, spec, out);
  return out;
}

std::vector<ScoredSample> score_candidates(const PoolSource& pool,
                                           std::span<const std::string> seed_ids,
                                           const Stage1Result& stage1, const SelectionConfig& cfg,
                                           unsigned jobs) {
  const std::unordered_set<std::string_view> seed(seed_ids.begin(), seed_ids.end());
  std::vector<ScoredSample> out;

  if (stage1.external) {
    const auto& rows = stage1.external->rows;
    std::unordered_map<std::string_view, const ScoredSample*> by_id;
    by_id.reserve(rows.size());
    for (const auto& r : rows) by_id.emplace(r.id, &r);

    std::unordered_set<std::string> pool_ids;
    std::vector<std::string> missing;
    pool.for_each([&](const Sample& s) {
      pool_ids.insert(s.id);
      if (seed.contains(s.id)) return;
      auto it = by_id.find(s.id);
      if (it == by_id.end()) {
        missing.push_back(s.id);
      } else {
        out.push_back(*it->second);
      }
    });
    check_orphans(rows, pool_ids);
    if (!missing.empty()) {
      std::string msg = std::to_string(missing.size()) + " candidate(s) have no score:";
      for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 20); ++i) {
        msg += " " + missing[i];
      }
      if (missing.size() > 20) msg += " ...";
      throw DataError(msg);
    }
    return out;
  }

  if (!stage1.scorer) throw InternalError("stage 1 produced no scorer");
  const ScoreOptions opts{cfg.orientation, cfg.length_norm};
  constexpr std::size_t kBatch = 4096;
  std::vector<Sample> batch;
  batch.reserve(kBatch);
  auto flush = [&] {
    auto scored = score_pool(*stage1.scorer, batch, opts, jobs);
    out.insert(out.end(), std::make_move_iterator(scored.begin()),
               std::make_move_iterator(scored.end()));
    batch.clear();
  };
  pool.for_each([&](const Sample& s) {
    if (seed.contains(s.id)) return;
    batch.push_back(s);
    if (batch.size() == kBatch) flush();
  });
  if (!batch.empty()) flush();
  return out;
}

Stage2Result run_stage2(const PoolSource& pool, const Stage1Result& stage1,
                        const SelectionConfig& cfg, unsigned jobs) {
  Stage2Result out;
  out.candidates = score_candidates(pool, stage1.seed_ids, stage1, cfg, jobs);
  out.selection = select(out.candidates, cfg, jobs);
  return out;
}

std::size_t merge_and_emit(const PoolSource& pool, std::span<const std::string> seed_ids,
                           const SelectionResult& selection, const fs::path& dataset) {
  std::unordered_set<std::string_view> keep(seed_ids.begin(), seed_ids.end());
  for (const auto& id : selection.selected_ids) {
    if (!keep.insert(id).second) {
      throw InternalError("seed and selected sets overlap on '" + id + "'");
    }
  }
  std::vector<Sample> chosen;
  chosen.reserve(keep.size());
  pool.for_each([&](const Sample& s) {
    if (keep.contains(s.id)) chosen.push_back(s);
  });
  if (chosen.size() != keep.size()) {
    throw InternalError("merge found " + std::to_string(chosen.size()) + " of " +
                        std::to_string(keep.size()) + " expected records");
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const Sample& a, const Sample& b) { return a.id < b.id; });
  return write_pool(chosen, dataset);
}

// ---------------------------------------------------------------------------
// Run directories

RunPaths::RunPaths(fs::path d)
    : dir(std::move(d)),
      seed_ids(dir / "seed.ids"),
      scores(dir / "scores.jsonl"),
      selection(dir / "selection.json"),
      dataset(dir / "dataset.jsonl"),
      manifest(dir / "manifest.json"),
      lock(dir / ".lock") {}

std::string manifest_hash(const json& manifest) {
  json copy = manifest;
  copy.erase("manifest_sha256");
  return sha256_hex(copy.dump());
}

json load_manifest(const fs::path& path) {
  json m = read_json_file(path);
  if (!m.is_object() || !m.contains("manifest_sha256")) {
    throw DataError(path.string() + ": not a run manifest");
  }
  if (m["manifest_sha256"].get<std::string>() != manifest_hash(m)) {
    throw DataError(path.string() + ": manifest hash mismatch (edited or corrupt)");
  }
  return m;
}

std::vector<std::string> read_id_list(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

namespace {

class RunLock {
 public:
  explicit RunLock(fs::path path) : path_(std::move(path)) {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      throw DataError("run directory is locked by another process (remove " + path_.string() +
                      " if stale)");
    }
    const auto pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~RunLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  fs::path path_;
};

void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  write_text_file(tmp, text);
  fs::rename(tmp, path);
}

std::string id_list_text(std::span<const std::string> ids) {
  std::string out;
  for (const auto& id : ids) {
    out += id;
    out += '\n';
  }
  return out;
}

struct RunState {
  RunPaths paths;
  PoolSource pool;
  SelectionConfig cfg;
  ScorerSpec spec;
  unsigned jobs = 1;
  Stage stop_after = Stage::merged;
  json manifest;

  // In-memory results carried between stages of one invocation.
  std::optional<Stage1Result> stage1;
  std::optional<std::vector<ScoredSample>> candidates;
  std::optional<SelectionResult> selection;
};

Stage current_stage(const json& m) {
  auto s = parse_stage(m.at("stage").get<std::string>());
  if (!s) throw DataError("manifest has an unknown stage");
  return *s;
}

void commit(RunState& st, Stage stage, const std::string& artifact, const fs::path& path) {
  st.manifest["artifacts"][artifact] = sha256_file(path);
  st.manifest["stage"] = std::string(to_string(stage));
  st.manifest.erase("manifest_sha256");
  st.manifest["manifest_sha256"] = manifest_hash(st.manifest);
  write_text_atomic(st.paths.manifest, st.manifest.dump(2) + "\n");
}

ScoreFileHeader run_score_header(const RunState& st, const std::string& scorer) {
  return ScoreFileHeader{st.cfg.orientation, scorer, st.cfg.length_norm};
}

RunOutcome advance(RunState& st) {
  auto reached = [&](Stage s) { return current_stage(st.manifest) >= s; };
  auto done = [&] { return current_stage(st.manifest) >= st.stop_after; };

  if (!done() && !reached(Stage::scored)) {
    if (!st.stage1) {
      Stage1Result s1;
      s1.seed_ids = read_id_list(st.paths.seed_ids);
      build_scorer(st.pool, s1.seed_ids, st.cfg, st.spec, s1);
      st.stage1 = std::move(s1);
    }
    auto cands = score_candidates(st.pool, st.stage1->seed_ids, *st.stage1, st.cfg, st.jobs);
    write_scores(cands, run_score_header(st, scorer_name(*st.stage1)), st.paths.scores);
    st.manifest["candidates"] = cands.size();
    st.candidates = std::move(cands);
    commit(st, Stage::scored, "scores.jsonl", st.paths.scores);
  }

  if (!done() && !reached(Stage::selected)) {
    if (!st.candidates) {
      st.candidates = load_scores(st.paths.scores, run_score_header(st, "")).rows;
    }
    auto sel = select(*st.candidates, st.cfg, st.jobs);
    write_json_file(st.paths.selection, selection_to_json(sel));
    st.manifest["selected_ids"] = sel.selected_ids;
    json groups = json::array();
    for (const auto& g : sel.per_group) {
      groups.push_back({{"group", g.group}, {"size", g.size}, {"quota", g.quota}});
    }
    st.manifest["per_group"] = std::move(groups);
    st.selection = std::move(sel);
    commit(st, Stage::selected, "selection.json", st.paths.selection);
  }

  if (!done() && !reached(Stage::merged)) {
    if (!st.selection) st.selection = selection_from_json(read_json_file(st.paths.selection));
    const auto seed_ids = st.stage1 ? st.stage1->seed_ids : read_id_list(st.paths.seed_ids);
    const auto written = merge_and_emit(st.pool, seed_ids, *st.selection, st.paths.dataset);
    if (written != st.cfg.n1 + st.cfg.n2) {
      throw InternalError("dataset has " + std::to_string(written) + " records, expected n1 + n2");
    }
    st.manifest["dataset_records"] = written;
    commit(st, Stage::merged, "dataset.jsonl", st.paths.dataset);
  }

  RunOutcome out;
  out.stage = current_stage(st.manifest);
  out.manifest_sha256 = st.manifest["manifest_sha256"].get<std::string>();
  out.manifest = st.manifest;
  return out;
}

json scorer_descriptor(const ScorerSpec& spec, const Stage1Result* s1) {
  if (spec.external_scores) {
    json d = {{"kind", "external"}, {"scores_sha256", sha256_file(*spec.external_scores)}};
    if (s1 && s1->external) d["name"] = s1->external->header.scorer;
    return d;
  }
  return {{"kind", "ngram-bytes"}, {"order", spec.ngram_order}};
}

}  // namespace

RunOutcome run_pipeline(const RunOptions& opts) {
  validate_parameters(opts.config);
  fs::create_directories(opts.out_dir);
  RunState st{RunPaths(opts.out_dir), PoolSource::from_file(opts.pool), opts.config, opts.scorer,
              std::max(1u, opts.jobs), opts.stop_after, json::object(), {}, {}, {}};
  RunLock lock(st.paths.lock);

  for (const auto& p : {st.paths.seed_ids, st.paths.scores, st.paths.selection,
                        st.paths.dataset, st.paths.manifest}) {
    std::error_code ec;
    fs::remove(p, ec);
  }

  const auto pool_sha = sha256_file(opts.pool);
  auto s1 = run_stage1(st.pool, st.cfg, st.spec);
  write_text_file(st.paths.seed_ids, id_list_text(s1.seed_ids));

  st.manifest = {
      {"tool", "necsel"},
      {"tool_version", std::string(kToolVersion)},
      {"config", config_to_json(st.cfg)},
      {"pool_sha256", pool_sha},
      {"scorer", scorer_descriptor(st.spec, &s1)},
      {"seed_ids", s1.seed_ids},
      {"artifacts", json::object()},
      {"stage", std::string(to_string(Stage::none))},
  };
  st.stage1 = std::move(s1);
  commit(st, Stage::seeded, "seed.ids", st.paths.seed_ids);
  return advance(st);
}

RunOutcome resume_pipeline(const ResumeOptions& opts) {
  RunPaths paths(opts.out_dir);
  if (!fs::exists(paths.manifest)) {
    throw DataError("no manifest in " + opts.out_dir.string() + "; start with `run` or `seed`");
  }
  RunLock lock(paths.lock);
  json manifest = load_manifest(paths.manifest);

  const SelectionConfig stored = config_from_json(manifest.at("config"));
  if (opts.config && *opts.config != stored) {
    throw ConfigError(ConfigFault::mismatch,
                      "config differs from the in-progress manifest; stored config:\n" +
                          to_canonical_text(stored));
  }
  if (sha256_file(opts.pool) != manifest.at("pool_sha256").get<std::string>()) {
    throw DataError("pool content hash differs from the in-progress manifest");
  }
  for (const auto& [name, digest] : manifest.at("artifacts").items()) {
    const fs::path p = paths.dir / name;
    if (!fs::exists(p)) throw DataError("artifact missing: " + p.string());
    if (sha256_file(p) != digest.get<std::string>()) {
      throw DataError("artifact hash mismatch: " + p.string() + " (stale or edited)");
    }
  }

  ScorerSpec spec;
  const json& scorer = manifest.at("scorer");
  const Stage stage = current_stage(manifest);
  if (scorer.at("kind") == "external") {
    if (stage < Stage::scored) {
      if (!opts.external_scores) {
        throw UsageError("this run uses external scores; pass the same --scores file to resume");
      }
      if (sha256_file(*opts.external_scores) != scorer.at("scores_sha256").get<std::string>()) {
        throw DataError("external score file differs from the one recorded in the manifest");
      }
      spec.external_scores = opts.external_scores;
    }
  } else {
    if (opts.external_scores) {
      throw ConfigError(ConfigFault::mismatch,
                        "run was started with the built-in scorer; --scores not allowed on resume");
    }
    spec.ngram_order = scorer.at("order").get<unsigned>();
  }

  RunState st{paths, PoolSource::from_file(opts.pool), stored, spec, std::max(1u, opts.jobs),
              opts.stop_after, std::move(manifest), {}, {}, {}};
  return advance(st);
}

}  // namespace necsel
