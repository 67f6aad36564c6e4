#include "necsel/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "necsel/config.hpp"
#include "necsel/error.hpp"
#include "necsel/ingest.hpp"
#include "necsel/json_io.hpp"
#include "necsel/pipeline.hpp"
#include "necsel/report.hpp"
#include "necsel/score_file.hpp"

namespace necsel::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Selection flags shared by several subcommands. Flag values override the
// --config file, which overrides the base config.
struct ConfigFlags {
  std::string config_file;
  std::size_t n1 = 0, n2 = 0, k = 0;
  double tau = 1.0;
  std::string strategy, orientation;
  std::uint64_t rng_seed = 0;
  bool length_norm = false;

  CLI::Option* o_config = nullptr;
  CLI::Option* o_n1 = nullptr;
  CLI::Option* o_n2 = nullptr;
  CLI::Option* o_k = nullptr;
  CLI::Option* o_tau = nullptr;
  CLI::Option* o_strategy = nullptr;
  CLI::Option* o_orientation = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_norm = nullptr;

  void attach(CLI::App* app) {
    o_config = app->add_option("--config", config_file, "Config file (key = value lines)");
    o_n1 = app->add_option("--seed-size", n1, "n1: seed samples drawn uniformly (default 100000)");
    o_n2 = app->add_option("--select-size", n2, "n2: samples selected by necessity (default 565000)");
    o_k = app->add_option("--group-size", k, "k: rank-group size (default 50000)");
    o_tau = app->add_option("--temperature", tau, "tau: softmax temperature, > 0 (default 1)");
    o_strategy = app->add_option("--strategy", strategy, "nbgs | random | top | bottom (default nbgs)");
    o_orientation = app->add_option("--orientation", orientation, "nll | loglik (default nll)");
    o_seed = app->add_option("--rng-seed", rng_seed, "Master RNG seed (default 0)");
    o_norm = app->add_flag("--length-norm", length_norm, "Divide scores by token count");
  }

  bool any() const {
    for (auto* o : {o_config, o_n1, o_n2, o_k, o_tau, o_strategy, o_orientation, o_seed, o_norm}) {
      if (o->count() > 0) return true;
    }
    return false;
  }

  SelectionConfig resolve(SelectionConfig cfg) const {
    if (o_config->count()) cfg = load_config_file(config_file, cfg);
    if (o_n1->count()) cfg.n1 = n1;
    if (o_n2->count()) cfg.n2 = n2;
    if (o_k->count()) cfg.k = k;
    if (o_tau->count()) cfg.tau = tau;
    if (o_strategy->count()) set_config_field(cfg, "strategy", strategy);
    if (o_orientation->count()) set_config_field(cfg, "orientation", orientation);
    if (o_seed->count()) cfg.rng_seed = rng_seed;
    if (o_norm->count()) cfg.length_norm = length_norm;
    return cfg;
  }
};

fs::path output_dir(const std::string& flag, const char* default_name) {
  if (!flag.empty()) return flag;
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) {
    return fs::path(root) / default_name;
  }
  throw UsageError(std::string("--out is required (or set ") + kOutputRootEnv + ")");
}

void print_effective(std::ostream& err, const SelectionConfig& cfg) {
  err << "# effective config\n" << to_canonical_text(cfg);
}

json outcome_json(const RunOutcome& o, const fs::path& dir) {
  json j = {{"stage", std::string(to_string(o.stage))},
            {"manifest_sha256", o.manifest_sha256},
            {"out", dir.string()}};
  if (o.manifest.contains("dataset_records")) j["dataset_records"] = o.manifest["dataset_records"];
  return j;
}

Stage parse_stage_flag(const std::string& s) {
  auto st = parse_stage(s);
  if (!st || *st == Stage::none) throw UsageError("--stop-after must be seeded|scored|selected|merged");
  return *st;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"necsel: necessity-driven instruction-data selection", "necsel"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  // fixture
  std::size_t fx_samples = 0, fx_sources = 4;
  std::uint64_t fx_seed = 1;
  std::string fx_out;
  auto* fixture = app.add_subcommand("fixture", "Generate a synthetic multi-source pool");
  fixture->add_option("--samples", fx_samples, "Number of records")->required();
  fixture->add_option("--sources", fx_sources, "Number of sources (round-robin)")
      ->capture_default_str();
  fixture->add_option("--rng-seed", fx_seed, "Generator seed")->capture_default_str();
  fixture->add_option("--out", fx_out, "Output JSONL file");

  // ingest
  std::string in_pool, in_out, in_stats;
  bool in_lenient = false;
  auto* ingest = app.add_subcommand("ingest", "Validate, deduplicate and re-emit a pool");
  ingest->add_option("--pool", in_pool, "Input JSONL pool")->required();
  ingest->add_option("--out", in_out, "Write the canonical pool here");
  ingest->add_option("--stats", in_stats, "Write PoolStats JSON here");
  ingest->add_flag("--lenient", in_lenient, "Skip malformed/duplicate records instead of failing");

  // pipeline stage commands
  struct StageArgs {
    std::string pool, out, scores, stop_after;
    unsigned order = 3;
    unsigned jobs = 1;
    ConfigFlags cfg;
  };
  StageArgs a_run, a_seed, a_score, a_select, a_resume;

  auto add_common = [](CLI::App* sub, StageArgs& a, bool pool_required) {
    auto* p = sub->add_option("--pool", a.pool, "Input JSONL pool");
    if (pool_required) p->required();
    sub->add_option("--out", a.out, "Run directory");
    sub->add_option("--jobs", a.jobs, "Worker threads (never changes outputs)")
        ->capture_default_str();
    a.cfg.attach(sub);
  };

  auto* run_cmd = app.add_subcommand("run", "Seed, score, select and merge in one go");
  add_common(run_cmd, a_run, true);
  run_cmd->add_option("--scores", a_run.scores, "External score file instead of the n-gram scorer");
  run_cmd->add_option("--order", a_run.order, "Built-in n-gram order")->capture_default_str();
  run_cmd->add_option("--stop-after", a_run.stop_after, "seeded | scored | selected | merged");

  auto* seed_cmd = app.add_subcommand("seed", "Stage 1: draw the seed set into a run directory");
  add_common(seed_cmd, a_seed, true);
  seed_cmd->add_option("--scores", a_seed.scores, "External score file (recorded for later stages)");
  seed_cmd->add_option("--order", a_seed.order, "Built-in n-gram order")->capture_default_str();

  auto* score_cmd = app.add_subcommand("score", "Stage 2a: score the candidates of a seeded run");
  add_common(score_cmd, a_score, true);
  score_cmd->add_option("--scores", a_score.scores, "External score file given at seed time");

  auto* select_cmd = app.add_subcommand(
      "select", "Stage 2b: select from a scored run, or directly from a score file with --scores");
  add_common(select_cmd, a_select, false);
  select_cmd->add_option("--scores", a_select.scores, "Standalone mode: select from this score file");

  auto* resume_cmd = app.add_subcommand("resume", "Continue a run from its last completed stage");
  add_common(resume_cmd, a_resume, true);
  resume_cmd->add_option("--scores", a_resume.scores, "External score file (if the run uses one)");
  resume_cmd->add_option("--stop-after", a_resume.stop_after, "seeded | scored | selected | merged");

  // report
  std::string rp_pool, rp_out;
  std::size_t rp_exemplars = 5;
  auto* report = app.add_subcommand("report", "Diversity report and exemplars for a run");
  report->add_option("--pool", rp_pool, "Input JSONL pool")->required();
  report->add_option("--out", rp_out, "Run directory");
  report->add_option("--exemplars", rp_exemplars, "Top/bottom exemplars to extract")
      ->capture_default_str();

  // compare / sweep
  StageArgs a_compare, a_sweep;
  std::string sweep_grid;
  auto* compare = app.add_subcommand("compare", "Compare nbgs/random/top/bottom on one pool");
  add_common(compare, a_compare, true);
  compare->add_option("--scores", a_compare.scores, "External score file");
  compare->add_option("--order", a_compare.order, "Built-in n-gram order")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Run the pipeline over a config grid");
  add_common(sweep, a_sweep, true);
  sweep->add_option("--grid", sweep_grid, "Grid file (key = v1, v2, ... per line)")->required();
  sweep->add_option("--scores", a_sweep.scores, "External score file");
  sweep->add_option("--order", a_sweep.order, "Built-in n-gram order")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    err << "run with --help for usage\n";
    return 1;
  }

  try {
    auto scorer_spec = [](const StageArgs& a) {
      ScorerSpec spec;
      spec.ngram_order = a.order;
      if (!a.scores.empty()) spec.external_scores = fs::path(a.scores);
      return spec;
    };

    if (fixture->parsed()) {
      const fs::path path = fx_out.empty() ? output_dir("", "fixture.jsonl") : fs::path(fx_out);
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      const auto n = make_fixture(fx_samples, fx_sources, fx_seed, path);
      out << json{{"records", n}, {"out", path.string()}}.dump() << '\n';
      return 0;
    }

    if (ingest->parsed()) {
      PoolReader reader(in_pool, !in_lenient);
      std::optional<PoolWriter> writer;
      if (!in_out.empty()) writer.emplace(in_out);
      while (auto s = reader.next()) {
        if (writer) writer->write(*s);
      }
      if (writer) writer->close();
      const auto stats = stats_to_json(reader.stats());
      if (!in_stats.empty()) write_text_file(in_stats, stats + "\n");
      out << stats << '\n';
      return 0;
    }

    if (run_cmd->parsed() || seed_cmd->parsed()) {
      const bool is_seed = seed_cmd->parsed();
      const StageArgs& a = is_seed ? a_seed : a_run;
      RunOptions opts;
      opts.pool = a.pool;
      opts.out_dir = output_dir(a.out, "run");
      opts.config = a.cfg.resolve(SelectionConfig{});
      opts.scorer = scorer_spec(a);
      opts.jobs = a.jobs;
      opts.stop_after = is_seed ? Stage::seeded
                                : (a.stop_after.empty() ? Stage::merged : parse_stage_flag(a.stop_after));
      print_effective(err, opts.config);
      const auto outcome = run_pipeline(opts);
      out << outcome_json(outcome, opts.out_dir).dump() << '\n';
      return 0;
    }

    if (select_cmd->parsed() && !a_select.scores.empty()) {
      // Standalone: every row of the score file is a candidate.
      const auto cfg = a_select.cfg.resolve(SelectionConfig{});
      print_effective(err, cfg);
      const auto file = load_scores(a_select.scores,
                                    ScoreFileHeader{cfg.orientation, "", cfg.length_norm});
      auto check = cfg;
      check.n1 = 0;  // no seed stage here
      validate_config(check, file.rows.size());
      const auto result = select(file.rows, cfg, a_select.jobs);
      const json j = selection_to_json(result);
      if (a_select.out.empty()) {
        out << j.dump(2) << '\n';
      } else {
        fs::create_directories(a_select.out);
        write_json_file(fs::path(a_select.out) / "selection.json", j);
        out << json{{"selected", result.selected_ids.size()}, {"out", a_select.out}}.dump() << '\n';
      }
      return 0;
    }

    if (score_cmd->parsed() || select_cmd->parsed() || resume_cmd->parsed()) {
      const StageArgs& a = score_cmd->parsed() ? a_score : select_cmd->parsed() ? a_select : a_resume;
      if (a.pool.empty()) throw UsageError("--pool is required");
      ResumeOptions opts;
      opts.pool = a.pool;
      opts.out_dir = output_dir(a.out, "run");
      opts.jobs = a.jobs;
      if (!a.scores.empty()) opts.external_scores = fs::path(a.scores);
      opts.stop_after = score_cmd->parsed()    ? Stage::scored
                        : select_cmd->parsed() ? Stage::selected
                        : a.stop_after.empty() ? Stage::merged
                                               : parse_stage_flag(a.stop_after);
      const RunPaths paths(opts.out_dir);
      if (!fs::exists(paths.manifest)) {
        throw DataError("no run manifest in " + opts.out_dir.string());
      }
      const auto stored = config_from_json(load_manifest(paths.manifest).at("config"));
      const auto effective = a.cfg.resolve(stored);
      if (a.cfg.any()) opts.config = effective;
      print_effective(err, effective);
      const auto outcome = resume_pipeline(opts);
      out << outcome_json(outcome, opts.out_dir).dump() << '\n';
      return 0;
    }

    if (report->parsed()) {
      const auto dir = output_dir(rp_out, "run");
      write_run_report(PoolSource::from_file(rp_pool), dir, rp_exemplars);
      out << read_json_file(dir / "report.json").dump() << '\n';
      return 0;
    }

    if (compare->parsed()) {
      const auto cfg = a_compare.cfg.resolve(SelectionConfig{});
      print_effective(err, cfg);
      const auto rows = compare_strategies(PoolSource::from_file(a_compare.pool), cfg,
                                           scorer_spec(a_compare), a_compare.jobs);
      const auto dir = output_dir(a_compare.out, "compare");
      fs::create_directories(dir);
      const auto csv = comparison_csv(rows);
      write_text_file(dir / "compare.csv", csv);
      write_json_file(dir / "compare.json", comparison_json(rows));
      out << csv;
      for (const auto& r : rows) {
        if (!r.error.empty()) err << "row " << to_string(r.config.strategy) << ": " << r.error << '\n';
      }
      return 0;
    }

    if (sweep->parsed()) {
      const auto base = a_sweep.cfg.resolve(SelectionConfig{});
      print_effective(err, base);
      std::ifstream gin(sweep_grid, std::ios::binary);
      if (!gin) throw DataError("cannot open grid file: " + sweep_grid);
      std::stringstream buf;
      buf << gin.rdbuf();
      const auto grid = parse_grid(buf.str(), base);
      const auto dir = output_dir(a_sweep.out, "sweep");
      fs::create_directories(dir);

      const auto pool = PoolSource::from_file(a_sweep.pool);
      const auto sources = build_source_index(pool);
      std::vector<ComparisonRow> rows;
      json runs = json::array();
      for (std::size_t i = 0; i < grid.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "run-%03zu", i);
        ComparisonRow row;
        row.config = grid[i];
        RunOptions opts;
        opts.pool = a_sweep.pool;
        opts.out_dir = dir / name;
        opts.config = grid[i];
        opts.scorer = scorer_spec(a_sweep);
        opts.jobs = a_sweep.jobs;
        try {
          const auto outcome = run_pipeline(opts);
          const RunPaths paths(opts.out_dir);
          const auto cands = load_scores(paths.scores, ScoreFileHeader{grid[i].orientation, "",
                                                                       grid[i].length_norm}).rows;
          const auto sel = selection_from_json(read_json_file(paths.selection));
          row.metrics = evaluate_selection(cands, sel.selected_ids, sources);
          runs.push_back({{"run", name}, {"manifest_sha256", outcome.manifest_sha256}});
        } catch (const Error& e) {
          row.error = e.what();
          runs.push_back({{"run", name}, {"error", e.what()}});
          err << name << ": " << e.what() << '\n';
        }
        rows.push_back(std::move(row));
      }
      const auto csv = comparison_csv(rows);
      write_text_file(dir / "sweep.csv", csv);
      json j = {{"runs", runs}, {"rows", comparison_json(rows)}};
      write_json_file(dir / "sweep.json", j);
      out << csv;
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::data);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::internal);
  }
  err << "usage error: no subcommand\n";
  return 1;
}

}  // namespace necsel::cli
