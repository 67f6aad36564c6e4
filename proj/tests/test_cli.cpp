#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "necsel/cli.hpp"
#include "necsel/ingest.hpp"
#include "necsel/json_io.hpp"
#include "support.hpp"

using necsel::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = necsel::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Compares against tests/golden/<name>; NECSEL_UPDATE_GOLDEN=1 rewrites it.
void check_golden(const std::string& name, const std::string& actual) {
  const fs::path path = fs::path(NECSEL_GOLDEN_DIR) / name;
  if (const char* u = std::getenv("NECSEL_UPDATE_GOLDEN"); u && std::string(u) == "1") {
    std::ofstream(path, std::ios::binary) << actual;
  }
  REQUIRE_MESSAGE(fs::exists(path), "missing golden file " << path);
  CHECK(slurp(path) == actual);
}

const std::vector<std::string> kCommands = {"fixture", "ingest", "seed",    "score", "select",
                                            "run",     "resume", "report", "compare", "sweep"};

}  // namespace

TEST_CASE("cli: help snapshots") {
  const auto top = run({"--help"});
  CHECK(top.code == 0);
  check_golden("help.txt", top.out);
  for (const auto& cmd : kCommands) {
    CAPTURE(cmd);
    CHECK(top.out.find(cmd) != std::string::npos);
    const auto sub = run({cmd, "--help"});
    CHECK(sub.code == 0);
    check_golden("help_" + cmd + ".txt", sub.out);
  }
  const auto help = run({"run", "--help"}).out;
  for (const char* flag : {"--pool", "--out", "--jobs", "--config", "--seed-size", "--select-size",
                           "--group-size", "--temperature", "--strategy", "--orientation",
                           "--rng-seed", "--length-norm", "--scores", "--order", "--stop-after"}) {
    CAPTURE(flag);
    CHECK(help.find(flag) != std::string::npos);
  }
  CHECK(run({"--version"}).out == "0.1.0\n");
}

TEST_CASE("cli: usage errors exit 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"run", "--pool", "p.jsonl", "--bogus-flag"}).code == 1);
  CHECK(run({"run", "--pool", "p.jsonl", "--seed-size", "ten"}).code == 1);
  CHECK(run({"run", "--seed-size", "10"}).code == 1);
  CHECK(run({"run", "--pool", "p.jsonl", "--stop-after", "never", "--out", "x"}).code == 1);
}

TEST_CASE("cli: exit codes for validation and data errors") {
  TempDir dir("cli");
  REQUIRE(run({"fixture", "--samples", "300", "--out", (dir / "p.jsonl").string()}).code == 0);
  const auto pool = (dir / "p.jsonl").string();

  const auto hot = run({"run", "--pool", pool, "--out", (dir / "r").string(), "--seed-size", "10",
                        "--select-size", "10", "--group-size", "5", "--temperature", "0"});
  CHECK(hot.code == 2);
  CHECK(hot.err.find("tau > 0") != std::string::npos);

  CHECK(run({"run", "--pool", pool, "--out", (dir / "r").string(), "--seed-size", "200",
             "--select-size", "200", "--group-size", "5"})
            .code == 2);
  CHECK(run({"run", "--pool", pool, "--out", (dir / "r").string(), "--strategy", "best"}).code == 2);

  const auto missing = run({"select", "--scores", (dir / "missing.jsonl").string()});
  CHECK(missing.code == 3);
  CHECK(missing.out.empty());
  CHECK(run({"run", "--pool", (dir / "nope.jsonl").string(), "--out", (dir / "r").string()}).code ==
        3);
  CHECK(run({"resume", "--pool", pool, "--out", (dir / "empty").string()}).code == 3);
}

TEST_CASE("cli: 1k + 5k run yields 6k records") {
  TempDir dir("cli");
  const auto pool = (dir / "p.jsonl").string();
  REQUIRE(run({"fixture", "--samples", "6500", "--sources", "5", "--rng-seed", "3", "--out", pool})
              .code == 0);
  const auto r = run({"run", "--pool", pool, "--seed-size", "1000", "--select-size", "5000",
                      "--group-size", "500", "--temperature", "1.0", "--rng-seed", "7", "--out",
                      (dir / "d").string() + "/"});
  CHECK(r.code == 0);
  CHECK(necsel::read_pool(dir / "d" / "dataset.jsonl").samples.size() == 6000);
  // Effective config goes to stderr, the result to stdout.
  CHECK(r.err.find("n1 = 1000\nn2 = 5000\nk = 500\ntau = 1\n") != std::string::npos);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["dataset_records"] == 6000);
  CHECK(j["stage"] == "merged");
}

TEST_CASE("cli: run equals the staged commands") {
  TempDir dir("cli");
  const auto pool = (dir / "p.jsonl").string();
  REQUIRE(run({"fixture", "--samples", "900", "--out", pool}).code == 0);
  const std::vector<std::string> cfg = {"--seed-size", "90",  "--select-size", "250",
                                        "--group-size", "40", "--rng-seed",    "11"};
  auto with = [&](std::vector<std::string> head, const std::string& out) {
    head.insert(head.end(), {"--pool", pool, "--out", (dir / out).string()});
    head.insert(head.end(), cfg.begin(), cfg.end());
    return head;
  };
  REQUIRE(run(with({"run"}, "full")).code == 0);
  REQUIRE(run(with({"seed"}, "staged")).code == 0);
  REQUIRE(run({"score", "--pool", pool, "--out", (dir / "staged").string()}).code == 0);
  REQUIRE(run({"select", "--pool", pool, "--out", (dir / "staged").string(), "--jobs", "4"}).code ==
          0);
  REQUIRE(run({"resume", "--pool", pool, "--out", (dir / "staged").string()}).code == 0);
  for (const char* f : {"seed.ids", "scores.jsonl", "selection.json", "dataset.jsonl", "manifest.json"}) {
    CAPTURE(f);
    CHECK(slurp(dir / "full" / f) == slurp(dir / "staged" / f));
  }

  // Overrides on resume must agree with the stored config.
  const auto changed = run({"resume", "--pool", pool, "--out", (dir / "staged").string(),
                            "--temperature", "0.5"});
  CHECK(changed.code == 2);
  CHECK(run({"resume", "--pool", pool, "--out", (dir / "staged").string(), "--group-size", "40"})
            .code == 0);
}

TEST_CASE("cli: config file with flag overrides") {
  TempDir dir("cli");
  const auto pool = (dir / "p.jsonl").string();
  REQUIRE(run({"fixture", "--samples", "400", "--out", pool}).code == 0);
  std::ofstream(dir / "c.txt") << "n1 = 40\nn2 = 100\nk = 20\ntau = 2\nstrategy = top\n";
  const auto r = run({"run", "--pool", pool, "--out", (dir / "r").string(), "--config",
                      (dir / "c.txt").string(), "--select-size", "60"});
  REQUIRE(r.code == 0);
  const auto m = necsel::read_json_file(dir / "r" / "manifest.json");
  CHECK(m["config"]["n1"] == 40);
  CHECK(m["config"]["n2"] == 60);
  CHECK(m["config"]["strategy"] == "top");
  CHECK(m["config"]["tau"] == 2.0);
  CHECK(run({"run", "--pool", pool, "--out", (dir / "r").string(), "--config",
             (dir / "missing.txt").string()})
            .code != 0);
}

TEST_CASE("cli: output root from the environment") {
  TempDir dir("cli");
  const auto pool = (dir / "p.jsonl").string();
  REQUIRE(run({"fixture", "--samples", "200", "--out", pool}).code == 0);
  ::setenv(necsel::cli::kOutputRootEnv, (dir / "root").c_str(), 1);
  const auto r = run({"run", "--pool", pool, "--seed-size", "20", "--select-size", "30",
                      "--group-size", "10"});
  ::unsetenv(necsel::cli::kOutputRootEnv);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "root" / "run" / "dataset.jsonl"));
  CHECK(run({"run", "--pool", pool, "--seed-size", "20", "--select-size", "30"}).code == 1);
}

TEST_CASE("cli: ingest, standalone select, report, compare, sweep") {
  TempDir dir("cli");
  const auto pool = (dir / "p.jsonl").string();
  REQUIRE(run({"fixture", "--samples", "500", "--sources", "3", "--out", pool}).code == 0);

  std::ofstream(dir / "dirty.jsonl", std::ios::binary)
      << slurp(pool) << "garbage\n" << slurp(pool).substr(0, slurp(pool).find('\n') + 1);
  CHECK(run({"ingest", "--pool", (dir / "dirty.jsonl").string()}).code == 3);
  const auto ing = run({"ingest", "--pool", (dir / "dirty.jsonl").string(), "--lenient", "--out",
                        (dir / "clean.jsonl").string(), "--stats", (dir / "stats.json").string()});
  REQUIRE(ing.code == 0);
  const auto stats = nlohmann::json::parse(ing.out);
  CHECK(stats["total"] == 500);
  CHECK(stats["malformed"] == 1);
  CHECK(stats["duplicate_ids"] == 1);
  CHECK(slurp(dir / "clean.jsonl") == slurp(pool));
  CHECK(necsel::read_json_file(dir / "stats.json") == stats);

  REQUIRE(run({"run", "--pool", pool, "--out", (dir / "r").string(), "--seed-size", "50",
               "--select-size", "100", "--group-size", "25"})
              .code == 0);
  const auto sel = run({"select", "--scores", (dir / "r" / "scores.jsonl").string(),
                        "--seed-size", "50", "--select-size", "100", "--group-size", "25"});
  REQUIRE(sel.code == 0);
  // Standalone selection over the run's candidate scores reproduces the run.
  CHECK(nlohmann::json::parse(sel.out) == necsel::read_json_file(dir / "r" / "selection.json"));
  CHECK(run({"select", "--scores", (dir / "r" / "scores.jsonl").string(), "--orientation",
             "loglik"})
            .code == 2);

  const auto rep = run({"report", "--pool", pool, "--out", (dir / "r").string()});
  CHECK(rep.code == 0);
  CHECK(fs::exists(dir / "r" / "report.json"));
  CHECK(fs::exists(dir / "r" / "exemplars.md"));

  const auto cmp = run({"compare", "--pool", pool, "--out", (dir / "cmp").string(), "--seed-size",
                        "50", "--select-size", "100", "--group-size", "25"});
  CHECK(cmp.code == 0);
  CHECK(slurp(dir / "cmp" / "compare.csv") == cmp.out);
  CHECK(std::count(cmp.out.begin(), cmp.out.end(), '\n') == 5);

  std::ofstream(dir / "grid.txt") << "tau = 0.5, 1\nn2 = 100, 1000\n";
  const auto sw = run({"sweep", "--pool", pool, "--grid", (dir / "grid.txt").string(), "--out",
                       (dir / "sw").string(), "--seed-size", "50", "--group-size", "25"});
  CHECK(sw.code == 0);
  CHECK(std::count(sw.out.begin(), sw.out.end(), '\n') == 5);
  CHECK(fs::exists(dir / "sw" / "run-000" / "manifest.json"));
  const auto sj = necsel::read_json_file(dir / "sw" / "sweep.json");
  CHECK(sj["runs"][1].contains("error"));
  CHECK(sj["runs"][2].contains("manifest_sha256"));
}
