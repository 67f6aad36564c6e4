#include <doctest.h>

#include <sys/resource.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "necsel/error.hpp"
#include "necsel/hash.hpp"
#include "necsel/ingest.hpp"
#include "support.hpp"

using namespace necsel;
using necsel::testing::TempDir;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::filesystem::path& p) {
  const auto text = slurp(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

const char* kThree =
    R"({"id":"a","conversations":[{"from":"human","value":"hi"},{"from":"gpt","value":"yo"}],"source":"s1"})"
    "\n"
    R"({"id":"b","image":"img/b.png","conversations":[{"from":"human","value":"<image>\nwhat"},{"from":"gpt","value":"a cat"},{"from":"human","value":"more"},{"from":"gpt","value":"grey"}],"source":"s2"})"
    "\n"
    R"({"conversations":[{"value":"q","from":"human"},{"from":"gpt","value":"réponse"}],"id":"c","source":"s1"})"
    "\n";

}  // namespace

TEST_CASE("ingest: well-formed pool passes through") {
  TempDir dir("ingest");
  write_file(dir / "p.jsonl", kThree);
  const auto pool = read_pool(dir / "p.jsonl");
  REQUIRE(pool.samples.size() == 3);
  CHECK(pool.stats.malformed == 0);
  CHECK(pool.stats.duplicate_ids == 0);
  CHECK(pool.stats.total == 3);
  CHECK(pool.stats.per_source.at("s1") == 2);
  CHECK(pool.stats.per_source.at("s2") == 1);
  CHECK(pool.samples[1].image == "img/b.png");
  CHECK(pool.samples[1].conversations.size() == 4);
  CHECK(pool.samples[1].conversations[3].role == Role::gpt);
  CHECK(pool.samples[2].conversations[1].value == "r\xc3\xa9ponse");
}

TEST_CASE("ingest: strict mode names the offending line") {
  TempDir dir("ingest");
  write_file(dir / "p.jsonl",
             std::string(kThree) + R"({"id":"d","conversations":[]})" + "\n");
  try {
    read_pool(dir / "p.jsonl");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(":4:") != std::string::npos);
    CHECK(msg.find("conversations") != std::string::npos);
  }
}

TEST_CASE("ingest: record invariants") {
  const auto bad = [](const std::string& line) {
    CAPTURE(line);
    CHECK_THROWS_AS(parse_sample_json(line), DataError);
  };
  bad(R"({"id":"x","conversations":[]})");
  bad(R"({"id":"x","conversations":[{"from":"gpt","value":"a"},{"from":"human","value":"b"}]})");
  bad(R"({"id":"x","conversations":[{"from":"human","value":"a"},{"from":"human","value":"b"}]})");
  bad(R"({"id":"x","conversations":[{"from":"human","value":"a"},{"from":"gpt","value":""}]})");
  bad(R"({"id":"x","conversations":[{"from":"human","value":"a"},{"from":"system","value":"b"}]})");
  bad(R"({"id":"","conversations":[{"from":"human","value":"a"},{"from":"gpt","value":"b"}]})");
  bad(R"({"conversations":[{"from":"human","value":"a"},{"from":"gpt","value":"b"}]})");
  bad(R"({"id":"x","conversations":[{"from":"human","value":"a"},{"from":"gpt","value":"b"}])");
  bad(R"([1,2])");

  const auto s = parse_sample_json(
      R"({"id":17,"conversations":[{"from":"human","value":"a"},{"from":"gpt","value":"b"}]})");
  CHECK(s.id == "17");
  CHECK_FALSE(s.source);
  CHECK_FALSE(s.image);
}

TEST_CASE("ingest: lenient mode counts and skips") {
  TempDir dir("ingest");
  const std::string rec =
      R"({"id":"x","conversations":[{"from":"human","value":"a"},{"from":"gpt","value":"b"}]})";
  const std::string rec2 =
      R"({"id":"x","conversations":[{"from":"human","value":"c"},{"from":"gpt","value":"d"}]})";
  write_file(dir / "p.jsonl", rec + "\n" + rec2 + "\n" + "not json\n" + "\xff\xfe\n" +
                                  R"({"id":"y","conversations":[{"from":"gpt","value":"b"}]})" +
                                  "\n");
  const auto pool = read_pool(dir / "p.jsonl", false);
  REQUIRE(pool.samples.size() == 1);
  CHECK(pool.samples[0].conversations[0].value == "a");
  CHECK(pool.stats.duplicate_ids == 1);
  CHECK(pool.stats.malformed == 3);
  CHECK(pool.stats.total + pool.stats.malformed + pool.stats.duplicate_ids == pool.stats.lines);
  CHECK(pool.stats.lines == 5);

  CHECK_THROWS_AS(read_pool(dir / "p.jsonl", true), DataError);
  CHECK_THROWS_AS(read_pool(dir / "missing.jsonl"), DataError);
}

TEST_CASE("ingest: CRLF line endings are accepted") {
  TempDir dir("ingest");
  std::string crlf;
  for (char c : std::string(kThree)) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  write_file(dir / "p.jsonl", crlf);
  const auto a = read_pool(dir / "p.jsonl");
  write_file(dir / "q.jsonl", kThree);
  const auto b = read_pool(dir / "q.jsonl");
  CHECK(a.samples == b.samples);
}

TEST_CASE("ingest: write/read round trip is byte-stable") {
  TempDir dir("ingest");
  write_file(dir / "p.jsonl", kThree);
  const auto pool = read_pool(dir / "p.jsonl");
  CHECK(write_pool(pool.samples, dir / "w1.jsonl") == 3);
  const auto again = read_pool(dir / "w1.jsonl");
  CHECK(again.samples == pool.samples);
  CHECK(again.stats == pool.stats);
  write_pool(again.samples, dir / "w2.jsonl");
  CHECK(slurp(dir / "w1.jsonl") == slurp(dir / "w2.jsonl"));

  // Canonical form: sorted keys, compact, absent optionals omitted.
  CHECK(to_canonical_json(pool.samples[0]) ==
        R"({"conversations":[{"from":"human","value":"hi"},{"from":"gpt","value":"yo"}],"id":"a","source":"s1"})");

  CHECK(write_pool({}, dir / "empty.jsonl") == 0);
  CHECK(std::filesystem::file_size(dir / "empty.jsonl") == 0);
  CHECK(read_pool(dir / "empty.jsonl").samples.empty());
  CHECK_THROWS_AS(write_pool(pool.samples, dir / "no" / "such" / "dir.jsonl"), DataError);
}

TEST_CASE("ingest: fixture generator") {
  TempDir dir("fixture");
  make_fixture(8, 4, 1, dir / "a.jsonl");
  auto stats = read_pool(dir / "a.jsonl").stats;
  CHECK(stats.per_source.size() == 4);
  for (const auto& [src, n] : stats.per_source) CHECK(n == 2);

  make_fixture(10, 3, 1, dir / "b.jsonl");
  stats = read_pool(dir / "b.jsonl").stats;
  REQUIRE(stats.per_source.size() == 3);
  std::vector<std::size_t> counts;
  for (const auto& [src, n] : stats.per_source) counts.push_back(n);
  CHECK(counts == std::vector<std::size_t>{4, 3, 3});

  make_fixture(10, 3, 1, dir / "c.jsonl");
  CHECK(slurp(dir / "b.jsonl") == slurp(dir / "c.jsonl"));
  make_fixture(10, 3, 2, dir / "d.jsonl");
  CHECK(slurp(dir / "b.jsonl") != slurp(dir / "d.jsonl"));

  const auto mem = generate_fixture(10, 3, 1);
  CHECK(mem == read_pool(dir / "b.jsonl").samples);

  std::set<std::size_t> lengths;
  for (const auto& s : generate_fixture(200, 4, 5)) {
    lengths.insert(s.conversations.back().value.size());
  }
  CHECK(lengths.size() > 20);
}

TEST_CASE("ingest: 10k records survive a rewrite with matching stats") {
  TempDir dir("fixture");
  CHECK(make_fixture(10000, 7, 3, dir / "p.jsonl") == 10000);
  CHECK(count_lines(dir / "p.jsonl") == 10000);
  const auto pool = read_pool(dir / "p.jsonl");
  CHECK(write_pool(pool.samples, dir / "q.jsonl") == 10000);
  CHECK(count_lines(dir / "q.jsonl") == 10000);
  CHECK(read_pool(dir / "q.jsonl").stats == pool.stats);
  CHECK(sha256_file(dir / "p.jsonl") == sha256_file(dir / "q.jsonl"));

  std::size_t sum = 0;
  for (const auto& [src, n] : pool.stats.per_source) sum += n;
  CHECK(sum == pool.stats.total);
}

TEST_CASE("ingest: streaming over a 1M-record pool") {
  TempDir dir("big");
  const auto path = dir / "big.jsonl";
  CHECK(make_fixture(1'000'000, 8, 11, path) == 1'000'000);

  rusage before{};
  getrusage(RUSAGE_SELF, &before);
  PoolReader reader(path);
  std::size_t n = 0, bytes = 0;
  while (auto s = reader.next()) {
    ++n;
    bytes += s->conversations.back().value.size();
  }
  rusage after{};
  getrusage(RUSAGE_SELF, &after);
  CHECK(n == 1'000'000);
  CHECK(reader.stats().lines == 1'000'000);
  // Only the id set grows with the pool; records are never retained.
  const auto file_kb = static_cast<long>(std::filesystem::file_size(path) / 1024);
  CHECK(after.ru_maxrss - before.ru_maxrss < file_kb / 2);
  CHECK(bytes > 0);
}
