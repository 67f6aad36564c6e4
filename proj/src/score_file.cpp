#include "necsel/score_file.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "necsel/error.hpp"

namespace necsel {

using nlohmann::json;

std::string format_score_row(const ScoredSample& row) {
  char num[40];
  std::snprintf(num, sizeof num, "%.17g", row.score);
  std::string out = "{\"id\":";
  out += json(row.id).dump();
  out += ",\"num_tokens\":";
  out += std::to_string(row.num_tokens);
  out += ",\"score\":";
  out += num;
  out += '}';
  return out;
}

void write_scores(std::span<const ScoredSample> scored, const ScoreFileHeader& header,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write score file: " + path.string());
  json h = {{"orientation", std::string(to_string(header.orientation))},
            {"scorer", header.scorer},
            {"length_norm", header.length_norm}};
  out << h.dump() << '\n';
  for (const auto& row : scored) out << format_score_row(row) << '\n';
  out.close();
  if (out.fail()) throw DataError("write failed: " + path.string());
}

ScoreFile load_scores(const std::filesystem::path& path,
                      const std::optional<ScoreFileHeader>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("score file not found: " + path.string());

  auto fail = [&](std::size_t line_no, const std::string& why) -> DataError {
    return DataError(path.string() + ":" + std::to_string(line_no) + ": " + why);
  };

  ScoreFile file;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw fail(1, "missing header row");
  ++line_no;
  try {
    const json h = json::parse(line);
    const auto orient = parse_orientation(h.at("orientation").get<std::string>());
    if (!orient) throw fail(line_no, "unknown orientation in header");
    file.header.orientation = *orient;
    file.header.scorer = h.at("scorer").get<std::string>();
    file.header.length_norm = h.at("length_norm").get<bool>();
  } catch (const json::exception& e) {
    throw fail(line_no, std::string("bad header row: ") + e.what());
  }

  if (expected) {
    if (file.header.orientation != expected->orientation) {
      throw ConfigError(ConfigFault::mismatch,
                        path.string() + ": score orientation '" +
                            std::string(to_string(file.header.orientation)) +
                            "' does not match configured '" +
                            std::string(to_string(expected->orientation)) + "'");
    }
    if (file.header.length_norm != expected->length_norm) {
      throw ConfigError(ConfigFault::mismatch,
                        path.string() + ": score file length_norm does not match configuration");
    }
  }

  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ScoredSample row;
    try {
      const json r = json::parse(line);
      row.id = r.at("id").get<std::string>();
      row.score = r.at("score").get<double>();
      const auto& nt = r.at("num_tokens");
      if (!nt.is_number_unsigned() && !(nt.is_number_integer() && nt.get<long long>() >= 0)) {
        throw fail(line_no, "num_tokens must be a nonnegative integer");
      }
      row.num_tokens = nt.get<std::size_t>();
    } catch (const json::exception& e) {
      throw fail(line_no, std::string("bad score row: ") + e.what());
    }
    if (!std::isfinite(row.score)) throw fail(line_no, "non-finite score for '" + row.id + "'");
    if (row.num_tokens < 1) throw fail(line_no, "num_tokens must be >= 1 for '" + row.id + "'");
    if (!seen.insert(row.id).second) throw fail(line_no, "duplicate id '" + row.id + "'");
    file.rows.push_back(std::move(row));
  }
  return file;
}

void check_orphans(std::span<const ScoredSample> rows, const std::unordered_set<std::string>& pool_ids) {
  std::vector<std::string> orphans;
  for (const auto& r : rows) {
    if (!pool_ids.contains(r.id)) orphans.push_back(r.id);
  }
  if (orphans.empty()) return;
  std::string msg = std::to_string(orphans.size()) + " score id(s) not in pool:";
  const std::size_t shown = std::min<std::size_t>(orphans.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) msg += " " + orphans[i];
  if (shown < orphans.size()) msg += " ...";
  throw DataError(msg);
}

}  // namespace necsel
