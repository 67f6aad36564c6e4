#include "necsel/json_io.hpp"

#include <fstream>
#include <sstream>

#include "necsel/error.hpp"

namespace necsel {

using nlohmann::json;

json config_to_json(const SelectionConfig& cfg) {
  return {{"n1", cfg.n1},
          {"n2", cfg.n2},
          {"k", cfg.k},
          {"tau", cfg.tau},
          {"strategy", std::string(to_string(cfg.strategy))},
          {"orientation", std::string(to_string(cfg.orientation))},
          {"rng_seed", cfg.rng_seed},
          {"length_norm", cfg.length_norm}};
}

SelectionConfig config_from_json(const json& j) {
  try {
    SelectionConfig cfg;
    cfg.n1 = j.at("n1").get<std::size_t>();
    cfg.n2 = j.at("n2").get<std::size_t>();
    cfg.k = j.at("k").get<std::size_t>();
    cfg.tau = j.at("tau").get<double>();
    auto s = parse_strategy(j.at("strategy").get<std::string>());
    auto o = parse_orientation(j.at("orientation").get<std::string>());
    if (!s || !o) throw DataError("bad strategy/orientation in stored config");
    cfg.strategy = *s;
    cfg.orientation = *o;
    cfg.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    cfg.length_norm = j.at("length_norm").get<bool>();
    return cfg;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad stored config: ") + e.what());
  }
}

json selection_to_json(const SelectionResult& r) {
  json groups = json::array();
  for (const auto& g : r.per_group) {
    groups.push_back({{"group", g.group}, {"size", g.size}, {"quota", g.quota}, {"drawn", g.drawn}});
  }
  return {{"strategy", std::string(to_string(r.strategy))},
          {"config", config_to_json(r.config)},
          {"selected_ids", r.selected_ids},
          {"per_group", std::move(groups)}};
}

SelectionResult selection_from_json(const json& j) {
  try {
    SelectionResult r;
    auto s = parse_strategy(j.at("strategy").get<std::string>());
    if (!s) throw DataError("bad strategy in selection");
    r.strategy = *s;
    r.config = config_from_json(j.at("config"));
    r.selected_ids = j.at("selected_ids").get<std::vector<std::string>>();
    for (const auto& g : j.at("per_group")) {
      GroupDraw d;
      d.group = g.at("group").get<std::size_t>();
      d.size = g.at("size").get<std::size_t>();
      d.quota = g.at("quota").get<std::size_t>();
      d.drawn = g.at("drawn").get<std::vector<std::string>>();
      r.per_group.push_back(std::move(d));
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad selection file: ") + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  out.close();
  if (out.fail()) throw DataError("write failed: " + path.string());
}

void write_json_file(const std::filesystem::path& path, const json& j, int indent) {
  write_text_file(path, j.dump(indent) + "\n");
}

}  // namespace necsel
