#include "necsel/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "necsel/error.hpp"
#include "necsel/json_io.hpp"
#include "necsel/score_file.hpp"

namespace necsel {

using nlohmann::json;
namespace fs = std::filesystem;

SourceIndex build_source_index(const PoolSource& pool) {
  SourceIndex idx;
  pool.for_each([&](const Sample& s) {
    if (s.source) idx.emplace(s.id, *s.source);
  });
  return idx;
}

double entropy_from_counts(std::span<const std::size_t> counts) {
  std::size_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) return 0.0;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h;
}

namespace {

std::map<std::string, std::size_t> count_sources(std::span<const std::string> selected,
                                                 const SourceIndex& sources) {
  std::map<std::string, std::size_t> counts;
  for (const auto& id : selected) {
    auto it = sources.find(id);
    ++counts[it == sources.end() ? std::string("(untagged)") : it->second];
  }
  return counts;
}

}  // namespace

std::optional<double> source_entropy(std::span<const std::string> selected,
                                     const SourceIndex& sources) {
  if (sources.empty()) return std::nullopt;
  std::vector<std::size_t> counts;
  for (const auto& [_, c] : count_sources(selected, sources)) counts.push_back(c);
  return entropy_from_counts(counts);
}

Histogram make_histogram(std::span<const double> values, double lo, double hi, std::size_t bins) {
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(bins, 0);
  if (bins == 0) return h;
  const double width = hi - lo;
  for (double v : values) {
    std::size_t b = 0;
    if (width > 0.0) {
      const double pos = (v - lo) / width * static_cast<double>(bins);
      b = pos <= 0.0 ? 0 : std::min(bins - 1, static_cast<std::size_t>(pos));
    }
    ++h.counts[b];
  }
  return h;
}

std::array<std::size_t, 10> decile_counts(std::span<const ScoredSample> candidates,
                                          std::span<const std::string> selected) {
  std::array<std::size_t, 10> out{};
  if (candidates.empty()) return out;
  const auto sorted = sort_scored({candidates.begin(), candidates.end()});
  std::unordered_map<std::string_view, std::size_t> rank;
  rank.reserve(sorted.size());
  for (std::size_t r = 0; r < sorted.size(); ++r) rank.emplace(sorted[r].id, r);
  for (const auto& id : selected) {
    auto it = rank.find(id);
    if (it == rank.end()) continue;
    ++out[it->second * 10 / sorted.size()];
  }
  return out;
}

DiversityReport diversity_report(std::span<const ScoredSample> candidates,
                                 const SelectionResult& selection, const SourceIndex& sources) {
  DiversityReport r;
  r.per_source = count_sources(selection.selected_ids, sources);
  r.source_entropy = source_entropy(selection.selected_ids, sources);
  if (!sources.empty()) {
    std::set<std::string_view> all;
    for (const auto& [_, src] : sources) all.insert(src);
    std::size_t hit = 0;
    for (const auto& [src, _] : r.per_source) hit += all.contains(src) ? 1 : 0;
    r.coverage = static_cast<double>(hit) / static_cast<double>(all.size());
  }

  std::unordered_map<std::string_view, double> score_of;
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    score_of.emplace(candidates[i].id, candidates[i].score);
    lo = i == 0 ? candidates[i].score : std::min(lo, candidates[i].score);
    hi = i == 0 ? candidates[i].score : std::max(hi, candidates[i].score);
  }
  std::vector<double> sel_scores;
  for (const auto& id : selection.selected_ids) {
    auto it = score_of.find(id);
    if (it != score_of.end()) sel_scores.push_back(it->second);
  }
  r.histogram = make_histogram(sel_scores, lo, hi);
  r.per_group = selection.per_group;
  r.deciles = decile_counts(candidates, selection.selected_ids);
  return r;
}

json to_json(const DiversityReport& r) {
  json groups = json::array();
  for (const auto& g : r.per_group) {
    groups.push_back({{"group", g.group}, {"size", g.size}, {"quota", g.quota},
                      {"drawn", g.drawn.size()}});
  }
  return {
      {"per_source", r.per_source},
      {"source_entropy", r.source_entropy ? json(*r.source_entropy) : json(nullptr)},
      {"source_tags", r.source_entropy.has_value()},
      {"coverage", r.coverage ? json(*r.coverage) : json(nullptr)},
      {"histogram", {{"lo", r.histogram.lo}, {"hi", r.histogram.hi}, {"counts", r.histogram.counts}}},
      {"deciles", r.deciles},
      {"per_group", std::move(groups)},
  };
}

Exemplars exemplars(std::span<const ScoredSample> scored, std::size_t n_top, std::size_t n_bottom) {
  Exemplars ex;
  const auto desc = sort_scored({scored.begin(), scored.end()});
  std::vector<ScoredSample> asc(scored.begin(), scored.end());
  std::sort(asc.begin(), asc.end(), [](const ScoredSample& a, const ScoredSample& b) {
    return a.score != b.score ? a.score < b.score : a.id < b.id;
  });
  const std::size_t n = scored.size();
  if (n_top + n_bottom > n) ex.truncated = true;
  const std::size_t top = std::min(n_top, n);
  const std::size_t bottom = std::min(n_bottom, n - top);
  ex.top.assign(desc.begin(), desc.begin() + static_cast<std::ptrdiff_t>(top));
  ex.bottom.assign(asc.begin(), asc.begin() + static_cast<std::ptrdiff_t>(bottom));
  return ex;
}

std::string render_exemplars_markdown(const Exemplars& ex,
                                      const std::unordered_map<std::string, Sample>& samples) {
  std::ostringstream out;
  auto section = [&](const char* title, const std::vector<ScoredSample>& list) {
    out << "## " << title << "\n\n";
    for (const auto& s : list) {
      out << "### " << s.id << " (score " << format_double(s.score) << ", " << s.num_tokens
          << " tokens)\n\n";
      auto it = samples.find(s.id);
      if (it == samples.end()) continue;
      if (it->second.image) out << "image: `" << *it->second.image << "`\n\n";
      for (const auto& t : it->second.conversations) {
        out << "**" << (t.role == Role::human ? "human" : "gpt") << ":** " << t.value << "\n\n";
      }
    }
  };
  out << "# Necessity exemplars\n\n";
  if (ex.truncated) out << "_Requested more exemplars than scored samples; lists truncated._\n\n";
  section("Highest necessity", ex.top);
  section("Lowest necessity", ex.bottom);
  return out.str();
}

StrategyMetrics evaluate_selection(std::span<const ScoredSample> candidates,
                                   std::span<const std::string> selected,
                                   const SourceIndex& sources) {
  StrategyMetrics m;
  m.selected = selected.size();
  m.source_entropy = source_entropy(selected, sources);

  std::unordered_map<std::string_view, double> score_of;
  for (const auto& c : candidates) score_of.emplace(c.id, c.score);
  std::vector<double> s;
  for (const auto& id : selected) {
    auto it = score_of.find(id);
    if (it != score_of.end()) s.push_back(it->second);
  }
  if (!s.empty()) {
    double sum = 0.0;
    for (double x : s) sum += x;
    m.mean_score = sum / static_cast<double>(s.size());
    std::sort(s.begin(), s.end());
    const std::size_t mid = s.size() / 2;
    m.median_score = s.size() % 2 ? s[mid] : 0.5 * (s[mid - 1] + s[mid]);
  }
  const auto dec = decile_counts(candidates, selected);
  m.decile_occupancy =
      static_cast<std::size_t>(std::count_if(dec.begin(), dec.end(), [](auto c) { return c > 0; }));
  return m;
}

std::vector<ComparisonRow> run_grid(const PoolSource& pool, std::span<const SelectionConfig> grid,
                                    const ScorerSpec& spec, unsigned jobs) {
  const SourceIndex sources = build_source_index(pool);
  const std::size_t pool_size = pool.count();

  struct Cached {
    SelectionConfig key;
    std::vector<ScoredSample> candidates;
  };
  std::vector<Cached> cache;
  auto same_stage1 = [](const SelectionConfig& a, const SelectionConfig& b) {
    return a.n1 == b.n1 && a.rng_seed == b.rng_seed && a.orientation == b.orientation &&
           a.length_norm == b.length_norm;
  };

  std::vector<ComparisonRow> rows;
  for (const auto& cfg : grid) {
    ComparisonRow row;
    row.config = cfg;
    try {
      auto it = std::find_if(cache.begin(), cache.end(),
                             [&](const Cached& c) { return same_stage1(c.key, cfg); });
      if (it == cache.end()) {
        auto s1 = run_stage1(pool, cfg, spec);
        cache.push_back({cfg, score_candidates(pool, s1.seed_ids, s1, cfg, jobs)});
        it = cache.end() - 1;
      } else {
        validate_config(cfg, pool_size);
      }
      const auto sel = select(it->candidates, cfg, jobs);
      row.metrics = evaluate_selection(it->candidates, sel.selected_ids, sources);
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ComparisonRow> compare_strategies(const PoolSource& pool, const SelectionConfig& base,
                                              const ScorerSpec& spec, unsigned jobs) {
  std::vector<SelectionConfig> grid;
  for (auto s : {Strategy::nbgs, Strategy::random, Strategy::top, Strategy::bottom}) {
    SelectionConfig c = base;
    c.strategy = s;
    grid.push_back(c);
  }
  return run_grid(pool, grid, spec, jobs);
}

std::vector<SelectionConfig> parse_grid(std::string_view text, const SelectionConfig& base) {
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  std::size_t line_no = 0;
  auto trim = [](std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return std::string_view{};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(ConfigFault::bad_value,
                        "grid line " + std::to_string(line_no) + ": expected 'key = v1, v2'");
    }
    std::pair<std::string, std::vector<std::string>> axis{std::string(trim(line.substr(0, eq))), {}};
    std::string_view rest = line.substr(eq + 1);
    while (true) {
      const auto comma = rest.find(',');
      const auto v = trim(rest.substr(0, comma));
      if (v.empty()) {
        throw ConfigError(ConfigFault::bad_value,
                          "grid line " + std::to_string(line_no) + ": empty value");
      }
      SelectionConfig probe = base;
      set_config_field(probe, axis.first, v);  // validates key and value early
      axis.second.emplace_back(v);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    axes.push_back(std::move(axis));
  }

  std::vector<SelectionConfig> out{base};
  for (const auto& [key, values] : axes) {
    std::vector<SelectionConfig> next;
    for (const auto& cfg : out) {
      for (const auto& v : values) {
        SelectionConfig c = cfg;
        set_config_field(c, key, v);
        next.push_back(c);
      }
    }
    out = std::move(next);
  }
  return out;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string comparison_csv(std::span<const ComparisonRow> rows) {
  std::ostringstream out;
  out << "row,strategy,n1,n2,k,tau,orientation,rng_seed,length_norm,selected,source_entropy,"
         "mean_score,median_score,decile_occupancy,error\r\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto& c = r.config;
    out << i << ',' << to_string(c.strategy) << ',' << c.n1 << ',' << c.n2 << ',' << c.k << ','
        << format_double(c.tau) << ',' << to_string(c.orientation) << ',' << c.rng_seed << ','
        << (c.length_norm ? "true" : "false") << ',';
    if (r.metrics) {
      const auto& m = *r.metrics;
      out << m.selected << ','
          << (m.source_entropy ? format_double(*m.source_entropy) : std::string()) << ','
          << format_double(m.mean_score) << ',' << format_double(m.median_score) << ','
          << m.decile_occupancy << ',';
    } else {
      out << ",,,,,";
    }
    out << csv_escape(r.error) << "\r\n";
  }
  return out.str();
}

json comparison_json(std::span<const ComparisonRow> rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json j = {{"config", config_to_json(r.config)}};
    if (r.metrics) {
      const auto& m = *r.metrics;
      j["metrics"] = {
          {"selected", m.selected},
          {"source_entropy", m.source_entropy ? json(*m.source_entropy) : json(nullptr)},
          {"mean_score", m.mean_score},
          {"median_score", m.median_score},
          {"decile_occupancy", m.decile_occupancy},
      };
    } else {
      j["error"] = r.error;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

void write_run_report(const PoolSource& pool, const fs::path& run_dir, std::size_t n_exemplars) {
  const RunPaths paths(run_dir);
  const json manifest = load_manifest(paths.manifest);
  const auto stage = parse_stage(manifest.at("stage").get<std::string>());
  if (!stage || *stage < Stage::selected) {
    throw DataError("run in " + run_dir.string() + " has not reached the selected stage");
  }
  const SelectionConfig cfg = config_from_json(manifest.at("config"));
  const auto candidates =
      load_scores(paths.scores, ScoreFileHeader{cfg.orientation, "", cfg.length_norm}).rows;
  const auto selection = selection_from_json(read_json_file(paths.selection));
  const SourceIndex sources = build_source_index(pool);

  const auto report = diversity_report(candidates, selection, sources);
  json j = to_json(report);
  j["manifest_sha256"] = manifest.at("manifest_sha256");
  j["strategy"] = std::string(to_string(selection.strategy));
  write_json_file(run_dir / "report.json", j);

  std::ostringstream groups;
  groups << "group,size,quota,drawn\r\n";
  for (const auto& g : report.per_group) {
    groups << g.group << ',' << g.size << ',' << g.quota << ',' << g.drawn.size() << "\r\n";
  }
  write_text_file(run_dir / "groups.csv", groups.str());

  const auto ex = exemplars(candidates, n_exemplars, n_exemplars);
  std::unordered_set<std::string> wanted;
  for (const auto& s : ex.top) wanted.insert(s.id);
  for (const auto& s : ex.bottom) wanted.insert(s.id);
  std::unordered_map<std::string, Sample> texts;
  pool.for_each([&](const Sample& s) {
    if (wanted.contains(s.id)) texts.emplace(s.id, s);
  });
  write_text_file(run_dir / "exemplars.md", render_exemplars_markdown(ex, texts));
}

}  // namespace necsel
