#include "necsel/ingest.hpp"

#include <json.hpp>

#include "necsel/error.hpp"

namespace necsel {

std::string stats_to_json(const PoolStats& stats) {
  nlohmann::json j = {
      {"total", stats.total},
      {"per_source", stats.per_source},
      {"untagged", stats.untagged},
      {"malformed", stats.malformed},
      {"duplicate_ids", stats.duplicate_ids},
      {"lines", stats.lines},
  };
  return j.dump();
}

PoolReader::PoolReader(std::filesystem::path path, bool strict)
    : path_(std::move(path)), strict_(strict) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path_, ec)) {
    throw DataError("pool file not found: " + path_.string());
  }
  in_.open(path_, std::ios::binary);
  if (!in_) throw DataError("cannot open pool file: " + path_.string());
}

std::optional<Sample> PoolReader::next() {
  while (std::getline(in_, line_)) {
    ++stats_.lines;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();

    auto reject = [&](const std::string& why) {
      if (strict_) {
        throw DataError(path_.string() + ":" + std::to_string(stats_.lines) + ": " + why);
      }
    };

    if (!is_valid_utf8(line_)) {
      reject("non-UTF-8 bytes");
      ++stats_.malformed;
      continue;
    }
    Sample s;
    try {
      if (line_.empty()) throw DataError("empty line");
      s = parse_sample_json(line_);
    } catch (const DataError& e) {
      reject(e.what());
      ++stats_.malformed;
      continue;
    }
    if (!seen_.insert(s.id).second) {
      reject("duplicate id '" + s.id + "'");
      ++stats_.duplicate_ids;
      continue;
    }
    ++stats_.total;
    if (s.source) {
      ++stats_.per_source[*s.source];
    } else {
      ++stats_.untagged;
    }
    return s;
  }
  if (in_.bad()) throw DataError("read error on " + path_.string());
  return std::nullopt;
}

PoolContents read_pool(const std::filesystem::path& path, bool strict) {
  PoolReader reader(path, strict);
  PoolContents out;
  while (auto s = reader.next()) out.samples.push_back(std::move(*s));
  out.stats = reader.stats();
  return out;
}

PoolWriter::PoolWriter(const std::filesystem::path& path) : path_(path) {
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw DataError("cannot write: " + path.string());
}

void PoolWriter::write(const Sample& s) {
  out_ << to_canonical_json(s) << '\n';
  ++count_;
}

void PoolWriter::close() {
  out_.close();
  if (out_.fail()) throw DataError("write failed: " + path_.string());
}

std::size_t write_pool(std::span<const Sample> samples, const std::filesystem::path& path) {
  PoolWriter w(path);
  for (const auto& s : samples) w.write(s);
  w.close();
  return w.count();
}

}  // namespace necsel
