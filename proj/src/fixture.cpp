#include <array>
#include <cstdio>
#include <string_view>

#include "necsel/error.hpp"
#include "necsel/ingest.hpp"
#include "necsel/rng.hpp"

namespace necsel {
namespace {

constexpr std::array<std::string_view, 64> kWords = {
    "the",    "a",      "image",  "shows",  "man",     "woman",   "dog",     "cat",
    "red",    "blue",   "table",  "on",     "in",      "with",    "is",      "are",
    "there",  "two",    "three",  "street", "car",     "sign",    "green",   "sitting",
    "next",   "to",     "large",  "small",  "white",   "black",   "people",  "holding",
    "chart",  "value",  "year",   "shows",  "percent", "highest", "lowest",  "bar",
    "text",   "reads",  "label",  "region", "left",    "right",   "corner",  "bottom",
    "answer", "option", "because", "which", "number",  "total",   "between", "above",
    "below",  "window", "building", "tree", "sky",     "water",   "field",   "bright",
};

constexpr std::array<std::string_view, 8> kPrompts = {
    "Describe the image in detail.",
    "What is happening in this picture?",
    "Answer the question using the chart.",
    "What does the text in the highlighted region say?",
    "Provide a short caption for the image.",
    "Which option best matches the figure?",
    "Explain the relationship shown in the table.",
    "What objects are visible in the bottom left corner?",
};

std::string random_token(RngStream& rng) {
  const auto len = 3 + rng.below(7);
  std::string tok;
  for (std::uint64_t i = 0; i < len; ++i) tok.push_back(static_cast<char>('a' + rng.below(26)));
  return tok;
}

// `t` in [0, 1] moves a source from a small repetitive vocabulary with short
// responses towards long responses with many random tokens.
std::string make_response(RngStream& rng, double t) {
  const auto vocab = static_cast<std::uint64_t>(6 + t * (kWords.size() - 6));
  const double noise = 0.5 * t;
  const auto min_words = static_cast<std::uint64_t>(5 + 15 * t);
  const auto max_words = static_cast<std::uint64_t>(30 + 50 * t);
  const auto n = min_words + rng.below(max_words - min_words + 1);
  std::string out;
  for (std::uint64_t i = 0; i < n; ++i) {
    if (i) out.push_back(' ');
    if (rng.uniform01() < noise) {
      out += random_token(rng);
    } else {
      out += kWords[rng.below(vocab)];
    }
  }
  out.push_back('.');
  return out;
}

template <class Sink>
void generate_into(std::size_t num_samples, std::size_t num_sources, std::uint64_t rng_seed,
                   Sink&& sink) {
  if (num_sources == 0) throw ConfigError(ConfigFault::bad_value, "num_sources must be >= 1");
  RngStream rng = derive_stream(rng_seed, "fixture", 0);
  for (std::size_t i = 0; i < num_samples; ++i) {
    const std::size_t src = i % num_sources;
    const double t = num_sources == 1 ? 0.0 : static_cast<double>(src) / (num_sources - 1);

    char buf[32];
    Sample s;
    std::snprintf(buf, sizeof buf, "fx-%07zu", i);
    s.id = buf;
    std::snprintf(buf, sizeof buf, "source_%02zu", src);
    s.source = buf;
    if (i % 5 != 4) s.image = "images/" + *s.source + "/" + s.id + ".jpg";

    const auto rounds = rng.uniform01() < 0.25 ? 2 : 1;
    for (int r = 0; r < rounds; ++r) {
      s.conversations.push_back({Role::human, std::string(kPrompts[rng.below(kPrompts.size())])});
      s.conversations.push_back({Role::gpt, make_response(rng, t)});
    }
    sink(std::move(s));
  }
}

}  // namespace

std::vector<Sample> generate_fixture(std::size_t num_samples, std::size_t num_sources,
                                     std::uint64_t rng_seed) {
  std::vector<Sample> out;
  out.reserve(num_samples);
  generate_into(num_samples, num_sources, rng_seed, [&](Sample s) { out.push_back(std::move(s)); });
  return out;
}

std::size_t make_fixture(std::size_t num_samples, std::size_t num_sources, std::uint64_t rng_seed,
                         const std::filesystem::path& path) {
  PoolWriter writer(path);
  generate_into(num_samples, num_sources, rng_seed, [&](const Sample& s) { writer.write(s); });
  writer.close();
  return writer.count();
}

}  // namespace necsel
