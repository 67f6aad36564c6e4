#include "necsel/sample.hpp"

#include <json.hpp>

#include "necsel/error.hpp"

namespace necsel {

using nlohmann::json;

std::optional<std::string> check_sample(const Sample& s) {
  if (s.id.empty()) return "empty id";
  if (s.id.find_first_of("\r\n") != std::string::npos) return "id contains a line break";
  if (s.conversations.empty()) return "empty conversations";
  for (std::size_t i = 0; i < s.conversations.size(); ++i) {
    const Turn& t = s.conversations[i];
    const Role expected = (i % 2 == 0) ? Role::human : Role::gpt;
    if (t.role != expected) {
      return i == 0 ? std::string("first turn must be from 'human'")
                    : "turn " + std::to_string(i) + " breaks human/gpt alternation";
    }
    if (t.value.empty()) return "turn " + std::to_string(i) + " has an empty value";
  }
  return std::nullopt;
}

bool is_valid_utf8(std::string_view bytes) noexcept {
  std::size_t i = 0;
  const std::size_t n = bytes.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(bytes[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t j = 1; j < len; ++j) {
      const auto cc = static_cast<unsigned char>(bytes[i + j]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // overlong forms, surrogates, out of range
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

namespace {

std::optional<std::string> optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

Sample parse_sample_json(std::string_view line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw DataError("record is not a JSON object");

  Sample s;
  auto id = obj.find("id");
  if (id == obj.end()) throw DataError("missing 'id'");
  if (id->is_string()) {
    s.id = id->get<std::string>();
  } else if (id->is_number_integer()) {
    // Some public pools use numeric ids; they are normalized to text.
    s.id = id->dump();
  } else {
    throw DataError("'id' must be a string");
  }
  s.image = optional_string(obj, "image");
  s.source = optional_string(obj, "source");

  auto conv = obj.find("conversations");
  if (conv == obj.end() || !conv->is_array()) throw DataError("missing 'conversations' array");
  s.conversations.reserve(conv->size());
  for (const auto& t : *conv) {
    if (!t.is_object()) throw DataError("conversation turn is not an object");
    auto from = t.find("from");
    auto value = t.find("value");
    if (from == t.end() || !from->is_string()) throw DataError("turn missing 'from'");
    if (value == t.end() || !value->is_string()) throw DataError("turn missing 'value'");
    Turn turn;
    const auto& role = from->get_ref<const std::string&>();
    if (role == "human") {
      turn.role = Role::human;
    } else if (role == "gpt") {
      turn.role = Role::gpt;
    } else {
      throw DataError("unknown turn role '" + role + "'");
    }
    turn.value = value->get<std::string>();
    s.conversations.push_back(std::move(turn));
  }

  if (auto problem = check_sample(s)) throw DataError(*problem);
  return s;
}

std::string to_canonical_json(const Sample& s) {
  json obj = json::object();
  obj["id"] = s.id;
  if (s.image) obj["image"] = *s.image;
  if (s.source) obj["source"] = *s.source;
  json conv = json::array();
  for (const auto& t : s.conversations) {
    conv.push_back({{"from", t.role == Role::human ? "human" : "gpt"}, {"value", t.value}});
  }
  obj["conversations"] = std::move(conv);
  // nlohmann::json objects are key-sorted, so dump() is canonical.
  return obj.dump();
}

}  // namespace necsel
