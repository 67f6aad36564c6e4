#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "necsel/config.hpp"
#include "necsel/nbgs.hpp"

namespace necsel {

nlohmann::json config_to_json(const SelectionConfig& cfg);
SelectionConfig config_from_json(const nlohmann::json& j);

nlohmann::json selection_to_json(const SelectionResult& r);
SelectionResult selection_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes `j.dump(indent)` plus a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j, int indent = 2);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace necsel
