#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>

namespace kinemesh {

// Throws FormatError on unreadable or unparsable files.
nlohmann::json readJsonFile(const std::filesystem::path& path);

// Pretty-printed with sorted keys (nlohmann's default object ordering), newline-terminated.
void writeJsonFile(const std::filesystem::path& path, const nlohmann::json& j);

} // namespace kinemesh
