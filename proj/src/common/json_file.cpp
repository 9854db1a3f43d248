#include "kinemesh/common/json_file.h"

#include "kinemesh/common/error.h"

#include <fmt/format.h>

#include <fstream>

namespace kinemesh {

nlohmann::json readJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError(fmt::format("cannot open '{}'", path.string()));
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void writeJsonFile(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) {
    throw Error(fmt::format("cannot write '{}'", path.string()));
  }
  out << j.dump(2) << '\n';
}

} // namespace kinemesh
