#include "kinemesh/geometry/mesh_io.h"

#include "kinemesh/common/error.h"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string_view>

namespace kinemesh {

namespace {

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> tokens;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) {
      ++i;
    }
    const size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
      ++i;
    }
    if (i > start) {
      tokens.push_back(line.substr(start, i - start));
    }
  }
  return tokens;
}

double parseCoordinate(std::string_view token, size_t lineNumber) {
  // std::from_chars for double is incomplete on some standard libraries; strtod is fine here.
  const std::string text(token);
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) {
    throw FormatError(fmt::format("invalid coordinate '{}'", text), lineNumber);
  }
  return value;
}

int parseIndex(std::string_view token, size_t vertexCount, size_t lineNumber) {
  const auto slash = token.find('/');
  const std::string_view head = token.substr(0, slash);
  long value = 0;
  const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), value);
  if (ec != std::errc() || ptr != head.data() + head.size() || value == 0) {
    throw FormatError(fmt::format("invalid face index '{}'", token), lineNumber);
  }
  if (value < 0) {
    value += static_cast<long>(vertexCount);
    if (value < 0) {
      throw FormatError(fmt::format("relative face index '{}' out of range", token), lineNumber);
    }
    return static_cast<int>(value);
  }
  return static_cast<int>(value - 1);
}

} // namespace

TriMesh readMesh(std::istream& in) {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<size_t> faceLines;

  std::string line;
  size_t lineNumber = 0;
  while (std::getline(in, line)) {
    ++lineNumber;
    const auto tokens = tokenize(line);
    if (tokens.empty()) {
      continue;
    }
    if (tokens[0] == "v") {
      if (tokens.size() < 4) {
        throw FormatError("vertex record needs three coordinates", lineNumber);
      }
      vertices.emplace_back(
          parseCoordinate(tokens[1], lineNumber),
          parseCoordinate(tokens[2], lineNumber),
          parseCoordinate(tokens[3], lineNumber));
    } else if (tokens[0] == "f") {
      if (tokens.size() != 4) {
        throw TopologyError(fmt::format(
            "line {}: face with {} corners; only triangles are supported",
            lineNumber,
            tokens.size() - 1));
      }
      Face face;
      for (int k = 0; k < 3; ++k) {
        face[k] = parseIndex(tokens[k + 1], vertices.size(), lineNumber);
      }
      faces.push_back(face);
      faceLines.push_back(lineNumber);
    }
  }

  if (vertices.empty()) {
    throw FormatError("mesh has no vertices", lineNumber);
  }
  for (size_t f = 0; f < faces.size(); ++f) {
    for (const int v : faces[f]) {
      if (static_cast<size_t>(v) >= vertices.size()) {
        throw FormatError(
            fmt::format("face index {} exceeds vertex count {}", v + 1, vertices.size()),
            faceLines[f]);
      }
    }
    const auto& face = faces[f];
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      throw TopologyError(fmt::format("line {}: degenerate face", faceLines[f]));
    }
  }
  return TriMesh(std::move(vertices), std::move(faces));
}

TriMesh loadMesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError(fmt::format("cannot open mesh file '{}'", path.string()));
  }
  try {
    return readMesh(in);
  } catch (const FormatError& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()), e.line());
  }
}

void writeMesh(std::ostream& out, const TriMesh& mesh) {
  out << std::setprecision(9);
  for (const auto& v : mesh.vertices()) {
    out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  }
  for (const auto& f : mesh.faces()) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

void saveMesh(const std::filesystem::path& path, const TriMesh& mesh) {
  std::ofstream out(path);
  if (!out) {
    throw Error(fmt::format("cannot write mesh file '{}'", path.string()));
  }
  writeMesh(out, mesh);
}

} // namespace kinemesh
