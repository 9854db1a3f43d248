#pragma once

#include "kinemesh/geometry/tri_mesh.h"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace kinemesh {

// Wavefront-style ASCII triangle meshes: `v x y z` and `f i j k` records with 1-based
// (or negative, relative) indices. Texture/normal references after '/' are ignored, as
// are all other record types.
//
// Throws FormatError (with the offending line) on malformed records or an input without
// vertices, and TopologyError on faces with other than three corners.
TriMesh readMesh(std::istream& in);
TriMesh loadMesh(const std::filesystem::path& path);

// Writes vertices with 9 significant digits.
void writeMesh(std::ostream& out, const TriMesh& mesh);
void saveMesh(const std::filesystem::path& path, const TriMesh& mesh);

} // namespace kinemesh
