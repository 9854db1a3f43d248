#pragma once

#include "kinemesh/common/json_file.h"
#include "kinemesh/skeleton/skeleton.h"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace kinemesh {

// Skeleton: {"joints": [[x,y,z]...], "parents": [int...], "names": [...]}
nlohmann::json skeletonToJson(const Skeleton& skeleton);
Skeleton skeletonFromJson(const nlohmann::json& j);

// Clip: {"fps": f, "frames": [{"root": [qw,qx,qy,qz,tx,ty,tz], "angles": [[ax,ay,az]...],
// "bone_scales": [s...]}...]}. "fps" is omitted (or null) when unknown.
nlohmann::json clipToJson(const MotionClip& clip);
MotionClip clipFromJson(const nlohmann::json& j);

nlohmann::json frameToJson(const MotionFrame& frame);
MotionFrame frameFromJson(const nlohmann::json& j);

Skeleton loadSkeleton(const std::filesystem::path& path);
MotionClip loadClip(const std::filesystem::path& path);

} // namespace kinemesh
