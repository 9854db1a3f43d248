#include "kinemesh/skeleton/serialization.h"

#include "kinemesh/common/error.h"

#include <fmt/format.h>
#include <spdlog/spdlog.h>


namespace kinemesh {

namespace {

Eigen::Vector3d vec3(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw FormatError("expected a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json vec3Json(const Eigen::Vector3d& v) {
  return nlohmann::json::array({v.x(), v.y(), v.z()});
}

} // namespace

nlohmann::json skeletonToJson(const Skeleton& skeleton) {
  nlohmann::json joints = nlohmann::json::array();
  for (const auto& p : skeleton.joints()) {
    joints.push_back(vec3Json(p));
  }
  nlohmann::json j;
  j["joints"] = std::move(joints);
  j["parents"] = skeleton.parents();
  j["names"] = skeleton.names();
  return j;
}

Skeleton skeletonFromJson(const nlohmann::json& j) {
  try {
    std::vector<Eigen::Vector3d> joints;
    for (const auto& p : j.at("joints")) {
      joints.push_back(vec3(p));
    }
    auto parents = j.at("parents").get<std::vector<int>>();
    std::vector<std::string> names;
    if (j.contains("names") && !j["names"].is_null()) {
      names = j["names"].get<std::vector<std::string>>();
    }
    return Skeleton(std::move(joints), std::move(parents), std::move(names));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("malformed skeleton document: {}", e.what()));
  }
}

nlohmann::json frameToJson(const MotionFrame& frame) {
  const auto& q = frame.root.rotation;
  const auto& t = frame.root.translation;
  nlohmann::json angles = nlohmann::json::array();
  for (const auto& a : frame.angles) {
    angles.push_back(vec3Json(a));
  }
  nlohmann::json j;
  j["root"] = {q.w(), q.x(), q.y(), q.z(), t.x(), t.y(), t.z()};
  j["angles"] = std::move(angles);
  j["bone_scales"] = frame.boneScales;
  return j;
}

MotionFrame frameFromJson(const nlohmann::json& j) {
  try {
    MotionFrame frame;
    const auto root = j.at("root").get<std::vector<double>>();
    if (root.size() != 7) {
      throw FormatError("root must be [qw,qx,qy,qz,tx,ty,tz]");
    }
    frame.root.rotation = Eigen::Quaterniond(root[0], root[1], root[2], root[3]);
    frame.root.translation = {root[4], root[5], root[6]};
    if (!frame.root.isNormalized()) {
      spdlog::warn("root quaternion with norm {}; normalizing", frame.root.rotation.norm());
      frame.root.rotation.normalize();
    }
    for (const auto& a : j.at("angles")) {
      frame.angles.push_back(vec3(a));
    }
    frame.boneScales = j.at("bone_scales").get<std::vector<double>>();
    return frame;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("malformed motion frame: {}", e.what()));
  }
}

nlohmann::json clipToJson(const MotionClip& clip) {
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : clip.frames) {
    frames.push_back(frameToJson(f));
  }
  nlohmann::json j;
  j["fps"] = clip.fps ? nlohmann::json(*clip.fps) : nlohmann::json(nullptr);
  j["frames"] = std::move(frames);
  return j;
}

MotionClip clipFromJson(const nlohmann::json& j) {
  try {
    MotionClip clip;
    if (j.contains("fps") && !j["fps"].is_null()) {
      clip.fps = j["fps"].get<double>();
    }
    for (const auto& f : j.at("frames")) {
      clip.frames.push_back(frameFromJson(f));
    }
    if (!clip.frames.empty()) {
      const size_t bones = clip.frames.front().boneCount();
      for (size_t t = 0; t < clip.frames.size(); ++t) {
        if (clip.frames[t].boneCount() != bones) {
          throw FormatError(fmt::format(
              "frame {} has {} bones, frame 0 has {}", t, clip.frames[t].boneCount(), bones));
        }
      }
    }
    return clip;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("malformed motion clip: {}", e.what()));
  }
}

Skeleton loadSkeleton(const std::filesystem::path& path) {
  return skeletonFromJson(readJsonFile(path));
}

MotionClip loadClip(const std::filesystem::path& path) {
  return clipFromJson(readJsonFile(path));
}

} // namespace kinemesh
