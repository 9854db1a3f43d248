#include "kinemesh/retarget/correspondence.h"

#include "kinemesh/common/error.h"
#include "kinemesh/common/json_file.h"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <map>

namespace kinemesh {

JointCorrespondence::JointCorrespondence(std::vector<std::pair<int, int>> pairs) : pairs_(std::move(pairs)) {}

JointCorrespondence JointCorrespondence::identity(size_t jointCount) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(jointCount);
  for (size_t j = 0; j < jointCount; ++j) {
    pairs.emplace_back(static_cast<int>(j), static_cast<int>(j));
  }
  return JointCorrespondence(std::move(pairs));
}

std::vector<std::string> JointCorrespondence::diagnostics(const Skeleton& reference, const Skeleton& target) const {
  std::vector<std::string> problems;
  const int refCount = static_cast<int>(reference.jointCount());
  const int tgtCount = static_cast<int>(target.jointCount());
  std::map<int, int> refToTarget;
  std::map<int, int> targetSeen;
  bool inRange = true;
  for (const auto& [r, t] : pairs_) {
    if (r < 0 || r >= refCount || t < 0 || t >= tgtCount) {
      problems.push_back(fmt::format(
          "pair ({}, {}) is out of range for {} reference and {} target joints", r, t, refCount, tgtCount));
      inRange = false;
      continue;
    }
    if (!refToTarget.emplace(r, t).second) {
      problems.push_back(fmt::format("reference joint {} is mapped more than once", r));
    }
    if (!targetSeen.emplace(t, r).second) {
      problems.push_back(fmt::format("target joint {} is mapped more than once", t));
    }
  }
  if (!inRange || !problems.empty()) {
    return problems;
  }
  for (const auto& [r, t] : pairs_) {
    const bool refRoot = r == reference.root();
    const bool tgtRoot = t == target.root();
    if (refRoot != tgtRoot) {
      problems.push_back(fmt::format(
          "pair ({}, {}) maps a root joint to a non-root joint; roots must map to each other", r, t));
      continue;
    }
    if (refRoot) {
      continue;
    }
    const int refParent = reference.parents()[r];
    const auto mappedParent = refToTarget.find(refParent);
    if (mappedParent != refToTarget.end() && target.parents()[t] != mappedParent->second) {
      problems.push_back(fmt::format(
          "pair ({}, {}) breaks the kinematic chain: reference parent {} maps to {} but target parent is {}",
          r,
          t,
          refParent,
          mappedParent->second,
          target.parents()[t]));
    }
  }
  return problems;
}

void JointCorrespondence::validate(const Skeleton& reference, const Skeleton& target) const {
  const auto problems = diagnostics(reference, target);
  if (!problems.empty()) {
    throw CorrespondenceError(fmt::format("invalid joint correspondence: {}", fmt::join(problems, "; ")));
  }
}

std::vector<int> JointCorrespondence::referenceForTarget(size_t targetJointCount) const {
  std::vector<int> out(targetJointCount, -1);
  for (const auto& [r, t] : pairs_) {
    out[t] = r;
  }
  return out;
}

JointCorrespondence correspondenceFromJson(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("pairs") || !j.at("pairs").is_array()) {
    throw FormatError("correspondence JSON needs a \"pairs\" array");
  }
  std::vector<std::pair<int, int>> pairs;
  for (const auto& p : j.at("pairs")) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
      throw FormatError(fmt::format("correspondence pair {} is not [ref, tgt]", p.dump()));
    }
    pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
  }
  return JointCorrespondence(std::move(pairs));
}

nlohmann::json correspondenceToJson(const JointCorrespondence& correspondence) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [r, t] : correspondence.pairs()) {
    pairs.push_back({r, t});
  }
  return {{"pairs", pairs}};
}

JointCorrespondence loadCorrespondence(const std::filesystem::path& path) {
  return correspondenceFromJson(readJsonFile(path));
}

} // namespace kinemesh
