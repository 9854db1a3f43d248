#pragma once

#include "kinemesh/skeleton/skeleton.h"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace kinemesh {

// Pairs (reference joint, target joint). Target joints without a pair stay at rest.
class JointCorrespondence {
 public:
  JointCorrespondence() = default;
  explicit JointCorrespondence(std::vector<std::pair<int, int>> pairs);

  // Maps every joint of an n-joint skeleton onto itself.
  static JointCorrespondence identity(size_t jointCount);

  const std::vector<std::pair<int, int>>& pairs() const {
    return pairs_;
  }

  // Problems that make the mapping unusable between the two skeletons, one message each:
  // out-of-range indices, a joint used twice on either side, a root paired with a non-root,
  // and broken chains (r -> t with parent(r) -> p but parent(t) != p). Empty when valid.
  std::vector<std::string> diagnostics(const Skeleton& reference, const Skeleton& target) const;

  // Throws CorrespondenceError listing every diagnostic.
  void validate(const Skeleton& reference, const Skeleton& target) const;

  // Reference joint for every target joint, or -1 when unmapped. Assumes a valid mapping.
  std::vector<int> referenceForTarget(size_t targetJointCount) const;

 private:
  std::vector<std::pair<int, int>> pairs_;
};

// {"pairs": [[ref, tgt], ...]}. Throws FormatError on malformed JSON.
JointCorrespondence correspondenceFromJson(const nlohmann::json& j);
nlohmann::json correspondenceToJson(const JointCorrespondence& correspondence);
JointCorrespondence loadCorrespondence(const std::filesystem::path& path);

} // namespace kinemesh
