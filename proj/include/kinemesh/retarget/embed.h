#pragma once

#include "kinemesh/geometry/tri_mesh.h"
#include "kinemesh/retarget/interior_field.h"
#include "kinemesh/skeleton/skeleton.h"

namespace kinemesh {

struct EmbedOptions {
  // Squared deviation of each bone length from the reference length times the global scale.
  double proportionWeight = 1.0;
  // 1 - distance-to-surface / deepest distance, per joint.
  double centeringWeight = 0.5;
  // Fraction of samples along a bone that fall outside the interior.
  double exitWeight = 10.0;
  // Squared distance from the joint's aligned reference position, in units of searchRadius voxels.
  double priorWeight = 1.0;
  // Candidate positions of a joint are interior voxels within this many voxels of its
  // aligned reference position.
  int searchRadius = 6;
  // Global scales tried, as fractions of the bounding-box scale ratio.
  double minScaleFraction = 0.7;
  double maxScaleFraction = 1.0;
  int scaleSteps = 13;
};

struct Embedding {
  Skeleton skeleton;
  double cost = 0.0;
  // Target size over reference size used by the winning placement.
  double scale = 1.0;
};

// Places the reference topology inside `field`. The reference joints are first mapped by a
// uniform scale and translation that takes their bounding box onto the bounding box of the
// interior voxels; each scale in the scan then gets an exact minimum of the summed costs
// over all candidate placements (dynamic programming over the tree), and the cheapest scale
// wins. Throws EmbeddingError naming the first joint with no interior candidate.
Embedding embedSkeleton(const Skeleton& reference, const InteriorField& field, const EmbedOptions& options = {});

} // namespace kinemesh
