#include "kinemesh/common/json_file.h"
#include "kinemesh/deform/blend_skin.h"
#include "kinemesh/fit/fit_config.h"
#include "kinemesh/fit/synthetic.h"
#include "kinemesh/geometry/mesh_io.h"
#include "kinemesh/retarget/correspondence.h"
#include "kinemesh/retarget/transfer.h"
#include "kinemesh/skeleton/serialization.h"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <numbers>

using namespace kinemesh;
namespace fs = std::filesystem;

// Writes the synthetic limb fixture set: canonical mesh, skeleton, weights, a ground-truth
// clip, the supervision meshes it produces, a stouter retarget target and pipeline configs.
int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic fixture assets"};
  fs::path out = "fixtures/limb";
  size_t frames = 6;
  uint64_t seed = 7;
  app.add_option("--out", out, "Output directory");
  app.add_option("--frames", frames, "Supervision frames");
  app.add_option("--seed", seed, "Clip seed");
  CLI11_PARSE(app, argc, argv);

  LimbShape shape;
  shape.axialSegments = 36;
  shape.radialSegments = 12;
  shape.capRings = 3;
  const Rig rig = makeLimbRig(3, shape);

  MotionClip clip = randomClip(3, frames, seed, 30.0 * std::numbers::pi / 180.0, 0.9, 1.1);
  for (size_t f = 0; f < clip.frames.size(); ++f) {
    clip.frames[f].root.translation = Eigen::Vector3d(0.0, 0.05 * static_cast<double>(f), 0.0);
  }

  fs::create_directories(out);
  saveMesh(out / "canonical.obj", rig.mesh);
  writeJsonFile(out / "skeleton.json", skeletonToJson(rig.skeleton));
  writeJsonFile(out / "weights.json", weightsToJson(rig.weights));
  writeJsonFile(out / "ground_truth_clip.json", clipToJson(clip));
  const fs::path supervision = out / "supervision";
  fs::remove_all(supervision);
  writeFrameSequence(supervision, animate(clip, rig.skeleton, rig.mesh, rig.weights));

  LimbShape stout = shape;
  stout.length = 4.5;
  stout.radiusY = 0.4;
  stout.radiusZ = 0.3;
  stout.capLength = 0.35;
  const Rig target = makeLimbRig(3, stout);
  saveMesh(out / "retarget_mesh.obj", target.mesh);
  writeJsonFile(out / "retarget_skeleton.json", skeletonToJson(target.skeleton));
  writeJsonFile(out / "correspondence.json", correspondenceToJson(JointCorrespondence::identity(4)));

  FitConfig fit;
  fit.seed = seed;
  writeJsonFile(out / "fit.json", fitConfigToJson(fit));
  nlohmann::json fitJson = fitConfigToJson(fit);
  fitJson.erase("seed");
  writeJsonFile(
      out / "pipeline.json",
      {
          {"canonical_mesh", "canonical.obj"},
          {"skeleton", "skeleton.json"},
          {"supervision_dir", "supervision"},
          {"stages", {"skin", "fit", "retarget", "eval"}},
          {"skinning", {{"method", "heat"}}},
          {"fit", fitJson},
          {"retarget",
           {{"target_mesh", "retarget_mesh.obj"},
            {"target_skeleton", "retarget_skeleton.json"},
            {"correspondence", "correspondence.json"}}},
          {"output_dir", "out"},
          {"seed", seed},
      });
  writeJsonFile(
      out / "pipeline_embed.json",
      {
          {"canonical_mesh", "canonical.obj"},
          {"skeleton", "skeleton.json"},
          {"weights", "weights.json"},
          {"supervision_dir", "supervision"},
          {"stages", {"fit", "retarget"}},
          {"fit", fitJson},
          {"retarget", {{"target_mesh", "retarget_mesh.obj"}, {"embed", true}, {"resolution", 48}}},
          {"output_dir", "out_embed"},
          {"seed", seed},
      });
  std::cout << "wrote fixtures to " << out.string() << '\n';
  return 0;
}
