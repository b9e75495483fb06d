#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "poseforge/geometry.hpp"
#include "poseforge/scene.hpp"

namespace poseforge {

// Mesh loading -------------------------------------------------------------

/// ASCII PLY (vertex x/y/z plus any extra properties, face index lists) or
/// OBJ (v/f records only). Polygons are fan-triangulated. Vertices are scaled
/// by `unit_scale` to reach millimetres.
MeshAsset load_mesh(const std::filesystem::path& path, double unit_scale = 1.0);
MeshAsset parse_ply(std::string_view text, std::string id = "mesh");
MeshAsset parse_obj(std::string_view text, std::string id = "mesh");

// Dataset samples ----------------------------------------------------------
//
//   root/samples/<id>/image.png
//   root/samples/<id>/camera.txt        fx fy cx cy width height [\n unit_scale]
//   root/samples/<id>/objects/<name>.ply|.obj
//   root/samples/<id>/gt/<name>.txt     optional, pose text

struct SampleObject {
  std::string name;
  std::filesystem::path mesh_path;
  std::optional<RigidTransform> ground_truth;
};

struct DatasetSample {
  std::string id;
  std::filesystem::path image_path;
  CameraIntrinsics intrinsics;
  double unit_scale = 1.0;
  std::vector<SampleObject> objects;  // sorted by name
};

struct CameraFile {
  CameraIntrinsics intrinsics;
  double unit_scale = 1.0;
};

CameraFile parse_camera_file(std::string_view text);
std::string format_camera_file(const CameraFile& camera);

/// Sample ids under root/samples, sorted.
std::vector<std::string> list_samples(const std::filesystem::path& root);
DatasetSample load_sample(const std::filesystem::path& root, const std::string& sample_id);
/// Loads the background and meshes of `sample` into a fresh scene, all poses
/// at identity.
Scene scene_from_sample(const DatasetSample& sample);
/// Ground-truth poses of every object that has one, keyed by object name.
std::map<std::string, RigidTransform> ground_truth_poses(const DatasetSample& sample);

// Pose text ----------------------------------------------------------------

/// Four lines of four space-separated values; at most 8 decimals, trailing
/// zeros trimmed, dot decimal separator regardless of locale.
std::string export_pose(const RigidTransform& pose);
/// Inverse of export_pose. The rotation block is re-orthonormalized.
/// ParseError for malformed text, InvalidRotation for reflections or
/// matrices far from orthonormal.
RigidTransform import_pose(std::string_view text);
std::string format_decimal(double value);

// Workspace ----------------------------------------------------------------

inline constexpr int kWorkspaceVersion = 1;

/// Key-ordered JSON document. Mesh paths are stored as given; meshes without
/// a source path are embedded inline.
std::string serialize_workspace(const Scene& scene);
/// Relative paths resolve against `base_dir`.
Scene deserialize_workspace(std::string_view text, const std::filesystem::path& base_dir);
void save_workspace(const Scene& scene, const std::filesystem::path& path);
Scene load_workspace(const std::filesystem::path& path);

}  // namespace poseforge
