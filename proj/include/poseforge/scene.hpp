#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "poseforge/geometry.hpp"
#include "poseforge/image.hpp"

namespace poseforge {

struct MeshAsset {
  std::string id;
  std::string name;
  std::vector<Vec3> vertices;  // model frame, mm
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::filesystem::path source;     // empty for meshes built in memory
  double source_scale = 1.0;        // factor applied to `source` on load
  std::optional<Vec3> spacing_hint;  // per-axis spacing read from file metadata

  /// ParseError on out-of-range indices, non-finite vertices or no triangles.
  void validate() const;
  /// Mean of the vertices.
  Vec3 centroid() const;
};

using MeshPtr = std::shared_ptr<const MeshAsset>;

struct SceneObject {
  std::string id;
  MeshPtr mesh;
  RigidTransform pose;  // model → original camera
  Rgb color;
  double opacity = 1.0;
  bool visible = true;
  bool mirror_x = false;
  bool mirror_y = false;
  Vec3 spacing{1.0, 1.0, 1.0};
};

/// pose · mirror · diag(spacing). Mirrors reflect about the planes through the
/// (spaced) model centroid. With default display attributes this is exactly
/// pose.matrix().
Mat4 effective_model_transform(const SceneObject& obj);

enum class CameraSelect { Original, Scene };
enum class StandardView { Front, Back, Left, Right, Top, Bottom, ResetToOriginal };

CameraSelect parse_camera(std::string_view text);
std::string_view to_string(CameraSelect camera);
StandardView parse_standard_view(std::string_view text);
std::string_view to_string(StandardView view);

struct DisplayUpdate {
  std::optional<bool> visible;
  std::optional<double> opacity;
  std::optional<Rgb> color;
  std::optional<bool> mirror_x;
  std::optional<bool> mirror_y;
  std::optional<Vec3> spacing;
};

/// Twelve maximally distinct colours handed out round-robin.
const std::array<Rgb, 12>& object_palette();

class Scene {
 public:
  Scene(const CameraIntrinsics& intrinsics, RgbImage background, std::string background_path = {});

  const CameraIntrinsics& intrinsics() const { return intrinsics_; }
  const RgbImage& background() const { return background_; }
  const std::string& background_path() const { return background_path_; }
  const std::vector<SceneObject>& objects() const { return objects_; }

  const SceneObject& object(const std::string& id) const;
  std::size_t index_of(const std::string& id) const;
  bool contains(const std::string& id) const;

  /// Appends `mesh` at the identity pose. The object id is the mesh id.
  std::string add_object(MeshPtr mesh);
  void remove_object(const std::string& id);

  const RigidTransform& pose(const std::string& id) const { return object(id).pose; }
  void set_pose(const std::string& id, const RigidTransform& pose);
  /// Validates the 4×4 first; InvalidRotation for reflections or shear.
  void set_pose(const std::string& id, const Mat4& pose);
  /// All-or-nothing: OutOfRange leaves the object untouched.
  void set_display(const std::string& id, const DisplayUpdate& update);

  /// Maps the original-camera frame into the free navigation camera.
  const RigidTransform& scene_camera() const { return scene_camera_; }
  void set_scene_camera(const RigidTransform& camera) { scene_camera_ = camera; }
  RigidTransform camera_transform(CameraSelect camera) const;
  void set_standard_view(StandardView view);

  /// Front-most visible object whose surface covers `pixel`, using the same
  /// coverage rule as the rasterizer.
  std::optional<std::string> pick_object(PixelCoord pixel, CameraSelect camera) const;

  /// Axis-aligned bounds of all visible geometry in the original-camera frame.
  std::optional<std::pair<Vec3, Vec3>> visible_bounds() const;

 private:
  SceneObject& mutable_object(const std::string& id);

  CameraIntrinsics intrinsics_;
  RgbImage background_;
  std::string background_path_;
  std::vector<SceneObject> objects_;
  RigidTransform scene_camera_;
  std::size_t palette_cursor_ = 0;
};

}  // namespace poseforge
