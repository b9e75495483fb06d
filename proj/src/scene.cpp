#include "poseforge/scene.hpp"

#include <algorithm>
#include <limits>

#include "raster_kernel.hpp"

namespace poseforge {

void MeshAsset::validate() const {
  if (vertices.empty() || triangles.empty()) throw Error(ErrorKind::EmptyMesh, "mesh '" + id + "' has no triangles");
  for (const Vec3& v : vertices) {
    if (!v.finite()) throw Error(ErrorKind::ParseError, "mesh '" + id + "' has a non-finite vertex");
  }
  for (const auto& tri : triangles) {
    for (std::uint32_t i : tri) {
      if (i >= vertices.size()) throw Error(ErrorKind::ParseError, "mesh '" + id + "' has an out-of-range index");
    }
  }
}

Vec3 MeshAsset::centroid() const {
  if (vertices.empty()) return {};
  Vec3 sum;
  for (const Vec3& v : vertices) sum = sum + v;
  return (1.0 / static_cast<double>(vertices.size())) * sum;
}

Mat4 effective_model_transform(const SceneObject& obj) {
  if (!obj.mirror_x && !obj.mirror_y && obj.spacing == Vec3{1.0, 1.0, 1.0}) return obj.pose.matrix();
  const Vec3& s = obj.spacing;
  Mat4 model{s.x, 0, 0, 0, 0, s.y, 0, 0, 0, 0, s.z, 0, 0, 0, 0, 1};
  Vec3 c = obj.mesh ? obj.mesh->centroid() : Vec3{};
  Vec3 spaced_center{c.x * s.x, c.y * s.y, c.z * s.z};
  if (obj.mirror_x) model = multiply(mirror_matrix(Axis::X, spaced_center), model);
  if (obj.mirror_y) model = multiply(mirror_matrix(Axis::Y, spaced_center), model);
  return multiply(obj.pose.matrix(), model);
}

CameraSelect parse_camera(std::string_view text) {
  if (text == "original") return CameraSelect::Original;
  if (text == "scene") return CameraSelect::Scene;
  throw Error(ErrorKind::InvalidCommand, "unknown camera '" + std::string(text) + "'");
}

std::string_view to_string(CameraSelect camera) { return camera == CameraSelect::Original ? "original" : "scene"; }

namespace {
constexpr std::pair<StandardView, std::string_view> kViewNames[] = {
    {StandardView::Front, "front"}, {StandardView::Back, "back"},     {StandardView::Left, "left"},
    {StandardView::Right, "right"}, {StandardView::Top, "top"},       {StandardView::Bottom, "bottom"},
    {StandardView::ResetToOriginal, "reset"},
};
}  // namespace

StandardView parse_standard_view(std::string_view text) {
  for (const auto& [view, name] : kViewNames) {
    if (name == text) return view;
  }
  throw Error(ErrorKind::InvalidCommand, "unknown standard view '" + std::string(text) + "'");
}

std::string_view to_string(StandardView view) {
  for (const auto& [v, name] : kViewNames) {
    if (v == view) return name;
  }
  return "reset";
}

const std::array<Rgb, 12>& object_palette() {
  static const std::array<Rgb, 12> palette{{
      {230, 25, 75},
      {60, 180, 75},
      {255, 225, 25},
      {0, 130, 200},
      {245, 130, 48},
      {145, 30, 180},
      {70, 240, 240},
      {240, 50, 230},
      {210, 245, 60},
      {250, 190, 212},
      {0, 128, 128},
      {170, 110, 40},
  }};
  return palette;
}

Scene::Scene(const CameraIntrinsics& intrinsics, RgbImage background, std::string background_path)
    : intrinsics_(intrinsics), background_(std::move(background)), background_path_(std::move(background_path)) {
  intrinsics_.validate();
  if (background_.width != intrinsics_.width || background_.height != intrinsics_.height)
    throw Error(ErrorKind::DimensionMismatch, "background size does not match the intrinsics");
}

std::size_t Scene::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    if (objects_[i].id == id) return i;
  }
  throw Error(ErrorKind::UnknownObject, "no object '" + id + "'");
}

bool Scene::contains(const std::string& id) const {
  return std::any_of(objects_.begin(), objects_.end(), [&](const SceneObject& o) { return o.id == id; });
}

const SceneObject& Scene::object(const std::string& id) const { return objects_[index_of(id)]; }
SceneObject& Scene::mutable_object(const std::string& id) { return objects_[index_of(id)]; }

std::string Scene::add_object(MeshPtr mesh) {
  if (!mesh) throw Error(ErrorKind::EmptyMesh, "null mesh");
  mesh->validate();
  if (contains(mesh->id)) throw Error(ErrorKind::DuplicateId, "object '" + mesh->id + "' already exists");
  SceneObject obj;
  obj.id = mesh->id;
  obj.color = object_palette()[palette_cursor_++ % object_palette().size()];
  if (mesh->spacing_hint) obj.spacing = *mesh->spacing_hint;
  obj.mesh = std::move(mesh);
  objects_.push_back(std::move(obj));
  return objects_.back().id;
}

void Scene::remove_object(const std::string& id) { objects_.erase(objects_.begin() + index_of(id)); }

void Scene::set_pose(const std::string& id, const RigidTransform& pose) {
  if (!is_rotation(pose.rotation.matrix()) || !pose.translation.finite())
    throw Error(ErrorKind::InvalidRotation, "pose is not rigid");
  mutable_object(id).pose = pose;
}

void Scene::set_pose(const std::string& id, const Mat4& pose) {
  SceneObject& obj = mutable_object(id);
  obj.pose = RigidTransform::from_matrix(pose);
}

void Scene::set_display(const std::string& id, const DisplayUpdate& update) {
  SceneObject& obj = mutable_object(id);
  if (update.opacity && !(*update.opacity >= 0.0 && *update.opacity <= 1.0))
    throw Error(ErrorKind::OutOfRange, "opacity must lie in [0, 1]");
  if (update.spacing) {
    const Vec3& s = *update.spacing;
    if (!s.finite() || !(s.x > 0.0 && s.y > 0.0 && s.z > 0.0))
      throw Error(ErrorKind::OutOfRange, "spacing must be positive");
  }
  if (update.visible) obj.visible = *update.visible;
  if (update.opacity) obj.opacity = *update.opacity;
  if (update.color) obj.color = *update.color;
  if (update.mirror_x) obj.mirror_x = *update.mirror_x;
  if (update.mirror_y) obj.mirror_y = *update.mirror_y;
  if (update.spacing) obj.spacing = *update.spacing;
}

RigidTransform Scene::camera_transform(CameraSelect camera) const {
  return camera == CameraSelect::Original ? RigidTransform::identity() : scene_camera_;
}

std::optional<std::pair<Vec3, Vec3>> Scene::visible_bounds() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Vec3 lo{inf, inf, inf};
  Vec3 hi{-inf, -inf, -inf};
  bool any = false;
  for (const SceneObject& obj : objects_) {
    if (!obj.visible) continue;
    Mat4 m = effective_model_transform(obj);
    for (const Vec3& v : obj.mesh->vertices) {
      Vec3 p = transform_point(m, v);
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
      any = true;
    }
  }
  if (!any) return std::nullopt;
  return std::make_pair(lo, hi);
}

namespace {

// Extrinsic for a camera at `eye` looking along `forward` with image-up along
// `up`.
RigidTransform look_along(const Vec3& eye, const Vec3& forward, const Vec3& up) {
  Vec3 z = (1.0 / forward.norm()) * forward;
  Vec3 y = -(up - dot(up, z) * z);
  y = (1.0 / y.norm()) * y;
  Vec3 x = cross(y, z);
  Rotation r = Rotation::orthonormalized(Mat3{x.x, x.y, x.z, y.x, y.y, y.z, z.x, z.y, z.z});
  return {r, -r.apply(eye)};
}

}  // namespace

void Scene::set_standard_view(StandardView view) {
  if (view == StandardView::ResetToOriginal) {
    scene_camera_ = RigidTransform::identity();
    return;
  }
  Vec3 center{0.0, 0.0, 1000.0};
  double radius = 100.0;
  if (auto bounds = visible_bounds()) {
    center = 0.5 * (bounds->first + bounds->second);
    radius = std::max(0.5 * (bounds->second - bounds->first).norm(), 1.0);
  }
  double distance = 1.5 * radius;
  const Vec3 image_up{0.0, -1.0, 0.0};
  const Vec3 away{0.0, 0.0, 1.0};
  Vec3 forward;
  Vec3 up = image_up;
  switch (view) {
    case StandardView::Front: forward = {0, 0, 1}; break;
    case StandardView::Back: forward = {0, 0, -1}; break;
    case StandardView::Left: forward = {1, 0, 0}; break;
    case StandardView::Right: forward = {-1, 0, 0}; break;
    // +Y points down, so a camera above the scene looks along +Y.
    case StandardView::Top:
      forward = {0, 1, 0};
      up = away;
      break;
    case StandardView::Bottom:
      forward = {0, -1, 0};
      up = away;
      break;
    case StandardView::ResetToOriginal: break;
  }
  scene_camera_ = look_along(center - distance * forward, forward, up);
}

std::optional<std::string> Scene::pick_object(PixelCoord pixel, CameraSelect camera) const {
  if (!(pixel.u >= 0.0 && pixel.u < intrinsics_.width && pixel.v >= 0.0 && pixel.v < intrinsics_.height))
    throw Error(ErrorKind::OutOfBounds, "pixel outside the image");
  double best = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> hit;
  std::vector<Vec3> cam;
  for (const detail::DrawItem& item : detail::draw_list(*this, camera)) {
    detail::transform_vertices(item, cam);
    for (const auto& tri : item.mesh->triangles) {
      Vec3 v[3] = {cam[tri[0]], cam[tri[1]], cam[tri[2]]};
      detail::ScreenTriangle st[2];
      int n = detail::setup_triangle(v, item.object, intrinsics_, st, false);
      for (int i = 0; i < n; ++i) {
        double z;
        if (detail::sample(st[i], pixel.u, pixel.v, z) && z < best) {
          best = z;
          hit = static_cast<std::size_t>(item.object);
        }
      }
    }
  }
  if (!hit) return std::nullopt;
  return objects_[*hit].id;
}

}  // namespace poseforge
