#include <doctest.h>

#include <set>

#include "poseforge/renderer.hpp"
#include "raycast_oracle.hpp"
#include "support.hpp"

using namespace poseforge;
using namespace testing;

namespace {

Scene empty_scene(int w = 64, int h = 48) { return Scene(small_camera(w, h), gradient_image(w, h)); }

MeshPtr shared(MeshAsset m) { return std::make_shared<MeshAsset>(std::move(m)); }

template <class Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::IoError;
}

}  // namespace

TEST_CASE("add_object starts at identity with a palette colour") {
  Scene scene = empty_scene();
  std::string id = scene.add_object(shared(cube_mesh()));
  CHECK(scene.objects().size() == 1);
  CHECK(scene.pose(id).matrix() == identity4());
  const SceneObject& obj = scene.object(id);
  CHECK(obj.opacity == 1.0);
  CHECK(obj.visible);
  CHECK(obj.spacing == Vec3{1, 1, 1});
  CHECK(kind_of([&] { scene.add_object(shared(cube_mesh())); }) == ErrorKind::DuplicateId);

  Scene eight = empty_scene();
  std::set<std::tuple<int, int, int>> colours;
  for (int i = 0; i < 8; ++i) {
    std::string oid = eight.add_object(shared(cube_mesh(10, "m" + std::to_string(i))));
    Rgb c = eight.object(oid).color;
    colours.emplace(c.r, c.g, c.b);
  }
  CHECK(colours.size() == 8);
}

TEST_CASE("scene construction checks the background size") {
  CHECK(kind_of([] { Scene(small_camera(64, 48), gradient_image(32, 48)); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([] { Scene(CameraIntrinsics{0, 1, 0, 0, 4, 4}, gradient_image(4, 4)); }) == ErrorKind::OutOfRange);
}

TEST_CASE("set_pose and get_pose") {
  Scene scene = empty_scene();
  std::string id = scene.add_object(shared(cube_mesh()));
  Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    RigidTransform p = rng.pose();
    scene.set_pose(id, p);
    CHECK(scene.pose(id).matrix() == p.matrix());
  }
  scene.set_pose(id, RigidTransform::identity());
  CHECK(scene.pose(id).matrix() == identity4());
  Mat4 reflect = identity4();
  reflect[0] = -1;
  CHECK(kind_of([&] { scene.set_pose(id, reflect); }) == ErrorKind::InvalidRotation);
  CHECK(kind_of([&] { scene.set_pose("nope", identity4()); }) == ErrorKind::UnknownObject);
}

TEST_CASE("set_display is atomic") {
  Scene scene = empty_scene();
  std::string id = scene.add_object(shared(cube_mesh()));
  DisplayUpdate u;
  u.opacity = 0.5;
  scene.set_display(id, u);
  CHECK(scene.object(id).opacity == 0.5);

  DisplayUpdate bad;
  bad.visible = false;
  bad.opacity = 1.5;
  CHECK(kind_of([&] { scene.set_display(id, bad); }) == ErrorKind::OutOfRange);
  CHECK(scene.object(id).visible);
  CHECK(scene.object(id).opacity == 0.5);

  DisplayUpdate bad_spacing;
  bad_spacing.spacing = Vec3{1, 0, 1};
  CHECK(kind_of([&] { scene.set_display(id, bad_spacing); }) == ErrorKind::OutOfRange);
  CHECK(kind_of([&] { scene.set_display("nope", u); }) == ErrorKind::UnknownObject);
}

TEST_CASE("object order is stable under display updates") {
  Scene scene = empty_scene();
  for (int i = 0; i < 5; ++i) scene.add_object(shared(cube_mesh(10, "m" + std::to_string(i))));
  DisplayUpdate u;
  u.visible = false;
  scene.set_display("m2", u);
  u.opacity = 0.3;
  scene.set_display("m0", u);
  for (int i = 0; i < 5; ++i) CHECK(scene.objects()[i].id == "m" + std::to_string(i));
  scene.remove_object("m1");
  CHECK(scene.objects()[1].id == "m2");
}

TEST_CASE("effective_model_transform") {
  SceneObject obj;
  obj.mesh = shared(wedge_mesh());
  Rng rng(32);
  obj.pose = rng.pose();
  CHECK(effective_model_transform(obj) == obj.pose.matrix());

  obj.pose = RigidTransform::identity();
  for (const Vec3& v : obj.mesh->vertices) CHECK(transform_point(effective_model_transform(obj), v) == v);

  obj.spacing = {2, 2, 2};
  for (const Vec3& v : obj.mesh->vertices) CHECK(transform_point(effective_model_transform(obj), v) == 2.0 * v);

  obj.spacing = {1, 1, 1};
  obj.mirror_x = true;
  Mat4 once = effective_model_transform(obj);
  Mat4 twice = multiply(once, multiply(invert(obj.pose).matrix(), once));
  for (const Vec3& v : obj.mesh->vertices) CHECK((transform_point(twice, v) - v).norm() < 1e-9);
}

TEST_CASE("spacing (1,1,2) doubles the z extent") {
  Scene scene = empty_scene();
  std::string id = scene.add_object(shared(cube_mesh(40)));
  scene.set_pose(id, RigidTransform{Rotation(), {0, 0, 300}});
  auto before = *scene.visible_bounds();
  DisplayUpdate u;
  u.spacing = Vec3{1, 1, 2};
  scene.set_display(id, u);
  auto after = *scene.visible_bounds();
  CHECK((after.second.z - after.first.z) == doctest::Approx(2 * (before.second.z - before.first.z)));
  CHECK((after.second.x - after.first.x) == doctest::Approx(before.second.x - before.first.x));
}

TEST_CASE("pick_object") {
  Scene scene = empty_scene(64, 64);
  CHECK_FALSE(scene.pick_object({32, 32}, CameraSelect::Original).has_value());
  std::string far = scene.add_object(shared(cube_mesh(80, "far")));
  scene.set_pose(far, RigidTransform{Rotation(), {0, 0, 600}});
  CHECK(scene.pick_object({32, 32}, CameraSelect::Original) == std::optional<std::string>("far"));
  std::string near = scene.add_object(shared(cube_mesh(20, "near")));
  scene.set_pose(near, RigidTransform{Rotation(), {0, 0, 300}});
  CHECK(scene.pick_object({32, 32}, CameraSelect::Original) == std::optional<std::string>("near"));
  CHECK_FALSE(scene.pick_object({0.5, 0.5}, CameraSelect::Original).has_value());
  CHECK(kind_of([&] { scene.pick_object({64, 10}, CameraSelect::Original); }) == ErrorKind::OutOfBounds);
  CHECK(kind_of([&] { scene.pick_object({-0.1, 10}, CameraSelect::Original); }) == ErrorKind::OutOfBounds);
}

TEST_CASE("pick_object agrees with the rasterizer at covered pixels") {
  Rng rng(33);
  for (int s = 0; s < 10; ++s) {
    Scene scene = random_scene(rng, 32, 32);
    for (CameraSelect cam : {CameraSelect::Original, CameraSelect::Scene}) {
      if (cam == CameraSelect::Scene) scene.set_scene_camera({rng.rotation(), {0, 0, 0}});
      OverlayFrame f = rasterize(scene, cam);
      for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
          std::int32_t id = f.mask.index[y * 32 + x];
          if (id == ObjectMask::kNone) continue;
          CHECK(scene.pick_object({x + 0.5, y + 0.5}, cam) == std::optional<std::string>(scene.objects()[id].id));
        }
      }
    }
  }
}

TEST_CASE("standard views") {
  Scene scene = empty_scene();
  std::string id = scene.add_object(shared(cube_mesh(40)));
  scene.set_pose(id, RigidTransform{Rotation(), {10, 20, 500}});
  auto bounds = *scene.visible_bounds();
  Vec3 center = 0.5 * (bounds.first + bounds.second);

  struct Expect {
    StandardView view;
    Vec3 forward;
  };
  // +Y points down: the top view looks downward along +Y.
  for (Expect e : {Expect{StandardView::Front, {0, 0, 1}}, Expect{StandardView::Back, {0, 0, -1}},
                   Expect{StandardView::Left, {1, 0, 0}}, Expect{StandardView::Right, {-1, 0, 0}},
                   Expect{StandardView::Top, {0, 1, 0}}, Expect{StandardView::Bottom, {0, -1, 0}}}) {
    scene.set_standard_view(e.view);
    RigidTransform cam = scene.scene_camera();
    CHECK(is_rotation(cam.rotation.matrix()));
    // The camera's optical axis in scene coordinates is the third row of R.
    Vec3 axis{cam.rotation(2, 0), cam.rotation(2, 1), cam.rotation(2, 2)};
    CHECK((axis - e.forward).norm() < 1e-12);
    Vec3 c = cam.apply(center);
    CHECK(std::abs(c.x) < 1e-9);
    CHECK(std::abs(c.y) < 1e-9);
    CHECK(c.z > 0);
    Mat4 first = cam.matrix();
    scene.set_standard_view(e.view);
    CHECK(scene.scene_camera().matrix() == first);
  }
  scene.set_standard_view(StandardView::ResetToOriginal);
  CHECK(scene.scene_camera().matrix() == identity4());

  Scene none = empty_scene();
  CHECK_NOTHROW(none.set_standard_view(StandardView::Top));
}

TEST_CASE("camera and view names") {
  CHECK(parse_camera("scene") == CameraSelect::Scene);
  CHECK(to_string(CameraSelect::Original) == "original");
  CHECK(parse_standard_view("top") == StandardView::Top);
  CHECK(to_string(StandardView::ResetToOriginal) == "reset");
  CHECK(kind_of([] { parse_camera("side"); }) == ErrorKind::InvalidCommand);
}

TEST_CASE("mesh validation") {
  MeshAsset empty;
  CHECK(kind_of([&] { empty.validate(); }) == ErrorKind::EmptyMesh);
  MeshAsset bad = tetra_mesh();
  bad.triangles.push_back({0, 1, 9});
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::ParseError);
  MeshAsset nan = tetra_mesh();
  nan.vertices[0].x = std::nan("");
  CHECK(kind_of([&] { nan.validate(); }) == ErrorKind::ParseError);
}
