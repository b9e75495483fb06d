#include <Eigen/Dense>
#include <doctest.h>

#include "poseforge/metrics.hpp"
#include "support.hpp"

using namespace poseforge;
using testing::kPi;
using testing::Rng;

namespace {

Eigen::Matrix4d to_eigen(const Mat4& m) {
  Eigen::Matrix4d e;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) e(r, c) = m[r * 4 + c];
  return e;
}

double max_abs_diff(const Mat4& a, const Mat4& b) {
  double d = 0;
  for (int i = 0; i < 16; ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

RigidTransform rz(double deg) { return {rotation_from_axis_angle({0, 0, 1}, deg * kPi / 180.0), {}}; }

}  // namespace

TEST_CASE("rotation validation rejects reflections and shear") {
  CHECK_THROWS_AS(Rotation::from_matrix(Mat3{-1, 0, 0, 0, 1, 0, 0, 0, 1}), Error);
  CHECK_THROWS_AS(Rotation::from_matrix(Mat3{1, 0.1, 0, 0, 1, 0, 0, 0, 1}), Error);
  try {
    Rotation::from_matrix(Mat3{-1, 0, 0, 0, 1, 0, 0, 0, 1});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidRotation);
  }
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    Rotation r = rng.rotation();
    CHECK(std::abs(determinant(r.matrix()) - 1.0) < 1e-9);
    CHECK(orthonormality_error(r.matrix()) < 1e-9);
  }
}

TEST_CASE("compose") {
  RigidTransform id = RigidTransform::identity();
  CHECK(compose(id, id).matrix() == id.matrix());
  CHECK(max_abs_diff(compose(rz(90), rz(90)).matrix(), rz(180).matrix()) < 1e-9);
  Mat4 expected{-1, 0, 0, 0, 0, -1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
  CHECK(max_abs_diff(compose(rz(90), rz(90)).matrix(), expected) < 1e-9);

  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    RigidTransform a = rng.pose(), b = rng.pose();
    Eigen::Matrix4d oracle = to_eigen(a.matrix()) * to_eigen(b.matrix());
    Mat4 got = compose(a, b).matrix();
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) CHECK(std::abs(got[r * 4 + c] - oracle(r, c)) < 1e-9);
    Vec3 p{rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100)};
    Vec3 lhs = compose(a, b).apply(p), rhs = a.apply(b.apply(p));
    CHECK((lhs - rhs).norm() < 1e-9);
  }
}

TEST_CASE("compose keeps rotations valid under long gesture chains") {
  Rng rng(3);
  RigidTransform acc = RigidTransform::identity();
  for (int i = 0; i < 100000; ++i) {
    acc = compose(acc, {rotation_from_axis_angle(rng.unit_vector(), rng.uniform(-0.1, 0.1)), {}});
  }
  CHECK(is_rotation(acc.rotation.matrix()));
}

TEST_CASE("invert") {
  RigidTransform id = RigidTransform::identity();
  CHECK(invert(id).matrix() == id.matrix());
  RigidTransform t{Rotation(), {1, 2, 3}};
  CHECK(invert(t).translation == Vec3{-1, -2, -3});
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    RigidTransform m = rng.pose();
    CHECK(max_abs_diff(compose(invert(m), m).matrix(), identity4()) < 1e-9);
    CHECK(max_abs_diff(invert(invert(m)).matrix(), m.matrix()) < 1e-9);
    Eigen::Matrix4d oracle = to_eigen(m.matrix()).inverse();
    Mat4 got = invert(m).matrix();
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) CHECK(std::abs(got[r * 4 + c] - oracle(r, c)) < 1e-9);
  }
}

TEST_CASE("world_to_camera") {
  HomogeneousPoint p = HomogeneousPoint::point({1, 2, 3});
  HomogeneousPoint out = world_to_camera(RigidTransform::identity(), p);
  CHECK(out.x == 1);
  CHECK(out.y == 2);
  CHECK(out.z == 3);
  CHECK(out.w == 1);
  out = world_to_camera({Rotation(), {0, 0, 10}}, HomogeneousPoint::point({0, 0, 0}));
  CHECK(out.z == 10);
  CHECK(out.w == 1);

  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    RigidTransform m = rng.pose();
    Vec3 v{rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100)};
    Eigen::Vector4d oracle = to_eigen(m.matrix()) * Eigen::Vector4d(v.x, v.y, v.z, 1.0);
    HomogeneousPoint got = world_to_camera(m, HomogeneousPoint::point(v));
    CHECK(std::abs(got.x - oracle.x()) < 1e-9);
    CHECK(std::abs(got.y - oracle.y()) < 1e-9);
    CHECK(std::abs(got.z - oracle.z()) < 1e-9);
    CHECK(got.w == 1.0);
  }
}

TEST_CASE("project") {
  CameraIntrinsics k{1000, 1000, 320, 240, 640, 480};
  PixelCoord c = project(k, HomogeneousPoint::point({0, 0, 500}));
  CHECK(c.u == 320);
  CHECK(c.v == 240);
  PixelCoord p = project(k, HomogeneousPoint::point({50, 0, 500}));
  CHECK(p.u == 420);
  CHECK(p.v == 240);
  for (double z : {-1.0, 0.0, -1e-300}) {
    try {
      project(k, HomogeneousPoint::point({0, 0, z}));
      FAIL("expected BehindCamera");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::BehindCamera);
    }
  }
  CHECK_NOTHROW(project(k, HomogeneousPoint::point({0, 0, 1e-300})));
}

TEST_CASE("project_world agrees with the two-step chain and with K·M·p") {
  Rng rng(6);
  for (int i = 0; i < 2000; ++i) {
    CameraIntrinsics k{rng.uniform(100, 2000), rng.uniform(100, 2000), 0, 0, 640, 480};
    k.cx = rng.uniform(0, 639);
    k.cy = rng.uniform(0, 479);
    RigidTransform m{rng.rotation(), {rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(400, 900)}};
    HomogeneousPoint p = HomogeneousPoint::point({rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100)});
    PixelCoord a = project_world(k, m, p);
    PixelCoord b = project(k, world_to_camera(m, p));
    CHECK(a.u == b.u);
    CHECK(a.v == b.v);
    Eigen::Vector4d h = to_eigen(k.matrix()) * to_eigen(m.matrix()) * Eigen::Vector4d(p.x, p.y, p.z, 1.0);
    CHECK(std::abs(a.u - h.x() / h.z()) < 1e-9);
    CHECK(std::abs(a.v - h.y() / h.z()) < 1e-9);
  }
}

TEST_CASE("intrinsics validation") {
  CHECK_NOTHROW(CameraIntrinsics{500, 500, 0, 0, 10, 10}.validate());
  CHECK_THROWS_AS(CameraIntrinsics({0, 500, 5, 5, 10, 10}).validate(), Error);
  CHECK_THROWS_AS(CameraIntrinsics({500, -1, 5, 5, 10, 10}).validate(), Error);
  CHECK_THROWS_AS(CameraIntrinsics({500, 500, 10, 5, 10, 10}).validate(), Error);
  CHECK_THROWS_AS(CameraIntrinsics({500, 500, 5, -0.5, 10, 10}).validate(), Error);
  CHECK_THROWS_AS(CameraIntrinsics({500, 500, 5, 5, 0, 10}).validate(), Error);
}

TEST_CASE("rotation_from_axis_angle") {
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    CHECK(rotation_from_axis_angle(rng.unit_vector(), 0.0).matrix() == Rotation().matrix());
  }
  Mat3 half = rotation_from_axis_angle({0, 0, 1}, kPi).matrix();
  Mat3 expected{-1, 0, 0, 0, -1, 0, 0, 0, 1};
  for (int i = 0; i < 9; ++i) CHECK(std::abs(half[i] - expected[i]) < 1e-12);

  // Quaternion exponential oracle.
  Vec3 axis{1, 1, 1};
  Rotation r = rotation_from_axis_angle(axis, 0.7);
  Eigen::Matrix3d oracle = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 1, 1).normalized()).toRotationMatrix();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) CHECK(std::abs(r(a, b) - oracle(a, b)) < 1e-12);
  CHECK(std::abs(angular_distance_rad(Rotation(), r) - 0.7) < 1e-9);

  for (int i = 0; i < 1000; ++i) {
    double theta = rng.uniform(1e-6, kPi - 1e-6);
    Rotation q = rotation_from_axis_angle(rng.unit_vector(), theta);
    CHECK(std::abs(q.trace() - (1 + 2 * std::cos(theta))) < 1e-9);
    CHECK(std::abs(angular_distance_rad(Rotation(), q) - theta) < 1e-9);
  }
  try {
    rotation_from_axis_angle({0, 0, 1e-13}, 1.0);
    FAIL("expected DegenerateAxis");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateAxis);
  }
}

TEST_CASE("trackball_rotate") {
  CameraIntrinsics k{1000, 1000, 320, 240, 640, 480};
  Rng rng(8);
  RigidTransform current{rng.rotation(), {10, -20, 500}};
  Vec3 pivot = current.translation;
  CHECK(trackball_rotate(current, {100, 100}, {100, 100}, pivot, k).matrix() == current.matrix());

  for (int i = 0; i < 100; ++i) {
    RigidTransform pose{rng.rotation(), {rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(300, 800)}};
    Vec3 piv = pose.apply({rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-20, 20)});
    PixelCoord a{rng.uniform(0, 640), rng.uniform(0, 480)}, b{rng.uniform(0, 640), rng.uniform(0, 480)};
    RigidTransform out = trackball_rotate(pose, a, b, piv, k);
    CHECK(is_rotation(out.rotation.matrix()));
    // The pivot point of the model stays put in camera space.
    Vec3 model_point = invert(pose).apply(piv);
    CHECK((out.apply(model_point) - piv).norm() < 1e-9);
    PixelCoord before = project(k, HomogeneousPoint::point(piv));
    PixelCoord after = project(k, HomogeneousPoint::point(out.apply(model_point)));
    CHECK(std::hypot(after.u - before.u, after.v - before.v) < 1e-6);
    // Dragging back restores the pose.
    RigidTransform back = trackball_rotate(out, b, a, piv, k);
    CHECK(max_abs_diff(back.matrix(), pose.matrix()) < 1e-6);
  }

  // Horizontal drag of d px turns by 2π·d/width about the camera y axis.
  RigidTransform id{Rotation(), {0, 0, 500}};
  RigidTransform turned = trackball_rotate(id, {320, 240}, {384, 240}, {0, 0, 500}, k);
  double expected_angle = 2 * kPi * 64 / 640;
  CHECK(std::abs(angular_distance_rad(Rotation(), turned.rotation) - expected_angle) < 1e-9);
  Eigen::Matrix3d oracle = Eigen::AngleAxisd(expected_angle, Eigen::Vector3d(0, -1, 0)).toRotationMatrix();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) CHECK(std::abs(turned.rotation(a, b) - oracle(a, b)) < 1e-9);

  CHECK_THROWS_AS(trackball_rotate(id, {0, 0}, {5, 5}, {0, 0, -5}, k), Error);
}

TEST_CASE("translate_in_view and scroll_depth") {
  CameraIntrinsics k{1000, 1000, 320, 240, 640, 480};
  RigidTransform pose{rotation_from_axis_angle({0, 1, 0}, 0.3), {0, 0, 500}};
  CHECK(translate_in_view(pose, {10, 10}, {10, 10}, k).matrix() == pose.matrix());
  RigidTransform moved = translate_in_view(pose, {100, 100}, {110, 100}, k);
  CHECK(std::abs(moved.translation.x - 5.0) < 1e-12);
  CHECK(moved.translation.y == 0.0);
  CHECK(moved.translation.z == 500.0);
  CHECK(moved.rotation == pose.rotation);

  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    RigidTransform p{rng.rotation(), {rng.uniform(-80, 80), rng.uniform(-60, 60), rng.uniform(200, 900)}};
    Vec3 centroid = p.apply({rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)});
    PixelCoord a{rng.uniform(0, 640), rng.uniform(0, 480)}, b{rng.uniform(0, 640), rng.uniform(0, 480)};
    RigidTransform q = translate_in_view(p, a, b, centroid, k);
    Vec3 model_c = invert(p).apply(centroid);
    PixelCoord before = project(k, HomogeneousPoint::point(centroid));
    Vec3 moved_c = q.apply(model_c);
    PixelCoord after = project(k, HomogeneousPoint::point(moved_c));
    CHECK(std::abs((after.u - before.u) - (b.u - a.u)) < 0.5);
    CHECK(std::abs((after.v - before.v) - (b.v - a.v)) < 0.5);
    CHECK(std::abs(moved_c.z - centroid.z) < 1e-9);
    RigidTransform back = translate_in_view(q, b, a, moved_c, k);
    CHECK(max_abs_diff(back.matrix(), p.matrix()) < 1e-6);

    double notches = rng.uniform(-5, 5);
    RigidTransform d = scroll_depth(p, notches, centroid);
    Vec3 dc = d.apply(model_c);
    CHECK(std::abs(dc.z - centroid.z * std::exp(notches * kDepthStepPerNotch)) < 1e-9);
    PixelCoord da = project(k, HomogeneousPoint::point(dc));
    CHECK(std::hypot(da.u - before.u, da.v - before.v) < 0.5);
  }
  CHECK(scroll_depth(pose, 0.0, {0, 0, 500}).matrix() == pose.matrix());
  CHECK_THROWS_AS(translate_in_view({Rotation(), {0, 0, -10}}, {0, 0}, {4, 0}, k), Error);
}

TEST_CASE("mirror_transform") {
  Mat4 flip = mirror_matrix(Axis::X, {0, 0, 0});
  Vec3 p = transform_point(flip, {1, 0, 0});
  CHECK(p == Vec3{-1, 0, 0});
  Rng rng(10);
  for (int i = 0; i < 100; ++i) {
    RigidTransform m = rng.pose();
    Vec3 c{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
      Mat4 once = mirror_transform(m, a, c);
      Mat4 twice = mirror_transform(once, a, c);
      CHECK(max_abs_diff(twice, m.matrix()) < 1e-9);
      Mat3 r{once[0], once[1], once[2], once[4], once[5], once[6], once[8], once[9], once[10]};
      CHECK(std::abs(determinant(r) + 1.0) < 1e-9);
    }
  }
}

TEST_CASE("rigid transform from 4x4") {
  Mat4 bad = identity4();
  bad[12] = 0.5;
  try {
    RigidTransform::from_matrix(bad);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidRotation);
  }
  Mat4 nan = identity4();
  nan[3] = std::nan("");
  CHECK_THROWS_AS(RigidTransform::from_matrix(nan), Error);
}
