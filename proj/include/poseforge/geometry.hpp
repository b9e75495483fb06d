#pragma once

// Pinhole image formation and rigid-body algebra.
//
// Conventions: camera frame is +X right, +Y down, +Z forward; pixel origin is
// the top-left image corner with u rightward and v downward. All lengths are
// millimetres.

#include <array>
#include <cmath>

#include "poseforge/error.hpp"

namespace poseforge {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr Vec3 operator*(const Vec3& a, double s) { return s * a; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// Row-major 3x3 (r1..r9).
using Mat3 = std::array<double, 9>;
/// Row-major 4x4.
using Mat4 = std::array<double, 16>;

constexpr Mat4 identity4() { return {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1}; }
Mat4 multiply(const Mat4& a, const Mat4& b);
Vec3 transform_point(const Mat4& m, const Vec3& p);

/// Largest entry of |RᵀR − I|.
double orthonormality_error(const Mat3& m);
double determinant(const Mat3& m);
/// True when RᵀR = I and det R = +1, both within `tol`.
bool is_rotation(const Mat3& m, double tol = 1e-9);

// A proper rotation. Every constructor path checks the orthonormality
// invariant, so a Rotation in hand is always valid.
class Rotation {
 public:
  Rotation() = default;

  /// Throws InvalidRotation unless `m` is a rotation within 1e-9.
  static Rotation from_matrix(const Mat3& m);
  /// Gram–Schmidt on the rows. Throws InvalidRotation for degenerate or
  /// reflecting input.
  static Rotation orthonormalized(const Mat3& m);

  const Mat3& matrix() const { return m_; }
  double operator()(int row, int col) const { return m_[row * 3 + col]; }
  double trace() const { return m_[0] + m_[4] + m_[8]; }

  Vec3 apply(const Vec3& v) const {
    return {m_[0] * v.x + m_[1] * v.y + m_[2] * v.z, m_[3] * v.x + m_[4] * v.y + m_[5] * v.z,
            m_[6] * v.x + m_[7] * v.y + m_[8] * v.z};
  }
  Rotation transposed() const;

  /// Product, re-orthonormalized once drift passes 1e-12.
  friend Rotation operator*(const Rotation& a, const Rotation& b);
  friend bool operator==(const Rotation&, const Rotation&) = default;

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}
  Mat3 m_{1, 0, 0, 0, 1, 0, 0, 0, 1};
};

/// M = [R|t], world → camera.
struct RigidTransform {
  Rotation rotation;
  Vec3 translation;

  static RigidTransform identity() { return {}; }
  /// Validates the rotation block, finiteness and the [0 0 0 1] bottom row.
  static RigidTransform from_matrix(const Mat4& m);

  Vec3 apply(const Vec3& p) const { return rotation.apply(p) + translation; }
  Mat4 matrix() const;

  friend bool operator==(const RigidTransform&, const RigidTransform&) = default;
};

struct HomogeneousPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double w = 1.0;

  static HomogeneousPoint point(const Vec3& p) { return {p.x, p.y, p.z, 1.0}; }
  static HomogeneousPoint direction(const Vec3& d) { return {d.x, d.y, d.z, 0.0}; }
  Vec3 xyz() const { return {x, y, z}; }
  friend bool operator==(const HomogeneousPoint&, const HomogeneousPoint&) = default;
};

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  static constexpr int kMaxDimension = 16384;

  /// Throws OutOfRange when an invariant fails.
  void validate() const;
  /// The 4×4 embedding of K with a [0 0 0 1] last row.
  Mat4 matrix() const;

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& m);

/// P_c = M·P_w. Expects w = 1.
HomogeneousPoint world_to_camera(const RigidTransform& m, const HomogeneousPoint& p);
/// Perspective projection of a camera-frame point; BehindCamera when z ≤ 0.
PixelCoord project(const CameraIntrinsics& k, const HomogeneousPoint& p_c);
PixelCoord project_world(const CameraIntrinsics& k, const RigidTransform& m, const HomogeneousPoint& p_w);

/// Rodrigues. DegenerateAxis when |axis| < 1e-12.
Rotation rotation_from_axis_angle(const Vec3& axis, double angle);

// Gesture mapping constants.
inline constexpr double kDragGainPerWidth = 2.0 * 3.14159265358979323846;
inline constexpr double kDepthStepPerNotch = 0.05;

/// Arcball rotation about `pivot` (camera frame). A drag of d pixels turns the
/// object by 2π·d/width about the image-plane axis perpendicular to the drag.
RigidTransform trackball_rotate(const RigidTransform& current, PixelCoord drag_start, PixelCoord drag_end,
                                const Vec3& pivot, const CameraIntrinsics& k);

/// Moves the object parallel to the image plane so that `pivot` (camera frame)
/// follows the cursor. Depth is unchanged.
RigidTransform translate_in_view(const RigidTransform& current, PixelCoord drag_start, PixelCoord drag_end,
                                 const Vec3& pivot, const CameraIntrinsics& k);
/// Same, using the model origin as the tracked point.
RigidTransform translate_in_view(const RigidTransform& current, PixelCoord drag_start, PixelCoord drag_end,
                                 const CameraIntrinsics& k);

/// Scales the pivot's camera-frame position by exp(notches·0.05); its
/// projection stays put.
RigidTransform scroll_depth(const RigidTransform& current, double notches, const Vec3& pivot);

enum class Axis { X, Y, Z };

/// Reflection about the plane through `center` perpendicular to `axis`.
Mat4 mirror_matrix(Axis axis, const Vec3& center);
/// m · mirror; the result carries a reflection and is no longer rigid.
Mat4 mirror_transform(const Mat4& m, Axis axis, const Vec3& center);
Mat4 mirror_transform(const RigidTransform& m, Axis axis, const Vec3& center);

}  // namespace poseforge
