#include "poseforge/geometry.hpp"

#include <algorithm>
#include <string>

namespace poseforge {

Mat4 multiply(const Mat4& a, const Mat4& b) {
  Mat4 out{};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += a[r * 4 + k] * b[k * 4 + c];
      out[r * 4 + c] = s;
    }
  }
  return out;
}

Vec3 transform_point(const Mat4& m, const Vec3& p) {
  return {m[0] * p.x + m[1] * p.y + m[2] * p.z + m[3], m[4] * p.x + m[5] * p.y + m[6] * p.z + m[7],
          m[8] * p.x + m[9] * p.y + m[10] * p.z + m[11]};
}

double orthonormality_error(const Mat3& m) {
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += m[k * 3 + i] * m[k * 3 + j];
      worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

double determinant(const Mat3& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

bool is_rotation(const Mat3& m, double tol) {
  if (!std::all_of(m.begin(), m.end(), [](double v) { return std::isfinite(v); })) return false;
  return orthonormality_error(m) <= tol && std::abs(determinant(m) - 1.0) <= tol;
}

Rotation Rotation::from_matrix(const Mat3& m) {
  if (!is_rotation(m)) throw Error(ErrorKind::InvalidRotation, "matrix is not a proper rotation");
  return Rotation(m);
}

Rotation Rotation::orthonormalized(const Mat3& m) {
  if (!std::all_of(m.begin(), m.end(), [](double v) { return std::isfinite(v); }))
    throw Error(ErrorKind::InvalidRotation, "non-finite rotation entry");
  if (!(determinant(m) > 0.0)) throw Error(ErrorKind::InvalidRotation, "determinant is not positive");
  Vec3 r0{m[0], m[1], m[2]};
  Vec3 r1{m[3], m[4], m[5]};
  double n0 = r0.norm();
  if (n0 < 1e-12) throw Error(ErrorKind::InvalidRotation, "degenerate row");
  Vec3 e0 = (1.0 / n0) * r0;
  Vec3 r1p = r1 - dot(r1, e0) * e0;
  double n1 = r1p.norm();
  if (n1 < 1e-12) throw Error(ErrorKind::InvalidRotation, "degenerate row");
  Vec3 e1 = (1.0 / n1) * r1p;
  Vec3 e2 = cross(e0, e1);
  return Rotation(Mat3{e0.x, e0.y, e0.z, e1.x, e1.y, e1.z, e2.x, e2.y, e2.z});
}

Rotation Rotation::transposed() const {
  return Rotation(Mat3{m_[0], m_[3], m_[6], m_[1], m_[4], m_[7], m_[2], m_[5], m_[8]});
}

Rotation operator*(const Rotation& a, const Rotation& b) {
  Mat3 out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out[r * 3 + c] = a.m_[r * 3] * b.m_[c] + a.m_[r * 3 + 1] * b.m_[3 + c] + a.m_[r * 3 + 2] * b.m_[6 + c];
    }
  }
  if (orthonormality_error(out) > 1e-12) return Rotation::orthonormalized(out);
  return Rotation(out);
}

RigidTransform RigidTransform::from_matrix(const Mat4& m) {
  if (!std::all_of(m.begin(), m.end(), [](double v) { return std::isfinite(v); }))
    throw Error(ErrorKind::InvalidRotation, "non-finite matrix entry");
  if (m[12] != 0.0 || m[13] != 0.0 || m[14] != 0.0 || m[15] != 1.0)
    throw Error(ErrorKind::InvalidRotation, "bottom row must be [0 0 0 1]");
  RigidTransform out;
  out.rotation = Rotation::from_matrix(Mat3{m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]});
  out.translation = {m[3], m[7], m[11]};
  return out;
}

Mat4 RigidTransform::matrix() const {
  const Mat3& r = rotation.matrix();
  return {r[0], r[1], r[2], translation.x, r[3], r[4], r[5], translation.y,
          r[6], r[7], r[8], translation.z, 0.0,  0.0,  0.0,  1.0};
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy))
    throw Error(ErrorKind::OutOfRange, "focal lengths must be positive and finite");
  if (width < 1 || height < 1 || width > kMaxDimension || height > kMaxDimension)
    throw Error(ErrorKind::OutOfRange, "image dimensions out of range");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    throw Error(ErrorKind::OutOfRange, "principal point outside the image");
}

Mat4 CameraIntrinsics::matrix() const { return {fx, 0, cx, 0, 0, fy, cy, 0, 0, 0, 1, 0, 0, 0, 0, 1}; }

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation * b.rotation, a.rotation.apply(b.translation) + a.translation};
}

RigidTransform invert(const RigidTransform& m) {
  Rotation rt = m.rotation.transposed();
  return {rt, -rt.apply(m.translation)};
}

HomogeneousPoint world_to_camera(const RigidTransform& m, const HomogeneousPoint& p) {
  return HomogeneousPoint::point(m.apply(p.xyz()));
}

PixelCoord project(const CameraIntrinsics& k, const HomogeneousPoint& p_c) {
  if (!(p_c.z > 0.0)) throw Error(ErrorKind::BehindCamera, "point depth " + std::to_string(p_c.z));
  return {k.fx * p_c.x / p_c.z + k.cx, k.fy * p_c.y / p_c.z + k.cy};
}

PixelCoord project_world(const CameraIntrinsics& k, const RigidTransform& m, const HomogeneousPoint& p_w) {
  return project(k, world_to_camera(m, p_w));
}

Rotation rotation_from_axis_angle(const Vec3& axis, double angle) {
  double n = axis.norm();
  if (!(n >= 1e-12)) throw Error(ErrorKind::DegenerateAxis, "rotation axis has zero length");
  Vec3 a = (1.0 / n) * axis;
  double c = std::cos(angle);
  double s = std::sin(angle);
  double C = 1.0 - c;
  Mat3 m{c + a.x * a.x * C,       a.x * a.y * C - a.z * s, a.x * a.z * C + a.y * s,
         a.y * a.x * C + a.z * s, c + a.y * a.y * C,       a.y * a.z * C - a.x * s,
         a.z * a.x * C - a.y * s, a.z * a.y * C + a.x * s, c + a.z * a.z * C};
  if (orthonormality_error(m) > 1e-12) return Rotation::orthonormalized(m);
  return Rotation::from_matrix(m);
}

RigidTransform trackball_rotate(const RigidTransform& current, PixelCoord drag_start, PixelCoord drag_end,
                                const Vec3& pivot, const CameraIntrinsics& k) {
  if (drag_start == drag_end) return current;
  if (!(pivot.z > 0.0)) throw Error(ErrorKind::BehindCamera, "rotation pivot is behind the camera");
  double du = drag_end.u - drag_start.u;
  double dv = drag_end.v - drag_start.v;
  double angle = kDragGainPerWidth * std::hypot(du, dv) / k.width;
  // Rightward drags turn the near surface right: axis is camera-up (−Y).
  Rotation delta = rotation_from_axis_angle({dv, -du, 0.0}, angle);
  return {delta * current.rotation, delta.apply(current.translation - pivot) + pivot};
}

RigidTransform translate_in_view(const RigidTransform& current, PixelCoord drag_start, PixelCoord drag_end,
                                 const Vec3& pivot, const CameraIntrinsics& k) {
  if (drag_start == drag_end) return current;
  if (!(pivot.z > 0.0)) throw Error(ErrorKind::BehindCamera, "object is behind the camera");
  Vec3 shift{(drag_end.u - drag_start.u) * pivot.z / k.fx, (drag_end.v - drag_start.v) * pivot.z / k.fy, 0.0};
  return {current.rotation, current.translation + shift};
}

RigidTransform translate_in_view(const RigidTransform& current, PixelCoord drag_start, PixelCoord drag_end,
                                 const CameraIntrinsics& k) {
  return translate_in_view(current, drag_start, drag_end, current.translation, k);
}

RigidTransform scroll_depth(const RigidTransform& current, double notches, const Vec3& pivot) {
  if (notches == 0.0) return current;
  if (!(pivot.z > 0.0)) throw Error(ErrorKind::BehindCamera, "object is behind the camera");
  double factor = std::exp(notches * kDepthStepPerNotch);
  return {current.rotation, current.translation + (factor - 1.0) * pivot};
}

Mat4 mirror_matrix(Axis axis, const Vec3& center) {
  double sx = axis == Axis::X ? -1.0 : 1.0;
  double sy = axis == Axis::Y ? -1.0 : 1.0;
  double sz = axis == Axis::Z ? -1.0 : 1.0;
  return {sx,  0.0, 0.0, (1.0 - sx) * center.x, 0.0, sy,  0.0, (1.0 - sy) * center.y,
          0.0, 0.0, sz,  (1.0 - sz) * center.z, 0.0, 0.0, 0.0, 1.0};
}

Mat4 mirror_transform(const Mat4& m, Axis axis, const Vec3& center) {
  return multiply(m, mirror_matrix(axis, center));
}

Mat4 mirror_transform(const RigidTransform& m, Axis axis, const Vec3& center) {
  return mirror_transform(m.matrix(), axis, center);
}

}  // namespace poseforge
