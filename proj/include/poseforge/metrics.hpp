#pragma once

#include <cstddef>
#include <span>

#include "poseforge/geometry.hpp"
#include "poseforge/scene.hpp"

namespace poseforge {

/// Geodesic angle between two rotations, in radians.
///
/// Evaluates arccos((Tr(R₁ᵀR₂) − 1) / 2) through the equivalent
/// atan2(‖skew(R₁ᵀR₂)‖, (Tr − 1)/2) form: arccos loses half of the available
/// precision near 0°, which puts the angle between a rotation and itself at
/// ~1e-6° instead of exactly 0. Symmetric in its arguments bit-for-bit.
double angular_distance_rad(const Rotation& r1, const Rotation& r2);
/// Same angle in degrees, in [0, 180].
double angular_distance(const Rotation& r1, const Rotation& r2);

double euclidean_distance(const Vec3& t1, const Vec3& t2);

struct AddOptions {
  /// Uniform stride subsample when non-zero and smaller than the vertex count.
  std::size_t max_points = 0;
  int threads = 0;  // 0: OpenMP default
};

/// Mean distance between the model points under the two poses. Vertices are
/// summed in fixed-size blocks so the result does not depend on the thread
/// count. EmptyMesh when there are no vertices.
double add_metric(std::span<const Vec3> points, const RigidTransform& p1, const RigidTransform& p2,
                  const AddOptions& options = {});
double add_metric(const MeshAsset& mesh, const RigidTransform& p1, const RigidTransform& p2,
                  const AddOptions& options = {});
/// Plain left-to-right serial loop, kept as the reference for add_metric.
double add_metric_reference(std::span<const Vec3> points, const RigidTransform& p1, const RigidTransform& p2);

struct PoseErrors {
  double angular_deg = 0.0;
  double euclidean_mm = 0.0;
  double add_mm = 0.0;
};

PoseErrors pose_errors(const MeshAsset& mesh, const RigidTransform& annotated, const RigidTransform& ground_truth,
                       const AddOptions& options = {});

}  // namespace poseforge
