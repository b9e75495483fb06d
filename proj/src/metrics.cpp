#include "poseforge/metrics.hpp"

#include <omp.h>

#include <cmath>
#include <vector>

namespace poseforge {

namespace {
constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;
constexpr std::size_t kBlock = 4096;

double point_distance(const Vec3& v, const RigidTransform& p1, const RigidTransform& p2) {
  return ((p1.rotation.apply(v) + p1.translation) - (p2.rotation.apply(v) + p2.translation)).norm();
}
}  // namespace

double angular_distance_rad(const Rotation& r1, const Rotation& r2) {
  const Mat3& a = r1.matrix();
  const Mat3& b = r2.matrix();
  double m[9];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m[i * 3 + j] = a[i] * b[j] + a[3 + i] * b[3 + j] + a[6 + i] * b[6 + j];
  }
  double cos_part = 0.5 * (m[0] + m[4] + m[8] - 1.0);
  double sx = m[7] - m[5];
  double sy = m[2] - m[6];
  double sz = m[3] - m[1];
  double sin_part = 0.5 * std::sqrt(sx * sx + sy * sy + sz * sz);
  return std::atan2(sin_part, cos_part);
}

double angular_distance(const Rotation& r1, const Rotation& r2) { return angular_distance_rad(r1, r2) * kRadToDeg; }

double euclidean_distance(const Vec3& t1, const Vec3& t2) { return (t1 - t2).norm(); }

double add_metric_reference(std::span<const Vec3> points, const RigidTransform& p1, const RigidTransform& p2) {
  if (points.empty()) throw Error(ErrorKind::EmptyMesh, "ADD needs at least one model point");
  double sum = 0.0;
  for (const Vec3& v : points) sum += point_distance(v, p1, p2);
  return sum / static_cast<double>(points.size());
}

double add_metric(std::span<const Vec3> points, const RigidTransform& p1, const RigidTransform& p2,
                  const AddOptions& options) {
  if (points.empty()) throw Error(ErrorKind::EmptyMesh, "ADD needs at least one model point");
  std::vector<Vec3> subsample;
  if (options.max_points > 0 && options.max_points < points.size()) {
    subsample.reserve(options.max_points);
    for (std::size_t j = 0; j < options.max_points; ++j) subsample.push_back(points[j * points.size() / options.max_points]);
    points = subsample;
  }
  const std::size_t n = points.size();
  const long n_blocks = static_cast<long>((n + kBlock - 1) / kBlock);
  std::vector<double> partial(static_cast<std::size_t>(n_blocks), 0.0);
  int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads) if (n_blocks > 1)
  for (long b = 0; b < n_blocks; ++b) {
    std::size_t begin = static_cast<std::size_t>(b) * kBlock;
    std::size_t end = std::min(begin + kBlock, n);
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += point_distance(points[i], p1, p2);
    partial[b] = s;
  }
  double sum = 0.0;
  for (double s : partial) sum += s;
  return sum / static_cast<double>(n);
}

double add_metric(const MeshAsset& mesh, const RigidTransform& p1, const RigidTransform& p2,
                  const AddOptions& options) {
  return add_metric(std::span<const Vec3>(mesh.vertices), p1, p2, options);
}

PoseErrors pose_errors(const MeshAsset& mesh, const RigidTransform& annotated, const RigidTransform& ground_truth,
                       const AddOptions& options) {
  return {angular_distance(annotated.rotation, ground_truth.rotation),
          euclidean_distance(annotated.translation, ground_truth.translation),
          add_metric(mesh, annotated, ground_truth, options)};
}

}  // namespace poseforge
