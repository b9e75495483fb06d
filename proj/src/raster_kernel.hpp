#pragma once

// Triangle setup and per-pixel coverage shared by the rasterizers and
// picking. Everything here is deterministic scalar arithmetic; the parallel
// and serial drivers differ only in how they schedule these calls.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "poseforge/geometry.hpp"
#include "poseforge/renderer.hpp"
#include "poseforge/scene.hpp"

namespace poseforge::detail {

struct DrawItem {
  std::int32_t object = 0;
  Mat4 model_to_camera = identity4();
  const MeshAsset* mesh = nullptr;
};

struct ScreenTriangle {
  double x[3];
  double y[3];
  double inv_z[3];
  double area;
  bool top_left[3];
  std::int32_t object;
  int min_x, max_x, min_y, max_y;  // inclusive pixel range, clamped to the image
};

inline double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

// Top-left rule for a positive-area triangle in y-down pixel space.
inline bool is_top_left(double ax, double ay, double bx, double by) {
  double dy = by - ay;
  double dx = bx - ax;
  return (dy == 0.0 && dx > 0.0) || dy < 0.0;
}

inline int clamp_floor(double v, int lo, int hi) {
  if (!(v >= lo)) return lo;
  if (v >= hi) return hi;
  return static_cast<int>(std::floor(v));
}

inline int clamp_ceil(double v, int lo, int hi) {
  if (!(v >= lo)) return lo;
  if (v >= hi) return hi;
  return static_cast<int>(std::ceil(v));
}

// Projects one camera-frame triangle that lies entirely at z ≥ near.
// Returns false for degenerate triangles, and for triangles that cover no
// pixel centre when `require_pixels` is set.
inline bool setup_projected(const Vec3 (&v)[3], std::int32_t object, const CameraIntrinsics& k, ScreenTriangle& t,
                            bool require_pixels) {
  for (int i = 0; i < 3; ++i) {
    t.x[i] = k.fx * v[i].x / v[i].z + k.cx;
    t.y[i] = k.fy * v[i].y / v[i].z + k.cy;
    t.inv_z[i] = 1.0 / v[i].z;
  }
  double area = edge(t.x[0], t.y[0], t.x[1], t.y[1], t.x[2], t.y[2]);
  if (!std::isfinite(area) || area == 0.0) return false;
  if (area < 0.0) {
    std::swap(t.x[1], t.x[2]);
    std::swap(t.y[1], t.y[2]);
    std::swap(t.inv_z[1], t.inv_z[2]);
    area = -area;
  }
  t.area = area;
  t.object = object;
  // Edge i is opposite vertex i.
  t.top_left[0] = is_top_left(t.x[1], t.y[1], t.x[2], t.y[2]);
  t.top_left[1] = is_top_left(t.x[2], t.y[2], t.x[0], t.y[0]);
  t.top_left[2] = is_top_left(t.x[0], t.y[0], t.x[1], t.y[1]);

  double lo_x = std::min({t.x[0], t.x[1], t.x[2]});
  double hi_x = std::max({t.x[0], t.x[1], t.x[2]});
  double lo_y = std::min({t.y[0], t.y[1], t.y[2]});
  double hi_y = std::max({t.y[0], t.y[1], t.y[2]});
  // Pixel x is sampled at x + 0.5.
  t.min_x = clamp_ceil(lo_x - 0.5, 0, k.width);
  t.max_x = clamp_floor(hi_x - 0.5, -1, k.width - 1);
  t.min_y = clamp_ceil(lo_y - 0.5, 0, k.height);
  t.max_y = clamp_floor(hi_y - 0.5, -1, k.height - 1);
  return !require_pixels || (t.min_x <= t.max_x && t.min_y <= t.max_y);
}

// Clips against z = near and emits up to two screen triangles. Returns the
// number written to `out`.
inline int setup_triangle(const Vec3 (&v)[3], std::int32_t object, const CameraIntrinsics& k,
                          ScreenTriangle (&out)[2], bool require_pixels = true) {
  bool inside[3] = {v[0].z >= kNearPlaneMm, v[1].z >= kNearPlaneMm, v[2].z >= kNearPlaneMm};
  int n_inside = int(inside[0]) + int(inside[1]) + int(inside[2]);
  if (n_inside == 0) return 0;
  if (n_inside == 3) return setup_projected(v, object, k, out[0], require_pixels) ? 1 : 0;

  Vec3 poly[4];
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const Vec3& a = v[i];
    const Vec3& b = v[(i + 1) % 3];
    bool ia = inside[i];
    bool ib = inside[(i + 1) % 3];
    if (ia) poly[n++] = a;
    if (ia != ib) {
      double s = (kNearPlaneMm - a.z) / (b.z - a.z);
      Vec3 p = a + s * (b - a);
      p.z = kNearPlaneMm;
      poly[n++] = p;
    }
  }
  int written = 0;
  Vec3 first[3] = {poly[0], poly[1], poly[2]};
  if (setup_projected(first, object, k, out[written], require_pixels)) ++written;
  if (n == 4) {
    Vec3 second[3] = {poly[0], poly[2], poly[3]};
    if (setup_projected(second, object, k, out[written], require_pixels)) ++written;
  }
  return written;
}

// Coverage and perspective-correct depth at an arbitrary sample point.
inline bool sample(const ScreenTriangle& t, double px, double py, double& z) {
  double w0 = edge(t.x[1], t.y[1], t.x[2], t.y[2], px, py);
  double w1 = edge(t.x[2], t.y[2], t.x[0], t.y[0], px, py);
  double w2 = edge(t.x[0], t.y[0], t.x[1], t.y[1], px, py);
  if (!(w0 > 0.0 || (w0 == 0.0 && t.top_left[0]))) return false;
  if (!(w1 > 0.0 || (w1 == 0.0 && t.top_left[1]))) return false;
  if (!(w2 > 0.0 || (w2 == 0.0 && t.top_left[2]))) return false;
  double inv_z = (w0 * t.inv_z[0] + w1 * t.inv_z[1] + w2 * t.inv_z[2]) / t.area;
  z = 1.0 / inv_z;
  return true;
}

// Fills rows [row_begin, row_end) of the z-buffer with one triangle.
inline void fill_rows(const ScreenTriangle& t, int row_begin, int row_end, int width, double* depth,
                      std::int32_t* ids) {
  int y0 = std::max(t.min_y, row_begin);
  int y1 = std::min(t.max_y + 1, row_end);
  for (int y = y0; y < y1; ++y) {
    double py = y + 0.5;
    std::size_t row = static_cast<std::size_t>(y) * width;
    for (int x = t.min_x; x <= t.max_x; ++x) {
      double z;
      if (sample(t, x + 0.5, py, z) && z < depth[row + x]) {
        depth[row + x] = z;
        ids[row + x] = t.object;
      }
    }
  }
}

inline void transform_vertices(const DrawItem& item, std::vector<Vec3>& out) {
  const auto& verts = item.mesh->vertices;
  out.resize(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) out[i] = transform_point(item.model_to_camera, verts[i]);
}

/// Visible objects of `scene` seen from `camera`, in object-index order.
std::vector<DrawItem> draw_list(const Scene& scene, CameraSelect camera);

}  // namespace poseforge::detail
