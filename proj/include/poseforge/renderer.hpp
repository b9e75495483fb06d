#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "poseforge/image.hpp"
#include "poseforge/scene.hpp"

namespace poseforge {

struct DepthBuffer {
  int width = 0;
  int height = 0;
  std::vector<double> depth;  // camera-frame z in mm, +inf where empty
  friend bool operator==(const DepthBuffer&, const DepthBuffer&) = default;
};

struct ObjectMask {
  static constexpr std::int32_t kNone = -1;
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> index;  // scene object index, kNone where empty
  friend bool operator==(const ObjectMask&, const ObjectMask&) = default;

  bool covered(std::size_t i) const { return index[i] != kNone; }
};

struct OverlayFrame {
  RgbImage image;
  ObjectMask mask;
  DepthBuffer depth;
  std::vector<std::string> object_ids;  // mask index → object id
  friend bool operator==(const OverlayFrame&, const OverlayFrame&) = default;
};

struct RenderOptions {
  int threads = 0;  // 0: OpenMP default
};

inline constexpr double kNearPlaneMm = 1.0;
inline constexpr Rgb kSceneBackdrop{38, 40, 46};
inline constexpr Rgb kLime{0, 255, 0};
inline constexpr Rgb kMagenta{255, 0, 255};

/// Z-buffered flat silhouettes composited over the background (original
/// camera) or a uniform backdrop (scene camera). Row bands are filled in
/// parallel; output is bit-identical for every thread count.
OverlayFrame rasterize(const Scene& scene, CameraSelect camera, const RenderOptions& options = {});
/// Single-threaded triangle-order reference. Produces the same frame as
/// rasterize(); kept for testing and benchmarking.
OverlayFrame rasterize_reference(const Scene& scene, CameraSelect camera);

/// (1−α)·bg + α·c per channel in [0,1], quantized round-half-up.
Rgb blend(Rgb background, Rgb color, double alpha);

using PoseMap = std::map<std::string, RigidTransform>;

struct ComparisonImage {
  RgbImage image;
  std::size_t lime_only = 0;
  std::size_t magenta_only = 0;
  std::size_t overlap = 0;
};

/// Annotated silhouettes in lime, ground truth in magenta, both at half
/// strength so the overlap reads as their blend. MissingPose when the maps
/// cover different ids.
ComparisonImage render_comparison(const Scene& scene, const PoseMap& annotated, const PoseMap& ground_truth,
                                  CameraSelect camera = CameraSelect::Original);

struct DifferenceImage {
  RgbImage image;
  double mismatch_ratio = 0.0;  // |A△B| / |A∪B|, 0 when both empty
};

DifferenceImage render_difference(const ObjectMask& annotated, const ObjectMask& ground_truth);

std::vector<std::uint8_t> encode_frame_png(const OverlayFrame& frame);
/// 16-bit grayscale, value = object index + 1 (0 where empty).
std::vector<std::uint8_t> encode_mask_png(const ObjectMask& mask);

}  // namespace poseforge
