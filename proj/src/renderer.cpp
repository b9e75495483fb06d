#include "poseforge/renderer.hpp"

#include <omp.h>

#include <cmath>
#include <limits>

#include "raster_kernel.hpp"

namespace poseforge {

namespace detail {

std::vector<DrawItem> draw_list(const Scene& scene, CameraSelect camera) {
  std::vector<DrawItem> items;
  const auto& objects = scene.objects();
  items.reserve(objects.size());
  Mat4 view = scene.camera_transform(camera).matrix();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const SceneObject& obj = objects[i];
    if (!obj.visible) continue;
    Mat4 model = effective_model_transform(obj);
    items.push_back({static_cast<std::int32_t>(i),
                     camera == CameraSelect::Original ? model : multiply(view, model), obj.mesh.get()});
  }
  return items;
}

}  // namespace detail

namespace {

constexpr int kBandRows = 16;

struct ZBuffer {
  int width = 0;
  int height = 0;
  std::vector<double> depth;
  std::vector<std::int32_t> ids;

  ZBuffer(int w, int h)
      : width(w),
        height(h),
        depth(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity()),
        ids(static_cast<std::size_t>(w) * h, ObjectMask::kNone) {}
};

int resolve_threads(int requested) { return requested > 0 ? requested : omp_get_max_threads(); }

ZBuffer fill_serial(const std::vector<detail::DrawItem>& items, const CameraIntrinsics& k) {
  ZBuffer zb(k.width, k.height);
  std::vector<Vec3> cam;
  for (const detail::DrawItem& item : items) {
    detail::transform_vertices(item, cam);
    for (const auto& tri : item.mesh->triangles) {
      Vec3 v[3] = {cam[tri[0]], cam[tri[1]], cam[tri[2]]};
      detail::ScreenTriangle st[2];
      int n = detail::setup_triangle(v, item.object, k, st);
      for (int i = 0; i < n; ++i) detail::fill_rows(st[i], 0, k.height, k.width, zb.depth.data(), zb.ids.data());
    }
  }
  return zb;
}

// Buffers reused across frames by the calling thread: fresh multi-megabyte
// allocations cost more in page faults than triangle setup. OpenMP workers
// reach them through references bound on the caller, never through the
// thread_local itself.
struct FillScratch {
  std::vector<detail::ScreenTriangle> tris;
  std::vector<Vec3> cam;
  std::vector<std::vector<detail::ScreenTriangle>> local;
  std::vector<std::vector<std::uint32_t>> bands;
};

FillScratch& fill_scratch() {
  thread_local FillScratch scratch;
  return scratch;
}

ZBuffer fill_parallel(const std::vector<detail::DrawItem>& items, const CameraIntrinsics& k, int threads) {
  // Setup: each thread takes one contiguous chunk of triangles (static
  // schedule), so concatenating per-thread output in thread order restores
  // the global triangle order.
  FillScratch& scratch = fill_scratch();
  auto& tris = scratch.tris;
  auto& cam = scratch.cam;
  auto& local = scratch.local;
  auto& bands = scratch.bands;
  tris.clear();
  if (local.size() < static_cast<std::size_t>(threads)) local.resize(static_cast<std::size_t>(threads));
  for (const detail::DrawItem& item : items) {
    const auto& verts = item.mesh->vertices;
    const auto& faces = item.mesh->triangles;
    cam.resize(verts.size());
    const long n_verts = static_cast<long>(verts.size());
    const long n_faces = static_cast<long>(faces.size());
#pragma omp parallel num_threads(threads)
    {
#pragma omp for schedule(static)
      for (long i = 0; i < n_verts; ++i) cam[i] = transform_point(item.model_to_camera, verts[i]);

      auto& mine = local[omp_get_thread_num()];
      mine.clear();
#pragma omp for schedule(static)
      for (long f = 0; f < n_faces; ++f) {
        const auto& tri = faces[f];
        Vec3 v[3] = {cam[tri[0]], cam[tri[1]], cam[tri[2]]};
        detail::ScreenTriangle st[2];
        int n = detail::setup_triangle(v, item.object, k, st);
        for (int i = 0; i < n; ++i) mine.push_back(st[i]);
      }
    }
    for (int t = 0; t < threads; ++t) tris.insert(tris.end(), local[t].begin(), local[t].end());
  }

  const int n_bands = (k.height + kBandRows - 1) / kBandRows;
  if (bands.size() < static_cast<std::size_t>(n_bands)) bands.resize(static_cast<std::size_t>(n_bands));
  for (auto& band : bands) band.clear();
  for (std::size_t i = 0; i < tris.size(); ++i) {
    for (int b = tris[i].min_y / kBandRows; b <= tris[i].max_y / kBandRows; ++b) {
      bands[b].push_back(static_cast<std::uint32_t>(i));
    }
  }

  ZBuffer zb(k.width, k.height);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int b = 0; b < n_bands; ++b) {
    int row_begin = b * kBandRows;
    int row_end = std::min(row_begin + kBandRows, k.height);
    for (std::uint32_t i : bands[b]) {
      detail::fill_rows(tris[i], row_begin, row_end, k.width, zb.depth.data(), zb.ids.data());
    }
  }
  return zb;
}

std::uint8_t quantize(double unit) {
  double v = std::floor(unit * 255.0 + 0.5);
  if (v <= 0.0) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(v);
}

void composite_rows(const ZBuffer& zb, const Scene& scene, const RgbImage& backdrop, RgbImage& out, int row_begin,
                    int row_end) {
  const auto& objects = scene.objects();
  for (int y = row_begin; y < row_end; ++y) {
    for (int x = 0; x < zb.width; ++x) {
      std::int32_t id = zb.ids[static_cast<std::size_t>(y) * zb.width + x];
      Rgb bg = backdrop.at(x, y);
      out.set(x, y, id == ObjectMask::kNone ? bg : blend(bg, objects[id].color, objects[id].opacity));
    }
  }
}

RgbImage backdrop_for(const Scene& scene, CameraSelect camera) {
  if (camera == CameraSelect::Original) return scene.background();
  return RgbImage(scene.intrinsics().width, scene.intrinsics().height, kSceneBackdrop);
}

OverlayFrame finish(ZBuffer&& zb, const Scene& scene, CameraSelect camera, int threads) {
  OverlayFrame frame;
  RgbImage backdrop = backdrop_for(scene, camera);
  frame.image = RgbImage(zb.width, zb.height);
  const int height = zb.height;
  if (threads > 1) {
#pragma omp parallel for schedule(static) num_threads(threads)
    for (int y = 0; y < height; ++y) composite_rows(zb, scene, backdrop, frame.image, y, y + 1);
  } else {
    composite_rows(zb, scene, backdrop, frame.image, 0, height);
  }
  frame.mask = {zb.width, zb.height, std::move(zb.ids)};
  frame.depth = {zb.width, zb.height, std::move(zb.depth)};
  for (const SceneObject& obj : scene.objects()) frame.object_ids.push_back(obj.id);
  return frame;
}

std::vector<detail::DrawItem> posed_items(const Scene& scene, const PoseMap& poses, CameraSelect camera) {
  std::vector<detail::DrawItem> items;
  Mat4 view = scene.camera_transform(camera).matrix();
  const auto& objects = scene.objects();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    auto it = poses.find(objects[i].id);
    if (it == poses.end()) continue;
    SceneObject posed = objects[i];
    posed.pose = it->second;
    items.push_back({static_cast<std::int32_t>(i), multiply(view, effective_model_transform(posed)), posed.mesh.get()});
  }
  return items;
}

}  // namespace

Rgb blend(Rgb background, Rgb color, double alpha) {
  auto channel = [alpha](std::uint8_t bg, std::uint8_t c) {
    return quantize((1.0 - alpha) * (bg / 255.0) + alpha * (c / 255.0));
  };
  return {channel(background.r, color.r), channel(background.g, color.g), channel(background.b, color.b)};
}

OverlayFrame rasterize(const Scene& scene, CameraSelect camera, const RenderOptions& options) {
  int threads = resolve_threads(options.threads);
  auto items = detail::draw_list(scene, camera);
  return finish(fill_parallel(items, scene.intrinsics(), threads), scene, camera, threads);
}

OverlayFrame rasterize_reference(const Scene& scene, CameraSelect camera) {
  auto items = detail::draw_list(scene, camera);
  return finish(fill_serial(items, scene.intrinsics()), scene, camera, 1);
}

ComparisonImage render_comparison(const Scene& scene, const PoseMap& annotated, const PoseMap& ground_truth,
                                  CameraSelect camera) {
  for (const auto& [id, pose] : annotated) {
    if (!ground_truth.contains(id)) throw Error(ErrorKind::MissingPose, "no ground-truth pose for '" + id + "'");
    if (!scene.contains(id)) throw Error(ErrorKind::UnknownObject, "no object '" + id + "'");
  }
  for (const auto& [id, pose] : ground_truth) {
    if (!annotated.contains(id)) throw Error(ErrorKind::MissingPose, "no annotated pose for '" + id + "'");
  }
  const CameraIntrinsics& k = scene.intrinsics();
  int threads = resolve_threads(0);
  ZBuffer a = fill_parallel(posed_items(scene, annotated, camera), k, threads);
  ZBuffer g = fill_parallel(posed_items(scene, ground_truth, camera), k, threads);
  RgbImage backdrop = backdrop_for(scene, camera);

  ComparisonImage out;
  out.image = backdrop;
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      std::size_t i = static_cast<std::size_t>(y) * k.width + x;
      bool in_a = a.ids[i] != ObjectMask::kNone;
      bool in_g = g.ids[i] != ObjectMask::kNone;
      Rgb bg = backdrop.at(x, y);
      if (in_a && in_g) {
        ++out.overlap;
        auto mix = [](std::uint8_t b, std::uint8_t l, std::uint8_t m) {
          return quantize(0.5 * (b / 255.0) + 0.25 * (l / 255.0) + 0.25 * (m / 255.0));
        };
        out.image.set(x, y, {mix(bg.r, kLime.r, kMagenta.r), mix(bg.g, kLime.g, kMagenta.g),
                             mix(bg.b, kLime.b, kMagenta.b)});
      } else if (in_a) {
        ++out.lime_only;
        out.image.set(x, y, blend(bg, kLime, 0.5));
      } else if (in_g) {
        ++out.magenta_only;
        out.image.set(x, y, blend(bg, kMagenta, 0.5));
      }
    }
  }
  return out;
}

DifferenceImage render_difference(const ObjectMask& annotated, const ObjectMask& ground_truth) {
  if (annotated.width != ground_truth.width || annotated.height != ground_truth.height ||
      annotated.index.size() != ground_truth.index.size())
    throw Error(ErrorKind::DimensionMismatch, "mask dimensions differ");
  DifferenceImage out;
  out.image = RgbImage(annotated.width, annotated.height);
  std::size_t sym = 0;
  std::size_t uni = 0;
  for (int y = 0; y < annotated.height; ++y) {
    for (int x = 0; x < annotated.width; ++x) {
      std::size_t i = static_cast<std::size_t>(y) * annotated.width + x;
      bool a = annotated.covered(i);
      bool g = ground_truth.covered(i);
      if (a || g) ++uni;
      if (a != g) ++sym;
      if (a && g) {
        out.image.set(x, y, {96, 96, 96});
      } else if (a) {
        out.image.set(x, y, kLime);
      } else if (g) {
        out.image.set(x, y, kMagenta);
      }
    }
  }
  out.mismatch_ratio = uni == 0 ? 0.0 : static_cast<double>(sym) / static_cast<double>(uni);
  return out;
}

std::vector<std::uint8_t> encode_frame_png(const OverlayFrame& frame) { return encode_png(frame.image); }

std::vector<std::uint8_t> encode_mask_png(const ObjectMask& mask) {
  Gray16Image img;
  img.width = mask.width;
  img.height = mask.height;
  img.pixels.resize(mask.index.size());
  for (std::size_t i = 0; i < mask.index.size(); ++i) {
    img.pixels[i] = mask.index[i] == ObjectMask::kNone ? 0 : static_cast<std::uint16_t>(mask.index[i] + 1);
  }
  return encode_png(img);
}

}  // namespace poseforge
