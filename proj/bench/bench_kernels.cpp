// Parallel kernels against their serial references.
//
//   bench_kernels --benchmark_filter=Rasterize

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "poseforge/metrics.hpp"
#include "poseforge/renderer.hpp"

using namespace poseforge;

namespace {

constexpr double kPi = 3.14159265358979323846;

MeshAsset uv_sphere(int stacks, int slices, double radius) {
  MeshAsset m;
  m.id = "sphere";
  for (int i = 0; i <= stacks; ++i) {
    double phi = kPi * i / stacks;
    for (int j = 0; j < slices; ++j) {
      double theta = 2 * kPi * j / slices;
      m.vertices.push_back({radius * std::sin(phi) * std::cos(theta), radius * std::cos(phi),
                            radius * std::sin(phi) * std::sin(theta)});
    }
  }
  auto at = [&](int i, int j) { return static_cast<std::uint32_t>(i * slices + (j % slices)); };
  for (int i = 0; i < stacks; ++i) {
    for (int j = 0; j < slices; ++j) {
      m.triangles.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
      m.triangles.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
    }
  }
  return m;
}

Scene sphere_scene(int triangles) {
  int stacks = std::max(2, static_cast<int>(std::sqrt(triangles / 3.2)));
  int slices = std::max(3, triangles / (2 * stacks));
  RgbImage bg(640, 480, Rgb{90, 90, 90});
  Scene scene(CameraIntrinsics{600, 600, 320, 240, 640, 480}, bg);
  std::string id = scene.add_object(std::make_shared<MeshAsset>(uv_sphere(stacks, slices, 120.0)));
  scene.set_pose(id, {rotation_from_axis_angle({1, 1, 0}, 0.4), {10, -5, 450}});
  return scene;
}

void BM_Rasterize(benchmark::State& state) {
  Scene scene = sphere_scene(static_cast<int>(state.range(0)));
  RenderOptions opts{static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(scene, CameraSelect::Original, opts));
  state.counters["triangles"] = static_cast<double>(scene.objects()[0].mesh->triangles.size());
}

void BM_RasterizeReference(benchmark::State& state) {
  Scene scene = sphere_scene(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rasterize_reference(scene, CameraSelect::Original));
}

std::vector<Vec3> cloud(std::size_t n) {
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double t = static_cast<double>(i);
    pts.push_back({std::sin(t) * 50, std::cos(1.3 * t) * 50, std::sin(0.7 * t) * 50});
  }
  return pts;
}

const RigidTransform kA{rotation_from_axis_angle({0, 1, 0}, 0.3), {1, 2, 300}};
const RigidTransform kB{rotation_from_axis_angle({1, 0, 0}, 0.2), {-3, 4, 310}};

void BM_Add(benchmark::State& state) {
  auto pts = cloud(static_cast<std::size_t>(state.range(0)));
  AddOptions opts{0, static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(add_metric(pts, kA, kB, opts));
}

void BM_AddReference(benchmark::State& state) {
  auto pts = cloud(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(add_metric_reference(pts, kA, kB));
}

}  // namespace

BENCHMARK(BM_Rasterize)->ArgsProduct({{5000, 50000, 200000}, {1, 2, 4, 0}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RasterizeReference)->Arg(5000)->Arg(50000)->Arg(200000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Add)->ArgsProduct({{10000, 1000000}, {1, 2, 4, 0}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_AddReference)->Arg(10000)->Arg(1000000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
