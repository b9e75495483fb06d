#pragma once

// Shared test helpers: seeded generators, temporary directories and small
// on-disk datasets.

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "poseforge/dataset.hpp"
#include "poseforge/image.hpp"
#include "poseforge/scene.hpp"

namespace testing {

namespace fs = std::filesystem;
using namespace poseforge;

constexpr double kPi = 3.14159265358979323846;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal(double mean, double sd) { return std::normal_distribution<double>(mean, sd)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  std::mt19937_64& engine() { return engine_; }

  Vec3 unit_vector() {
    for (;;) {
      Vec3 v{normal(0, 1), normal(0, 1), normal(0, 1)};
      double n = v.norm();
      if (n > 1e-6) return (1.0 / n) * v;
    }
  }

  // Uniform over SO(3) via a normalised Gaussian quaternion.
  Rotation rotation() {
    double w = normal(0, 1), x = normal(0, 1), y = normal(0, 1), z = normal(0, 1);
    double n = std::sqrt(w * w + x * x + y * y + z * z);
    w /= n, x /= n, y /= n, z /= n;
    Mat3 m{1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
           2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
           2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
    return Rotation::orthonormalized(m);
  }

  RigidTransform pose(double t_range = 500.0) {
    return {rotation(), {uniform(-t_range, t_range), uniform(-t_range, t_range), uniform(-t_range, t_range)}};
  }

 private:
  std::mt19937_64 engine_;
};

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("poseforge-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline MeshAsset cube_mesh(double side = 40.0, std::string id = "cube") {
  double h = side / 2;
  MeshAsset m;
  m.id = m.name = std::move(id);
  m.vertices = {{-h, -h, -h}, {h, -h, -h}, {h, h, -h}, {-h, h, -h}, {-h, -h, h}, {h, -h, h}, {h, h, h}, {-h, h, h}};
  m.triangles = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
                 {2, 3, 7}, {2, 7, 6}, {1, 2, 6}, {1, 6, 5}, {0, 4, 7}, {0, 7, 3}};
  return m;
}

inline MeshAsset tetra_mesh(std::string id = "tetra") {
  MeshAsset m;
  m.id = m.name = std::move(id);
  m.vertices = {{0, 0, 30}, {28, 0, -10}, {-14, 24, -10}, {-14, -24, -10}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}};
  return m;
}

// Irregular elongated mesh: a skewed prism with an off-centre apex.
inline MeshAsset wedge_mesh(std::string id = "wedge") {
  MeshAsset m;
  m.id = m.name = std::move(id);
  m.vertices = {{-60, -5, -8}, {55, -7, -10}, {50, 9, -6}, {-52, 12, -9}, {0, 2, 25}, {70, 3, 4}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}, {0, 4, 1}, {1, 4, 5}, {1, 5, 2}, {2, 5, 4}, {2, 4, 3}, {3, 4, 0}};
  return m;
}

inline std::vector<MeshAsset> fixture_meshes() { return {cube_mesh(), tetra_mesh(), wedge_mesh()}; }

inline std::string ply_text(const MeshAsset& m) {
  std::string s = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(m.vertices.size()) +
                  "\nproperty float x\nproperty float y\nproperty float z\nelement face " +
                  std::to_string(m.triangles.size()) + "\nproperty list uchar int vertex_indices\nend_header\n";
  for (const Vec3& v : m.vertices) s += format_decimal(v.x) + " " + format_decimal(v.y) + " " + format_decimal(v.z) + "\n";
  for (const auto& t : m.triangles)
    s += "3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
  return s;
}

inline RgbImage gradient_image(int w, int h) {
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.set(x, y, {static_cast<std::uint8_t>(x * 255 / std::max(1, w - 1)),
                     static_cast<std::uint8_t>(y * 255 / std::max(1, h - 1)), 90});
    }
  }
  return img;
}

inline CameraIntrinsics small_camera(int w = 64, int h = 48) { return {80.0, 80.0, w / 2.0, h / 2.0, w, h}; }

// Writes root/samples/sample_XX with one or more objects and ground truth.
// Ground-truth poses sit about 300 mm in front of the camera.
inline std::vector<std::string> write_dataset(const fs::path& root, int samples, int objects_per_sample = 1,
                                              std::uint64_t seed = 11) {
  Rng rng(seed);
  std::vector<std::string> ids;
  const auto meshes = fixture_meshes();
  for (int s = 0; s < samples; ++s) {
    char name[32];
    std::snprintf(name, sizeof name, "sample_%02d", s);
    fs::path dir = root / "samples" / name;
    fs::create_directories(dir / "objects");
    fs::create_directories(dir / "gt");
    CameraIntrinsics k = small_camera();
    write_file_atomic(dir / "camera.txt", format_camera_file({k, 1.0}));
    write_file_atomic(dir / "image.png", encode_png(gradient_image(k.width, k.height)));
    for (int o = 0; o < objects_per_sample; ++o) {
      MeshAsset mesh = meshes[(s + o) % meshes.size()];
      std::string obj = "obj" + std::to_string(o);
      write_file_atomic(dir / "objects" / (obj + ".ply"), ply_text(mesh));
      RigidTransform gt{rng.rotation(), {rng.uniform(-30, 30), rng.uniform(-20, 20), rng.uniform(280, 320)}};
      write_file_atomic(dir / "gt" / (obj + ".txt"), export_pose(gt));
    }
    ids.emplace_back(name);
  }
  return ids;
}

}  // namespace testing
