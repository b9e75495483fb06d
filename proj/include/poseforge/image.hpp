#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace poseforge {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Packed 8-bit RGB, row-major, top row first.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {});

  Rgb at(int x, int y) const {
    const std::uint8_t* p = &pixels[(static_cast<std::size_t>(y) * width + x) * 3];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) {
    std::uint8_t* p = &pixels[(static_cast<std::size_t>(y) * width + x) * 3];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

struct Gray16Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> pixels;
};

// PNG encoding is deterministic: fixed compression settings, no time chunk.
std::vector<std::uint8_t> encode_png(const RgbImage& image);
std::vector<std::uint8_t> encode_png(const Gray16Image& image);

/// Decodes any 8/16-bit PNG to 8-bit RGB (alpha dropped, gray expanded).
RgbImage decode_png_rgb(std::span<const std::uint8_t> bytes);
/// Decodes a grayscale PNG keeping 16-bit samples.
Gray16Image decode_png_gray16(std::span<const std::uint8_t> bytes);

RgbImage read_png_rgb(const std::filesystem::path& path);
/// Width and height from the IHDR chunk without decoding pixel data.
std::pair<int, int> png_dimensions(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);
/// Writes to a sibling temporary and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace poseforge
