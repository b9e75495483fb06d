#include "poseforge/image.hpp"

#include <png.h>

#include <csetjmp>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "poseforge/error.hpp"

namespace poseforge {

RgbImage::RgbImage(int w, int h, Rgb fill) : width(w), height(h) {
  pixels.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill.r;
    pixels[i + 1] = fill.g;
    pixels[i + 2] = fill.b;
  }
}

namespace {

// libpng reports failures by longjmp. State that outlives a jump lives on the
// heap so no automatic object is modified between setjmp and longjmp.
struct PngIo {
  std::span<const std::uint8_t> input;
  std::size_t offset = 0;
  std::vector<std::uint8_t> output;
  std::vector<std::uint8_t> row_data;
  std::vector<png_bytep> rows;
  std::size_t channels = 0;
};

[[noreturn]] void on_png_error(png_structp png, png_const_charp) { png_longjmp(png, 1); }
void on_png_warning(png_structp, png_const_charp) {}

void read_from_span(png_structp png, png_bytep out, png_size_t length) {
  auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
  if (io->input.size() - io->offset < length) png_error(png, "truncated");
  std::memcpy(out, io->input.data() + io->offset, length);
  io->offset += length;
}

void write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
  io->output.insert(io->output.end(), data, data + length);
}

void flush_noop(png_structp) {}

std::vector<std::uint8_t> encode(int width, int height, int bit_depth, int color_type, const std::uint8_t* data,
                                 std::size_t row_bytes) {
  auto io = std::make_unique<PngIo>();
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, on_png_error, on_png_warning);
  if (png == nullptr) throw Error(ErrorKind::IoError, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorKind::IoError, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::IoError, "PNG encoding failed");
  }
  png_set_write_fn(png, io.get(), write_to_vector, flush_noop);
  png_set_compression_level(png, 6);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  io->rows.resize(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) io->rows[y] = const_cast<png_bytep>(data + y * row_bytes);
  png_write_image(png, io->rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return std::move(io->output);
}

enum class DecodeAs { Rgb8, Gray16 };

std::unique_ptr<PngIo> decode(std::span<const std::uint8_t> bytes, DecodeAs mode, int& width, int& height) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw Error(ErrorKind::ParseError, "not a PNG file");
  auto io = std::make_unique<PngIo>();
  io->input = bytes;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, on_png_error, on_png_warning);
  if (png == nullptr) throw Error(ErrorKind::IoError, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorKind::IoError, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::ParseError, "malformed PNG data");
  }
  png_set_read_fn(png, io.get(), read_from_span);
  png_set_user_limits(png, 16384, 16384);
  png_read_info(png, info);
  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int bit_depth = png_get_bit_depth(png, info);
  int color_type = png_get_color_type(png, info);
  std::size_t channels = 3;
  if (mode == DecodeAs::Rgb8) {
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
  } else {
    if (color_type != PNG_COLOR_TYPE_GRAY) png_error(png, "expected grayscale");
    if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    channels = bit_depth == 16 ? 2 : 1;
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  std::size_t row_bytes = png_get_rowbytes(png, info);
  if (row_bytes != static_cast<std::size_t>(w) * channels) png_error(png, "unexpected row layout");
  io->row_data.resize(row_bytes * h);
  io->rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) io->rows[y] = io->row_data.data() + y * row_bytes;
  png_read_image(png, io->rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  width = static_cast<int>(w);
  height = static_cast<int>(h);
  io->channels = channels;
  return io;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  return encode(image.width, image.height, 8, PNG_COLOR_TYPE_RGB, image.pixels.data(),
                static_cast<std::size_t>(image.width) * 3);
}

std::vector<std::uint8_t> encode_png(const Gray16Image& image) {
  std::vector<std::uint8_t> big_endian(image.pixels.size() * 2);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    big_endian[2 * i] = static_cast<std::uint8_t>(image.pixels[i] >> 8);
    big_endian[2 * i + 1] = static_cast<std::uint8_t>(image.pixels[i] & 0xff);
  }
  return encode(image.width, image.height, 16, PNG_COLOR_TYPE_GRAY, big_endian.data(),
                static_cast<std::size_t>(image.width) * 2);
}

RgbImage decode_png_rgb(std::span<const std::uint8_t> bytes) {
  int w = 0;
  int h = 0;
  auto io = decode(bytes, DecodeAs::Rgb8, w, h);
  RgbImage out;
  out.width = w;
  out.height = h;
  out.pixels = std::move(io->row_data);
  return out;
}

Gray16Image decode_png_gray16(std::span<const std::uint8_t> bytes) {
  int w = 0;
  int h = 0;
  auto io = decode(bytes, DecodeAs::Gray16, w, h);
  Gray16Image out;
  out.width = w;
  out.height = h;
  out.pixels.resize(static_cast<std::size_t>(w) * h);
  bool wide = io->channels == 2;
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = wide ? static_cast<std::uint16_t>((io->row_data[2 * i] << 8) | io->row_data[2 * i + 1])
                         : io->row_data[i];
  }
  return out;
}

RgbImage read_png_rgb(const std::filesystem::path& path) {
  auto bytes = read_file_bytes(path);
  return decode_png_rgb(bytes);
}

std::pair<int, int> png_dimensions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::uint8_t head[24] = {};
  in.read(reinterpret_cast<char*>(head), sizeof head);
  if (in.gcount() != sizeof head || png_sig_cmp(head, 0, 8) != 0 || std::memcmp(head + 12, "IHDR", 4) != 0)
    throw Error(ErrorKind::ParseError, path.string() + " is not a PNG file");
  auto be32 = [&](int at) {
    return (std::uint32_t{head[at]} << 24) | (std::uint32_t{head[at + 1]} << 16) |
           (std::uint32_t{head[at + 2]} << 8) | std::uint32_t{head[at + 3]};
  };
  std::uint32_t w = be32(16);
  std::uint32_t h = be32(20);
  if (w == 0 || h == 0 || w > 0x7fffffffu || h > 0x7fffffffu)
    throw Error(ErrorKind::ParseError, path.string() + " has invalid dimensions");
  return {static_cast<int>(w), static_cast<int>(h)};
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_file_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot rename into " + path.string() + ": " + ec.message());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace poseforge
